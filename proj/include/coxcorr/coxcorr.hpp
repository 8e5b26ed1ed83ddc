#pragma once

#include "coxcorr/config.hpp"
#include "coxcorr/errors.hpp"
#include "coxcorr/estimators.hpp"
#include "coxcorr/harness.hpp"
#include "coxcorr/io.hpp"
#include "coxcorr/model.hpp"
#include "coxcorr/oracle.hpp"
#include "coxcorr/pipeline.hpp"
#include "coxcorr/rng.hpp"
#include "coxcorr/sim.hpp"
#include "coxcorr/summation.hpp"
