#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "coxcorr/errors.hpp"

namespace coxcorr {

/// Bivariate geometric Brownian motion driving the two intensities:
///   dX1 = X1 (mu1 dt + sigma1 dw1)
///   dX2 = X2 (mu2 dt + rho sigma2 dw1 + sqrt(1 - rho^2) sigma2 dw2)
struct ModelParams {
    double mu1 = 0.2;
    double mu2 = 0.3;
    double sigma1 = 0.2;
    double sigma2 = 0.3;
    double rho = 0.7;
    double x1_0 = 1.0;
    double x2_0 = 2.0;
    double T = 1.0;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Throws ConfigError naming the first violated field.
inline void validate(const ModelParams& p, const std::string& prefix = "model.") {
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) throw ConfigError(prefix + name, "must be finite");
    };
    finite(p.mu1, "mu1");
    finite(p.mu2, "mu2");
    finite(p.sigma1, "sigma1");
    finite(p.sigma2, "sigma2");
    finite(p.rho, "rho");
    finite(p.x1_0, "x1_0");
    finite(p.x2_0, "x2_0");
    finite(p.T, "T");
    if (p.sigma1 < 0.0) throw ConfigError(prefix + "sigma1", "must be >= 0");
    if (p.sigma2 < 0.0) throw ConfigError(prefix + "sigma2", "must be >= 0");
    if (p.rho < -1.0 || p.rho > 1.0) throw ConfigError(prefix + "rho", "must lie in [-1, 1]");
    if (p.x1_0 <= 0.0) throw ConfigError(prefix + "x1_0", "must be > 0");
    if (p.x2_0 <= 0.0) throw ConfigError(prefix + "x2_0", "must be > 0");
    if (p.T <= 0.0) throw ConfigError(prefix + "T", "must be > 0");
}

/// Equidistant observation grid t_j = j * T / b_n, j = 0..b_n, with intensity
/// scale a_n and `refinement` latent sub-steps per observation interval.
struct SamplingDesign {
    std::size_t b_n = 16;
    double a_n = 1.0;
    std::size_t refinement = 8;

    [[nodiscard]] double delta(double T) const noexcept { return T / static_cast<double>(b_n); }
    [[nodiscard]] std::size_t fine_steps() const noexcept { return b_n * refinement; }

    friend bool operator==(const SamplingDesign&, const SamplingDesign&) = default;
};

inline void validate(const SamplingDesign& d, const std::string& prefix = "design.") {
    if (d.b_n < 4) throw ConfigError(prefix + "b_n", "must be >= 4");
    if (!(d.a_n > 0.0) || !std::isfinite(d.a_n)) throw ConfigError(prefix + "a_n", "must be finite and > 0");
    if (d.refinement < 1) throw ConfigError(prefix + "refinement", "must be >= 1");
}

/// Latent intensity levels on the fine grid s_i = i * step, i = 0..b_n*m.
struct LatentPath {
    double step = 0.0;
    std::size_t b_n = 0;
    std::size_t refinement = 0;
    std::vector<double> x1;
    std::vector<double> x2;

    [[nodiscard]] std::size_t size() const noexcept { return x1.size(); }
    [[nodiscard]] double time(std::size_t i) const noexcept { return static_cast<double>(i) * step; }
};

/// Cumulative counts at the b_n + 1 observation times; y1[0] == y2[0] == 0.
struct CountPath {
    std::vector<std::int64_t> y1;
    std::vector<std::int64_t> y2;

    [[nodiscard]] std::size_t b_n() const noexcept { return y1.empty() ? 0 : y1.size() - 1; }

    friend bool operator==(const CountPath&, const CountPath&) = default;
};

/// Throws StructuralError unless both series start at 0, are nondecreasing
/// and have equal length >= 2.
inline void validate(const CountPath& c) {
    if (c.y1.size() != c.y2.size()) throw StructuralError("count series have different lengths");
    if (c.y1.size() < 2) throw StructuralError("count path needs at least two observation times");
    if (c.y1.front() != 0 || c.y2.front() != 0) throw StructuralError("counts must start at 0");
    for (std::size_t j = 1; j < c.y1.size(); ++j) {
        if (c.y1[j] < c.y1[j - 1] || c.y2[j] < c.y2[j - 1])
            throw StructuralError("counts must be nondecreasing (row " + std::to_string(j) + ")");
    }
}

}  // namespace coxcorr
