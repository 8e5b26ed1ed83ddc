#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "coxcorr/errors.hpp"
#include "coxcorr/model.hpp"
#include "coxcorr/rng.hpp"

namespace coxcorr {

/// Simulates the latent GBM pair on the fine grid by exact log-normal
/// stepping (no discretization bias in the law of the path).
[[nodiscard]] inline LatentPath simulate_latent(const ModelParams& params, const SamplingDesign& design,
                                                Generator& rng) {
    validate(params);
    validate(design);
    const std::size_t steps = design.fine_steps();
    const double dt = design.delta(params.T) / static_cast<double>(design.refinement);
    const double sqdt = std::sqrt(dt);
    const double drift1 = (params.mu1 - 0.5 * params.sigma1 * params.sigma1) * dt;
    const double drift2 = (params.mu2 - 0.5 * params.sigma2 * params.sigma2) * dt;
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho));

    LatentPath path;
    path.step = dt;
    path.b_n = design.b_n;
    path.refinement = design.refinement;
    path.x1.resize(steps + 1);
    path.x2.resize(steps + 1);

    double log1 = std::log(params.x1_0);
    double log2 = std::log(params.x2_0);
    path.x1[0] = params.x1_0;
    path.x2[0] = params.x2_0;
    std::normal_distribution<double> normal;
    for (std::size_t i = 1; i <= steps; ++i) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        log1 += drift1 + params.sigma1 * sqdt * z1;
        log2 += drift2 + params.sigma2 * sqdt * (params.rho * z1 + rho_perp * z2);
        path.x1[i] = std::exp(log1);
        path.x2[i] = std::exp(log2);
    }
    return path;
}

/// Per-observation-interval integrals of the latent intensities.
struct IntervalIntensities {
    std::vector<double> lambda1;
    std::vector<double> lambda2;

    [[nodiscard]] std::size_t size() const noexcept { return lambda1.size(); }
};

/// Trapezoidal integral of each coordinate over every observation interval,
/// using the `refinement` fine sub-steps inside it.
[[nodiscard]] inline IntervalIntensities integrated_intensity(const LatentPath& path) {
    const std::size_t m = path.refinement;
    if (m == 0 || path.b_n == 0 || path.x1.size() != path.b_n * m + 1 || path.x2.size() != path.x1.size())
        throw StructuralError("latent path length does not match b_n * refinement + 1");
    IntervalIntensities out;
    out.lambda1.resize(path.b_n);
    out.lambda2.resize(path.b_n);
    for (std::size_t j = 0; j < path.b_n; ++j) {
        const std::size_t lo = j * m;
        double s1 = 0.5 * (path.x1[lo] + path.x1[lo + m]);
        double s2 = 0.5 * (path.x2[lo] + path.x2[lo + m]);
        for (std::size_t i = lo + 1; i < lo + m; ++i) {
            s1 += path.x1[i];
            s2 += path.x2[i];
        }
        out.lambda1[j] = path.step * s1;
        out.lambda2[j] = path.step * s2;
    }
    return out;
}

inline IntervalIntensities integrated_intensity(const LatentPath& path, const SamplingDesign& design) {
    if (path.b_n != design.b_n || path.refinement != design.refinement)
        throw StructuralError("latent path was not simulated on this design");
    return integrated_intensity(path);
}

/// Draws interval increments dY^a_j ~ Poisson(a_n * Lambda^a_j), independent
/// across j and across coordinates given the latent path, and returns the
/// cumulative counts.
[[nodiscard]] inline CountPath simulate_counts(const IntervalIntensities& intensities, double a_n,
                                               Generator& rng) {
    if (!(a_n > 0.0) || !std::isfinite(a_n)) throw DomainError("a_n must be finite and > 0");
    if (intensities.lambda1.size() != intensities.lambda2.size())
        throw StructuralError("intensity series have different lengths");
    // Mean at which the 64-bit Poisson sampler is still safe.
    constexpr double max_mean = 1e15;
    CountPath counts;
    const std::size_t b = intensities.size();
    counts.y1.assign(b + 1, 0);
    counts.y2.assign(b + 1, 0);
    auto draw = [&](double lambda, std::size_t j) -> std::int64_t {
        const double mean = a_n * lambda;
        if (!std::isfinite(mean) || mean < 0.0)
            throw DomainError("Poisson mean must be finite and nonnegative (interval " + std::to_string(j + 1) + ")");
        if (mean > max_mean) throw DomainError("Poisson mean exceeds the 64-bit sampling range");
        if (mean == 0.0) return 0;
        std::poisson_distribution<std::int64_t> poisson(mean);
        return poisson(rng);
    };
    for (std::size_t j = 0; j < b; ++j) {
        const std::int64_t d1 = draw(intensities.lambda1[j], j);
        const std::int64_t d2 = draw(intensities.lambda2[j], j);
        counts.y1[j + 1] = counts.y1[j] + d1;
        counts.y2[j + 1] = counts.y2[j] + d2;
    }
    return counts;
}

/// Effective regime exponent r = log(a_n) / log(b_n) and its classification
/// against the two rate conditions (strict inequalities).
struct RegimeReport {
    double r = 0.0;
    bool satisfies_b = false;        // r > 5/2
    bool satisfies_b_sharp = false;  // r > 3
};

/// Exponents within this distance of a threshold count as on the boundary.
inline constexpr double kRegimeBoundaryTolerance = 1e-9;

[[nodiscard]] inline RegimeReport validate_regime(std::size_t b_n, double a_n) {
    if (b_n < 4) throw DomainError("b_n must be >= 4");
    if (!(a_n > 0.0) || !std::isfinite(a_n)) throw DomainError("a_n must be finite and > 0");
    RegimeReport rep;
    rep.r = std::log(a_n) / std::log(static_cast<double>(b_n));
    rep.satisfies_b = rep.r > 2.5 + kRegimeBoundaryTolerance;
    rep.satisfies_b_sharp = rep.r > 3.0 + kRegimeBoundaryTolerance;
    return rep;
}

}  // namespace coxcorr
