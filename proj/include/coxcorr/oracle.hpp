#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "coxcorr/errors.hpp"
#include "coxcorr/estimators.hpp"
#include "coxcorr/model.hpp"
#include "coxcorr/summation.hpp"

namespace coxcorr {

/// Rows of the 2x2 diffusion coefficient at one node:
/// row 1 = (X1 sigma1, 0), row 2 = (X2 rho sigma2, X2 sqrt(1 - rho^2) sigma2).
struct DiffusionRows {
    std::array<std::array<double, 2>, 2> row{};

    [[nodiscard]] static DiffusionRows at(const ModelParams& p, double x1, double x2) noexcept {
        DiffusionRows d;
        d.row[0] = {x1 * p.sigma1, 0.0};
        d.row[1] = {x2 * p.rho * p.sigma2, x2 * std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho)) * p.sigma2};
        return d;
    }

    [[nodiscard]] double dot(int a, int b) const noexcept {
        return row[a][0] * row[b][0] + row[a][1] * row[b][1];
    }
};

namespace detail {

using SymTensor = std::array<std::array<double, 2>, 2>;

/// (x ~(x) y)_{ij} = (x_i y_j + x_j y_i) / 2 for the rows a, b.
inline SymTensor sym_tensor(const DiffusionRows& d, int a, int b) noexcept {
    SymTensor t{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t[i][j] = 0.5 * (d.row[a][i] * d.row[b][j] + d.row[a][j] * d.row[b][i]);
    return t;
}

inline double frobenius_dot(const SymTensor& x, const SymTensor& y) noexcept {
    double acc = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) acc += x[i][j] * y[i][j];
    return acc;
}

template <class Integrand>
double trapezoid(const LatentPath& path, Integrand&& f) {
    const std::size_t n = path.size();
    if (n < 2) throw StructuralError("latent path needs at least two nodes");
    CompensatedSum acc;
    acc += 0.5 * f(path.x1.front(), path.x2.front());
    for (std::size_t i = 1; i + 1 < n; ++i) acc += f(path.x1[i], path.x2[i]);
    acc += 0.5 * f(path.x1.back(), path.x2.back());
    return acc.value() * path.step;
}

}  // namespace detail

/// Gamma integrand at one node via the symmetrized tensor product.
[[nodiscard]] inline GammaMatrix gamma_integrand_tensor(const DiffusionRows& d) noexcept {
    std::array<detail::SymTensor, 3> t;
    for (std::size_t p = 0; p < 3; ++p) t[p] = detail::sym_tensor(d, kPairs[p].first, kPairs[p].second);
    GammaMatrix m;
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 3; ++q) m.g[p][q] = detail::frobenius_dot(t[p], t[q]);
    return m;
}

/// Same integrand via 1/2 [(a1.a2)(b1.b2) + (a1.b2)(b1.a2)].
[[nodiscard]] inline GammaMatrix gamma_integrand_halfsum(const DiffusionRows& d) noexcept {
    GammaMatrix m;
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t q = 0; q < 3; ++q) {
            const auto [a1, b1] = kPairs[p];
            const auto [a2, b2] = kPairs[q];
            m.g[p][q] = 0.5 * (d.dot(a1, a2) * d.dot(b1, b2) + d.dot(a1, b2) * d.dot(b1, a2));
        }
    }
    return m;
}

struct TrueU {
    CovEstimate U;
    double R = 0.0;
};

/// U^{ab} = (2/3) int_0^T x^a . x^b dt by the trapezoid rule on the fine grid,
/// and R = U12 / sqrt(U11 U22).
[[nodiscard]] inline TrueU true_U(const LatentPath& path, const ModelParams& params) {
    auto integral = [&](int a, int b) {
        return (2.0 / 3.0) *
               detail::trapezoid(path, [&](double x1, double x2) { return DiffusionRows::at(params, x1, x2).dot(a, b); });
    };
    TrueU out;
    out.U = {integral(0, 1), integral(0, 0), integral(1, 1)};
    const double denom = out.U.s11 * out.U.s22;
    if (!(denom > 0.0)) throw DegenerateError("U11 * U22 = 0: a volatility vanishes and R is undefined");
    out.R = std::clamp(out.U.s12 / std::sqrt(denom), -1.0, 1.0);
    return out;
}

/// Path-wise Gamma by trapezoidal quadrature of the tensor-form integrand.
[[nodiscard]] inline GammaMatrix true_gamma(const LatentPath& path, const ModelParams& params) {
    GammaMatrix out;
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t q = p; q < 3; ++q) {
            out.g[p][q] = detail::trapezoid(path, [&](double x1, double x2) {
                return gamma_integrand_tensor(DiffusionRows::at(params, x1, x2)).g[p][q];
            });
        }
    }
    detail::mirror_upper(out);
    return out;
}

/// Xi = v(U) Gamma v(U)^T.
[[nodiscard]] inline double true_xi(const CovEstimate& U, const GammaMatrix& gamma) {
    if (!(U.s11 * U.s22 > 0.0)) throw DegenerateError("U11 * U22 must be positive");
    return quadratic_form(correlation_weights(U), gamma);
}

struct TruthRecord {
    CovEstimate U;
    double R = 0.0;
    GammaMatrix Gamma;
    double Xi = 0.0;
};

[[nodiscard]] inline TruthRecord compute_truth(const LatentPath& path, const ModelParams& params) {
    TruthRecord t;
    const auto u = true_U(path, params);
    t.U = u.U;
    t.R = u.R;
    t.Gamma = true_gamma(path, params);
    t.Xi = true_xi(t.U, t.Gamma);
    return t;
}

}  // namespace coxcorr
