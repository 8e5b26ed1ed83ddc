#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "coxcorr/errors.hpp"
#include "coxcorr/model.hpp"
#include "coxcorr/summation.hpp"

namespace coxcorr {

/// Coordinate pairs indexing the (co)variance vector and the Gamma matrix,
/// in the fixed order (1,2), (1,1), (2,2) (zero-based here).
struct CoordPair {
    int first;
    int second;
};
inline constexpr std::array<CoordPair, 3> kPairs{{{0, 1}, {0, 0}, {1, 1}}};

/// Interval increments scaled to rate units: y~_k = dY_k / (a_n * delta_n),
/// k = 1..b_n stored at index k - 1.
struct TildeSeries {
    std::vector<double> y1;
    std::vector<double> y2;

    [[nodiscard]] std::size_t b_n() const noexcept { return y1.size(); }
    [[nodiscard]] const std::vector<double>& coord(int c) const noexcept { return c == 0 ? y1 : y2; }
};

[[nodiscard]] inline TildeSeries tilde_series(const CountPath& counts, double a_n, double delta_n) {
    if (!(a_n > 0.0) || !std::isfinite(a_n)) throw DomainError("a_n must be finite and > 0");
    if (!(delta_n > 0.0) || !std::isfinite(delta_n)) throw DomainError("delta_n must be finite and > 0");
    if (counts.y1.size() != counts.y2.size()) throw StructuralError("count series have different lengths");
    const std::size_t b = counts.b_n();
    if (b < 2) throw DomainError("need b_n >= 2 observation intervals");
    const double scale = a_n * delta_n;
    TildeSeries t;
    t.y1.resize(b);
    t.y2.resize(b);
    for (std::size_t k = 1; k <= b; ++k) {
        t.y1[k - 1] = static_cast<double>(counts.y1[k] - counts.y1[k - 1]) / scale;
        t.y2[k - 1] = static_cast<double>(counts.y2[k] - counts.y2[k - 1]) / scale;
    }
    return t;
}

/// First differences d_k = y~_k - y~_{k-1}, k = 2..b_n, stored at index k - 2.
struct Increments {
    std::vector<double> d1;
    std::vector<double> d2;

    [[nodiscard]] std::size_t size() const noexcept { return d1.size(); }
    /// b_n of the series the increments came from.
    [[nodiscard]] std::size_t b_n() const noexcept { return d1.size() + 1; }
    [[nodiscard]] double product(int a, int b, std::size_t i) const noexcept {
        return (a == 0 ? d1[i] : d2[i]) * (b == 0 ? d1[i] : d2[i]);
    }
    [[nodiscard]] double product(CoordPair p, std::size_t i) const noexcept {
        return product(p.first, p.second, i);
    }
};

[[nodiscard]] inline Increments increments(const TildeSeries& tilde) {
    if (tilde.y1.size() != tilde.y2.size()) throw StructuralError("tilde series have different lengths");
    if (tilde.b_n() < 2) throw DomainError("need b_n >= 2");
    Increments inc;
    const std::size_t n = tilde.b_n() - 1;
    inc.d1.resize(n);
    inc.d2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        inc.d1[i] = tilde.y1[i + 1] - tilde.y1[i];
        inc.d2[i] = tilde.y2[i + 1] - tilde.y2[i];
    }
    return inc;
}

/// (S12, S11, S22). Also the shape of the target U.
struct CovEstimate {
    double s12 = 0.0;
    double s11 = 0.0;
    double s22 = 0.0;

    [[nodiscard]] double operator[](std::size_t p) const noexcept { return p == 0 ? s12 : (p == 1 ? s11 : s22); }
    friend bool operator==(const CovEstimate&, const CovEstimate&) = default;
};

/// Symmetric 3x3 matrix indexed by kPairs.
struct GammaMatrix {
    std::array<std::array<double, 3>, 3> g{};

    [[nodiscard]] double operator()(std::size_t p, std::size_t q) const noexcept { return g[p][q]; }
    double& operator()(std::size_t p, std::size_t q) noexcept { return g[p][q]; }

    [[nodiscard]] static GammaMatrix identity() noexcept {
        GammaMatrix m;
        for (std::size_t p = 0; p < 3; ++p) m.g[p][p] = 1.0;
        return m;
    }

    friend bool operator==(const GammaMatrix&, const GammaMatrix&) = default;
};

[[nodiscard]] inline CovEstimate estimate_S(const Increments& inc) {
    CompensatedSum s12, s11, s22;
    for (std::size_t i = 0; i < inc.size(); ++i) {
        s12 += inc.d1[i] * inc.d2[i];
        s11 += inc.d1[i] * inc.d1[i];
        s22 += inc.d2[i] * inc.d2[i];
    }
    return {s12.value(), s11.value(), s22.value()};
}

[[nodiscard]] inline CovEstimate estimate_S(const TildeSeries& tilde) { return estimate_S(increments(tilde)); }

/// C = S12 / sqrt(S11 S22), clamped into [-1, 1] against rounding.
[[nodiscard]] inline double estimate_correlation(const CovEstimate& s) {
    const double denom = s.s11 * s.s22;
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw DegenerateError("S11 * S22 must be positive for the correlation to exist");
    return std::clamp(s.s12 / std::sqrt(denom), -1.0, 1.0);
}

namespace detail {

inline constexpr double kNineEighths = 9.0 / 8.0;

inline std::array<std::vector<double>, 3> pair_products(const Increments& inc) {
    std::array<std::vector<double>, 3> prods;
    for (std::size_t p = 0; p < 3; ++p) {
        prods[p].resize(inc.size());
        for (std::size_t i = 0; i < inc.size(); ++i) prods[p][i] = inc.product(kPairs[p], i);
    }
    return prods;
}

inline void mirror_upper(GammaMatrix& m) noexcept {
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < p; ++q) m.g[p][q] = m.g[q][p];
}

inline void check_horizon(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("T must be finite and > 0");
}

}  // namespace detail

/// Quarticity-type Gamma estimator: squared products minus the lag-2 cross
/// products that remove their mean.
[[nodiscard]] inline GammaMatrix gamma_v1(const Increments& inc, double T) {
    detail::check_horizon(T);
    const auto prods = detail::pair_products(inc);
    const std::size_t n = inc.size();
    const double scale = detail::kNineEighths * static_cast<double>(inc.b_n()) / T;
    GammaMatrix out;
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t q = p; q < 3; ++q) {
            CompensatedSum diag, lagged;
            for (std::size_t i = 0; i < n; ++i) diag += prods[p][i] * prods[q][i];
            for (std::size_t i = 0; i + 2 < n; ++i)
                lagged += prods[p][i] * prods[q][i + 2] + prods[p][i + 2] * prods[q][i];
            out.g[p][q] = scale * (diag.value() - 0.5 * lagged.value());
        }
    }
    detail::mirror_upper(out);
    return out;
}

[[nodiscard]] inline GammaMatrix gamma_v1(const TildeSeries& tilde, double T) { return gamma_v1(increments(tilde), T); }

/// Gamma estimator built from half squared lag-2 differences of the products.
[[nodiscard]] inline GammaMatrix gamma_v2(const Increments& inc, double T) {
    detail::check_horizon(T);
    const auto prods = detail::pair_products(inc);
    const std::size_t n = inc.size();
    const double scale = detail::kNineEighths * static_cast<double>(inc.b_n()) / T;
    GammaMatrix out;
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t q = p; q < 3; ++q) {
            CompensatedSum acc;
            for (std::size_t i = 0; i + 2 < n; ++i)
                acc += 0.5 * (prods[p][i + 2] - prods[p][i]) * (prods[q][i + 2] - prods[q][i]);
            out.g[p][q] = scale * acc.value();
        }
    }
    detail::mirror_upper(out);
    return out;
}

[[nodiscard]] inline GammaMatrix gamma_v2(const TildeSeries& tilde, double T) { return gamma_v2(increments(tilde), T); }

/// Kernel window: explicit width h, or h = T * b_n^(-exponent).
struct BandwidthSpec {
    struct Width {
        double h;
    };
    struct Exponent {
        double e;
    };
    std::variant<Width, Exponent> value;

    [[nodiscard]] static BandwidthSpec width(double h) { return {Width{h}}; }
    [[nodiscard]] static BandwidthSpec exponent(double e) { return {Exponent{e}}; }
};

/// A bandwidth evaluated on a concrete grid: h and the number of grid
/// intervals n(h) that fit inside it.
struct ResolvedBandwidth {
    double h = 0.0;
    std::size_t window = 0;
};

/// n(h) = floor(h * b_n / T). The product is nudged by a relative 1e-12 so
/// that h landing exactly on a grid time (up to rounding in pow) counts it.
[[nodiscard]] inline ResolvedBandwidth resolve(const BandwidthSpec& spec, std::size_t b_n, double T) {
    detail::check_horizon(T);
    if (b_n < 1) throw DomainError("b_n must be >= 1");
    double h = 0.0;
    if (const auto* w = std::get_if<BandwidthSpec::Width>(&spec.value)) {
        h = w->h;
    } else {
        const double e = std::get<BandwidthSpec::Exponent>(spec.value).e;
        if (!std::isfinite(e)) throw BandwidthError("bandwidth exponent must be finite");
        h = T * std::pow(static_cast<double>(b_n), -e);
    }
    if (!(h > 0.0) || !(h <= T * (1.0 + 1e-12)))
        throw BandwidthError("bandwidth h must satisfy 0 < h <= T (got " + std::to_string(h) + ")");
    const double cells = std::floor(h * static_cast<double>(b_n) / T * (1.0 + 1e-12));
    if (cells < 1.0) throw BandwidthError("bandwidth h = " + std::to_string(h) + " holds no grid interval");
    return {h, std::min(static_cast<std::size_t>(cells), b_n)};
}

/// Local (co)variation sum over the window ending at grid index k (2 <= k <= b_n):
/// sum_{l = max(k - n(h) + 1, 2)}^{k} d^a_l d^b_l / h.
[[nodiscard]] inline double kernel_partial(const Increments& inc, int a, int b, std::size_t k,
                                           const ResolvedBandwidth& bw) {
    if (bw.window < 1) throw BandwidthError("n(h) must be >= 1");
    if (k < 2 || k > inc.b_n()) throw DomainError("kernel index k must lie in [2, b_n]");
    const std::size_t lo = (k + 1 > bw.window + 2) ? k + 1 - bw.window : 2;
    CompensatedSum acc;
    for (std::size_t l = lo; l <= k; ++l) acc += inc.product(a, b, l - 2);
    return acc.value() / bw.h;
}

[[nodiscard]] inline double kernel_partial(const Increments& inc, int a, int b, std::size_t k,
                                           const BandwidthSpec& spec, double T) {
    return kernel_partial(inc, a, b, k, resolve(spec, inc.b_n(), T));
}

/// Kernel Gamma estimator. Window sums are updated incrementally and
/// recomputed from scratch every n(h) steps, so the cost is O(b_n) and
/// rounding drift stays bounded by one window.
[[nodiscard]] inline GammaMatrix gamma_kernel(const Increments& inc, double T, const ResolvedBandwidth& bw) {
    detail::check_horizon(T);
    if (bw.window < 1) throw BandwidthError("n(h) must be >= 1");
    const auto prods = detail::pair_products(inc);
    const std::size_t n = inc.size();
    const std::size_t w = bw.window;

    // partial[c][i] for the coordinate pairs c = (1,2), (1,1), (2,2).
    std::array<std::vector<double>, 3> partial;
    for (std::size_t c = 0; c < 3; ++c) {
        partial[c].resize(n);
        CompensatedSum window;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % w == 0) {
                window.reset();
                for (std::size_t l = (i + 1 > w ? i + 1 - w : 0); l <= i; ++l) window += prods[c][l];
            } else {
                window += prods[c][i];
                if (i >= w) window += -prods[c][i - w];
            }
            partial[c][i] = window.value() / bw.h;
        }
    }
    // Pair (a, b) -> partial index.
    auto slot = [](int a, int b) -> std::size_t { return a != b ? 0 : (a == 0 ? 1 : 2); };

    const double scale = detail::kNineEighths * T / static_cast<double>(inc.b_n());
    GammaMatrix out;
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t q = p; q < 3; ++q) {
            const auto [a1, b1] = kPairs[p];
            const auto [a2, b2] = kPairs[q];
            const auto& pa = partial[slot(a1, a2)];
            const auto& pb = partial[slot(b1, b2)];
            const auto& pc = partial[slot(a1, b2)];
            const auto& pd = partial[slot(b1, a2)];
            CompensatedSum acc;
            for (std::size_t i = 0; i < n; ++i) acc += pa[i] * pb[i] + pc[i] * pd[i];
            out.g[p][q] = scale * acc.value();
        }
    }
    detail::mirror_upper(out);
    return out;
}

[[nodiscard]] inline GammaMatrix gamma_kernel(const Increments& inc, double T, const BandwidthSpec& spec) {
    return gamma_kernel(inc, T, resolve(spec, inc.b_n(), T));
}

[[nodiscard]] inline GammaMatrix gamma_kernel(const TildeSeries& tilde, double T, const BandwidthSpec& spec) {
    return gamma_kernel(increments(tilde), T, spec);
}

/// Gradient of the correlation map (c12, c11, c22) -> c12 / sqrt(c11 c22).
[[nodiscard]] inline std::array<double, 3> correlation_weights(const CovEstimate& s) {
    const double denom = s.s11 * s.s22;
    if (!(denom > 0.0) || !std::isfinite(denom)) throw DegenerateError("S11 * S22 must be positive");
    const double root = std::sqrt(denom);
    return {1.0 / root, -s.s12 / (2.0 * s.s11 * root), -s.s12 / (2.0 * s.s22 * root)};
}

[[nodiscard]] inline double quadratic_form(const std::array<double, 3>& v, const GammaMatrix& g) noexcept {
    double acc = 0.0;
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 3; ++q) acc += v[p] * g.g[p][q] * v[q];
    return acc;
}

struct XiValue {
    double xi = 0.0;
    double raw = 0.0;
    bool clamped = false;
};

/// Plug-in asymptotic variance of C_n: v(S) Gamma v(S)^T, with negative
/// values (Gamma estimates need not be PSD) clamped to 0 and flagged.
[[nodiscard]] inline XiValue estimate_xi(const CovEstimate& s, const GammaMatrix& g) {
    const double raw = quadratic_form(correlation_weights(s), g);
    return {std::max(raw, 0.0), raw, raw < 0.0};
}

/// Standard normal quantile.
[[nodiscard]] inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs 0 < p < 1");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

struct ConfidenceInterval {
    double raw_lo = 0.0;
    double raw_hi = 0.0;
    double lo = 0.0;  // raw interval intersected with [-1, 1]
    double hi = 0.0;
    bool lo_clamped = false;
    bool hi_clamped = false;
    double half_width = 0.0;

    [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// C +- z_{(1+level)/2} sqrt(xi T / b_n).
[[nodiscard]] inline ConfidenceInterval confidence_interval(double c, const XiValue& xi, std::size_t b_n, double T,
                                                            double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
    if (!(xi.xi >= 0.0) || !std::isfinite(xi.xi)) throw DomainError("xi must be finite and >= 0");
    if (b_n < 2) throw DomainError("b_n must be >= 2");
    detail::check_horizon(T);
    ConfidenceInterval ci;
    ci.half_width = normal_quantile(0.5 * (1.0 + level)) * std::sqrt(xi.xi * T / static_cast<double>(b_n));
    ci.raw_lo = c - ci.half_width;
    ci.raw_hi = c + ci.half_width;
    ci.lo_clamped = ci.raw_lo < -1.0;
    ci.hi_clamped = ci.raw_hi > 1.0;
    ci.lo = ci.lo_clamped ? -1.0 : ci.raw_lo;
    ci.hi = ci.hi_clamped ? 1.0 : ci.raw_hi;
    return ci;
}

}  // namespace coxcorr
