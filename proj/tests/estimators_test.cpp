#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "brute_force.hpp"
#include "coxcorr/estimators.hpp"

using namespace coxcorr;

namespace {

TildeSeries to_tilde(const brute::Series& s) { return {s[0], s[1]}; }

void expect_matrix_matches(const GammaMatrix& got, const brute::Matrix& want, double tol) {
    const long double scale = brute::max_abs(want);
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 3; ++q)
            EXPECT_TRUE(brute::close_rel(got(p, q), want[p][q], scale, tol))
                << "entry (" << p << "," << q << "): " << got(p, q) << " vs " << static_cast<double>(want[p][q]);
}

bool is_zero(const GammaMatrix& g) {
    for (const auto& row : g.g)
        for (double x : row)
            if (x != 0.0) return false;
    return true;
}

bool bit_symmetric(const GammaMatrix& g) {
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 3; ++q)
            if (g(p, q) != g(q, p)) return false;
    return true;
}

}  // namespace

TEST(TildeSeries, DirectArithmetic) {
    CountPath c{{0, 0, 1}, {0, 1, 1}};
    const auto t = tilde_series(c, 1.0, 0.5);
    EXPECT_EQ(t.y1, (std::vector<double>{0.0, 2.0}));
    EXPECT_EQ(t.y2, (std::vector<double>{2.0, 0.0}));
}

TEST(TildeSeries, LinearCountsGiveConstantSeries) {
    CountPath c{{0, 7, 14, 21, 28}, {0, 3, 6, 9, 12}};
    const auto t = tilde_series(c, 4.0, 0.25);
    for (double v : t.y1) EXPECT_DOUBLE_EQ(v, 7.0);
    for (double v : t.y2) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(TildeSeries, DoublingScaleHalvesEntries) {
    CountPath c{{0, 5, 9, 20, 21}, {0, 2, 2, 8, 15}};
    const auto a = tilde_series(c, 3.0, 0.25);
    const auto b = tilde_series(c, 6.0, 0.25);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_DOUBLE_EQ(b.y1[k], 0.5 * a.y1[k]);
        EXPECT_DOUBLE_EQ(b.y2[k], 0.5 * a.y2[k]);
    }
}

TEST(TildeSeries, RejectsZeroScaleOrStep) {
    CountPath c{{0, 1, 2}, {0, 1, 2}};
    EXPECT_THROW((void)tilde_series(c, 0.0, 0.5), DomainError);
    EXPECT_THROW((void)tilde_series(c, 1.0, 0.0), DomainError);
    EXPECT_THROW((void)tilde_series(CountPath{{0, 1}, {0, 1}}, 1.0, 0.5), DomainError);
}

TEST(EstimateS, SingleTermSum) {
    TildeSeries t{{0.0, 2.0}, {0.0, 2.0}};
    EXPECT_EQ(estimate_S(t), (CovEstimate{4.0, 4.0, 4.0}));
}

TEST(EstimateS, ConstantSeriesIsZero) {
    TildeSeries t{std::vector<double>(9, 3.5), std::vector<double>(9, 1.25)};
    EXPECT_EQ(estimate_S(t), (CovEstimate{0.0, 0.0, 0.0}));
}

TEST(EstimateS, MatchesBruteForceOnRandomInstances) {
    std::mt19937_64 rng(1234);
    for (int it = 0; it < 200; ++it) {
        const std::size_t b = 2 + rng() % 31;
        const auto y = brute::random_series(rng, b);
        const auto got = estimate_S(to_tilde(y));
        const auto want = brute::S(y);
        const long double scale = std::max({std::fabs(want[0]), want[1], want[2]});
        for (std::size_t p = 0; p < 3; ++p) EXPECT_TRUE(brute::close_rel(got[p], want[p], scale, 1e-10));
    }
}

TEST(EstimateS, CauchySchwarzWithinFourUlps) {
    std::mt19937_64 rng(77);
    std::lognormal_distribution<double> mag(0.0, 3.0);
    for (int it = 0; it < 500; ++it) {
        const std::size_t b = 2 + rng() % 200;
        auto y = brute::random_series(rng, b);
        const double s1 = mag(rng), s2 = mag(rng);
        for (auto& v : y[0]) v *= s1;
        for (auto& v : y[1]) v *= s2;
        const auto s = estimate_S(to_tilde(y));
        const double lhs = s.s12 * s.s12;
        const double rhs = s.s11 * s.s22;
        EXPECT_LE(lhs, rhs * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()));
        EXPECT_GE(s.s11, 0.0);
        EXPECT_GE(s.s22, 0.0);
    }
}

TEST(EstimateCorrelation, Examples) {
    EXPECT_EQ(estimate_correlation({4, 4, 4}), 1.0);
    EXPECT_EQ(estimate_correlation({0, 1, 1}), 0.0);
    std::mt19937_64 rng(5);
    auto y = brute::random_series(rng, 20);
    for (std::size_t k = 0; k < y[0].size(); ++k) y[1][k] = -y[0][k];
    EXPECT_DOUBLE_EQ(estimate_correlation(estimate_S(to_tilde(y))), -1.0);
}

TEST(EstimateCorrelation, DegenerateDataThrows) {
    EXPECT_THROW((void)estimate_correlation({0, 0, 1}), DegenerateError);
    EXPECT_THROW((void)estimate_correlation({0, 1, 0}), DegenerateError);
}

TEST(GammaV1, SingleTermHandComputation) {
    TildeSeries t{{0.0, 2.0}, {0.0, 2.0}};
    const auto g = gamma_v1(t, 1.0);
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 3; ++q) EXPECT_DOUBLE_EQ(g(p, q), 36.0);
}

TEST(GammaV1, ConstantSeriesIsZero) {
    TildeSeries t{std::vector<double>(12, 2.0), std::vector<double>(12, 5.0)};
    EXPECT_TRUE(is_zero(gamma_v1(t, 1.0)));
}

TEST(GammaV1, MatchesBruteForce) {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 200; ++it) {
        const std::size_t b = 4 + rng() % 29;
        const double T = 0.5 + (rng() % 100) / 40.0;
        const auto y = brute::random_series(rng, b);
        const auto g = gamma_v1(to_tilde(y), T);
        expect_matrix_matches(g, brute::gamma1(y, T), 1e-10);
        EXPECT_TRUE(bit_symmetric(g));
    }
}

TEST(GammaV2, ShortSeriesIsZero) {
    TildeSeries t{{1.0, 4.0, 2.0}, {0.0, 3.0, 1.0}};
    EXPECT_TRUE(is_zero(gamma_v2(t, 1.0)));
}

TEST(GammaV2, ConstantSeriesIsZero) {
    TildeSeries t{std::vector<double>(12, 2.0), std::vector<double>(12, 5.0)};
    EXPECT_TRUE(is_zero(gamma_v2(t, 1.0)));
}

TEST(GammaV2, MatchesBruteForceAndExpansion) {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 200; ++it) {
        const std::size_t b = 4 + rng() % 29;
        const auto y = brute::random_series(rng, b);
        const auto g = gamma_v2(to_tilde(y), 1.0);
        expect_matrix_matches(g, brute::gamma2(y, 1.0), 1e-10);
        expect_matrix_matches(g, brute::gamma2_expanded(y, 1.0), 1e-10);
        EXPECT_TRUE(bit_symmetric(g));
    }
}

TEST(Bandwidth, ResolvesWindowFromWidthOrExponent) {
    auto bw = resolve(BandwidthSpec::exponent(0.25), 16, 1.0);
    EXPECT_DOUBLE_EQ(bw.h, 0.5);
    EXPECT_EQ(bw.window, 8u);
    bw = resolve(BandwidthSpec::exponent(0.5), 32, 1.0);
    EXPECT_EQ(bw.window, 5u);
    bw = resolve(BandwidthSpec::exponent(0.75), 256, 1.0);
    EXPECT_EQ(bw.window, 4u);
    bw = resolve(BandwidthSpec::width(3.5 / 16.0), 16, 1.0);
    EXPECT_EQ(bw.window, 3u);
    bw = resolve(BandwidthSpec::width(2.0), 16, 2.0);
    EXPECT_EQ(bw.window, 16u);
}

TEST(Bandwidth, RejectsEmptyOrOversizedWindows) {
    EXPECT_THROW((void)resolve(BandwidthSpec::width(0.01), 16, 1.0), BandwidthError);
    EXPECT_THROW((void)resolve(BandwidthSpec::width(0.0), 16, 1.0), BandwidthError);
    EXPECT_THROW((void)resolve(BandwidthSpec::width(1.5), 16, 1.0), BandwidthError);
    EXPECT_THROW((void)resolve(BandwidthSpec::exponent(1.5), 16, 1.0), BandwidthError);
    Increments inc{{1.0, 2.0}, {1.0, 2.0}};
    EXPECT_THROW((void)kernel_partial(inc, 0, 0, 2, ResolvedBandwidth{0.5, 0}), BandwidthError);
}

TEST(KernelPartial, WindowOfOneIsSingleTerm) {
    std::mt19937_64 rng(4);
    const auto y = brute::random_series(rng, 16);
    const auto inc = increments(to_tilde(y));
    const ResolvedBandwidth bw{0.07, 1};
    for (std::size_t k = 2; k <= 16; ++k)
        EXPECT_DOUBLE_EQ(kernel_partial(inc, 0, 1, k, bw), inc.d1[k - 2] * inc.d2[k - 2] / 0.07);
}

TEST(KernelPartial, LowerLimitClampsAtTwo) {
    std::mt19937_64 rng(6);
    const auto y = brute::random_series(rng, 16);
    const auto inc = increments(to_tilde(y));
    for (std::size_t n : {1u, 3u, 8u, 16u})
        EXPECT_DOUBLE_EQ(kernel_partial(inc, 1, 1, 2, ResolvedBandwidth{0.3, n}), inc.d2[0] * inc.d2[0] / 0.3);
}

TEST(KernelPartial, FullWindowCollapsesToSOverT) {
    std::mt19937_64 rng(8);
    for (double T : {1.0, 2.5}) {
        const auto y = brute::random_series(rng, 24);
        const auto inc = increments(to_tilde(y));
        const auto s = estimate_S(inc);
        const auto full = BandwidthSpec::width(T);
        EXPECT_EQ(kernel_partial(inc, 0, 1, 24, full, T), s.s12 / T);
        EXPECT_EQ(kernel_partial(inc, 0, 0, 24, full, T), s.s11 / T);
        EXPECT_EQ(kernel_partial(inc, 1, 1, 24, full, T), s.s22 / T);
    }
}

TEST(KernelPartial, MatchesNaiveWindowSums) {
    std::mt19937_64 rng(10);
    const auto y = brute::random_series(rng, 16);
    const auto inc = increments(to_tilde(y));
    const ResolvedBandwidth bw{3.5 / 16.0, 3};
    for (std::size_t k = 2; k <= 16; ++k)
        EXPECT_NEAR(kernel_partial(inc, 0, 1, k, bw), static_cast<double>(brute::partial(y, 0, 1, k, 3, bw.h)), 1e-12);
}

TEST(GammaKernel, ConstantSeriesIsZero) {
    TildeSeries t{std::vector<double>(16, 2.0), std::vector<double>(16, 5.0)};
    EXPECT_TRUE(is_zero(gamma_kernel(t, 1.0, BandwidthSpec::exponent(0.5))));
}

TEST(GammaKernel, LengthSixteenWindowThreeMatchesNaive) {
    std::mt19937_64 rng(16);
    const auto y = brute::random_series(rng, 16);
    const double h = 3.5 / 16.0;
    ASSERT_EQ(brute::window(h, 16, 1.0), 3u);
    const auto g = gamma_kernel(to_tilde(y), 1.0, BandwidthSpec::width(h));
    expect_matrix_matches(g, brute::gamma_kernel(y, 1.0, h), 1e-10);
    EXPECT_TRUE(bit_symmetric(g));
}

TEST(GammaKernel, RollingWindowMatchesNaiveOnRandomInputs) {
    std::mt19937_64 rng(31);
    std::lognormal_distribution<double> spread(0.0, 2.0);
    for (int it = 0; it < 200; ++it) {
        const std::size_t b = 4 + rng() % 29;
        auto y = brute::random_series(rng, b);
        // Widely varying magnitudes along the series.
        for (std::size_t k = 0; k < b; ++k) {
            const double f = spread(rng);
            y[0][k] *= f;
            y[1][k] *= f;
        }
        const double T = 1.0 + (rng() % 3);
        const std::size_t n = 1 + rng() % b;
        const double h = (static_cast<double>(n) + 0.5) * T / static_cast<double>(b);
        const double hh = std::min(h, T);
        const auto g = gamma_kernel(to_tilde(y), T, BandwidthSpec::width(hh));
        expect_matrix_matches(g, brute::gamma_kernel(y, T, hh), 1e-10);
        EXPECT_TRUE(bit_symmetric(g));
    }
}

TEST(GammaKernel, LongSeriesRollingMatchesNaive) {
    std::mt19937_64 rng(41);
    const auto y = brute::random_series(rng, 1024);
    for (double e : {0.25, 0.5, 0.75}) {
        const double h = std::pow(1024.0, -e);
        const auto g = gamma_kernel(to_tilde(y), 1.0, BandwidthSpec::width(h));
        expect_matrix_matches(g, brute::gamma_kernel(y, 1.0, h), 1e-10);
    }
}

TEST(EstimateXi, Examples) {
    auto xi = estimate_xi({0, 1, 1}, GammaMatrix::identity());
    EXPECT_DOUBLE_EQ(xi.xi, 1.0);
    EXPECT_FALSE(xi.clamped);
    xi = estimate_xi({1, 1, 1}, GammaMatrix::identity());
    EXPECT_DOUBLE_EQ(xi.xi, 1.5);
    EXPECT_FALSE(xi.clamped);
}

TEST(EstimateXi, NegativeFormIsClamped) {
    GammaMatrix g = GammaMatrix::identity();
    g(0, 0) = -0.2;
    const auto xi = estimate_xi({0, 1, 1}, g);
    EXPECT_EQ(xi.xi, 0.0);
    EXPECT_DOUBLE_EQ(xi.raw, -0.2);
    EXPECT_TRUE(xi.clamped);
}

TEST(EstimateXi, DegenerateThrows) {
    EXPECT_THROW((void)estimate_xi({0, 0, 1}, GammaMatrix::identity()), DegenerateError);
}

TEST(EstimateXi, ZeroHomogeneousInScale) {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> lam(0.01, 0.05);
    std::uniform_real_distribution<double> mult(0.1, 50.0);
    for (int it = 0; it < 100; ++it) {
        const std::size_t b = 8 + rng() % 120;
        CountPath c{{0}, {0}};
        for (std::size_t j = 0; j < b; ++j) {
            std::poisson_distribution<std::int64_t> p1(1e5 * lam(rng)), p2(1e5 * lam(rng));
            c.y1.push_back(c.y1.back() + p1(rng));
            c.y2.push_back(c.y2.back() + p2(rng));
        }
        const double a = 1e5, scale = mult(rng), dt = 1.0 / b;
        const auto i1 = increments(tilde_series(c, a, dt));
        const auto i2 = increments(tilde_series(c, scale * a, dt));
        const auto s1 = estimate_S(i1), s2 = estimate_S(i2);
        EXPECT_NEAR(estimate_correlation(s2), estimate_correlation(s1), 1e-12 * std::abs(estimate_correlation(s1)));
        for (int v = 0; v < 3; ++v) {
            GammaMatrix g1, g2;
            if (v == 0) {
                g1 = gamma_v1(i1, 1.0);
                g2 = gamma_v1(i2, 1.0);
            } else if (v == 1) {
                g1 = gamma_v2(i1, 1.0);
                g2 = gamma_v2(i2, 1.0);
            } else {
                g1 = gamma_kernel(i1, 1.0, BandwidthSpec::exponent(0.5));
                g2 = gamma_kernel(i2, 1.0, BandwidthSpec::exponent(0.5));
            }
            const auto x1 = estimate_xi(s1, g1), x2 = estimate_xi(s2, g2);
            EXPECT_NEAR(x2.raw, x1.raw, 1e-12 * std::abs(x1.raw));
        }
    }
}

TEST(NormalQuantile, TableValues) {
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.995), 2.5758293035489004, 1e-12);
    EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
    EXPECT_NEAR(normal_quantile(0.05), -1.6448536269514722, 1e-12);
    EXPECT_THROW((void)normal_quantile(1.0), DomainError);
}

TEST(ConfidenceInterval, DefaultModelScaleExample) {
    const auto ci = confidence_interval(0.7, XiValue{0.5, 0.5, false}, 256, 1.0, 0.95);
    const double half = 1.959963984540054 * std::sqrt(0.5 / 256.0);
    EXPECT_NEAR(ci.half_width, 0.086620, 1e-5);
    EXPECT_NEAR(ci.raw_lo, 0.7 - half, 1e-12);
    EXPECT_NEAR(ci.raw_hi, 0.7 + half, 1e-12);
    EXPECT_NEAR(ci.raw_lo, 0.61338, 1e-5);
    EXPECT_NEAR(ci.raw_hi, 0.78662, 1e-5);
    EXPECT_FALSE(ci.lo_clamped || ci.hi_clamped);
}

TEST(ConfidenceInterval, ZeroVarianceIsDegenerateInterval) {
    const auto ci = confidence_interval(0.3, XiValue{}, 64, 1.0, 0.9);
    EXPECT_EQ(ci.lo, 0.3);
    EXPECT_EQ(ci.hi, 0.3);
}

TEST(ConfidenceInterval, ClampsToUnitInterval) {
    const auto ci = confidence_interval(0.99, XiValue{4.0, 4.0, false}, 16, 1.0, 0.95);
    EXPECT_GT(ci.raw_hi, 1.0);
    EXPECT_EQ(ci.hi, 1.0);
    EXPECT_TRUE(ci.hi_clamped);
    EXPECT_FALSE(ci.lo_clamped);
    EXPECT_NEAR(ci.lo, ci.raw_lo, 0.0);
}

TEST(ConfidenceInterval, RejectsBadLevel) {
    EXPECT_THROW((void)confidence_interval(0.1, XiValue{}, 16, 1.0, 1.0), DomainError);
    EXPECT_THROW((void)confidence_interval(0.1, XiValue{}, 16, 1.0, 0.0), DomainError);
}
