#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coxcorr/estimators.hpp"
#include "coxcorr/harness.hpp"
#include "coxcorr/io.hpp"
#include "coxcorr/sim.hpp"

namespace coxcorr {

/// One Gamma estimator to apply to observed counts.
struct EstimatorChoice {
    enum class Kind { v1, v2, kernel };
    std::string label;
    Kind kind = Kind::v1;
    BandwidthSpec bandwidth = BandwidthSpec::exponent(0.5);

    [[nodiscard]] static EstimatorChoice from_variant(Variant v, const ExperimentConfig& cfg = {}) {
        switch (v) {
            case Variant::v1: return {"1", Kind::v1, BandwidthSpec::exponent(0.0)};
            case Variant::v2: return {"2", Kind::v2, BandwidthSpec::exponent(0.0)};
            default: return {std::string(name(v)), Kind::kernel, BandwidthSpec::exponent(cfg.kernel_exponent(v))};
        }
    }
};

struct EstimateLine {
    std::string label;
    std::optional<ResolvedBandwidth> bandwidth;
    XiValue xi;
    ConfidenceInterval ci;
};

struct EstimateReport {
    std::size_t b_n = 0;
    double T = 0.0;
    double a_n = 0.0;
    double level = 0.0;
    CovEstimate S;
    double correlation = 0.0;
    RegimeReport regime;
    std::vector<EstimateLine> lines;
};

/// S, C and one Xi estimate plus confidence interval per estimator choice.
/// Throws DegenerateError when S11 * S22 == 0.
[[nodiscard]] inline EstimateReport estimate_counts(const CountPath& counts, double T, double a_n,
                                                    std::span<const EstimatorChoice> choices, double level) {
    if (counts.b_n() < 4) throw DomainError("estimation needs b_n >= 4 observation intervals");
    EstimateReport rep;
    rep.b_n = counts.b_n();
    rep.T = T;
    rep.a_n = a_n;
    rep.level = level;
    rep.regime = validate_regime(rep.b_n, a_n);
    const Increments inc = increments(tilde_series(counts, a_n, T / static_cast<double>(rep.b_n)));
    rep.S = estimate_S(inc);
    rep.correlation = estimate_correlation(rep.S);
    for (const auto& choice : choices) {
        EstimateLine line;
        line.label = choice.label;
        GammaMatrix g;
        switch (choice.kind) {
            case EstimatorChoice::Kind::v1: g = gamma_v1(inc, T); break;
            case EstimatorChoice::Kind::v2: g = gamma_v2(inc, T); break;
            case EstimatorChoice::Kind::kernel: {
                const auto bw = resolve(choice.bandwidth, rep.b_n, T);
                line.bandwidth = bw;
                g = gamma_kernel(inc, T, bw);
                break;
            }
        }
        line.xi = estimate_xi(rep.S, g);
        line.ci = confidence_interval(rep.correlation, line.xi, rep.b_n, T, level);
        rep.lines.push_back(line);
    }
    return rep;
}

inline void write_report_csv(std::ostream& out, const EstimateReport& rep) {
    out << "variant,b_n,T,a_n,C,h,n_h,xi,xi_raw,xi_clamped,level,ci_lo,ci_hi,ci_lo_clamped,ci_hi_clamped\n";
    for (const auto& l : rep.lines) {
        out << l.label << ',' << rep.b_n << ',' << format_double(rep.T) << ',' << format_double(rep.a_n) << ','
            << format_double(rep.correlation) << ',';
        if (l.bandwidth) {
            out << format_double(l.bandwidth->h) << ',' << l.bandwidth->window;
        } else {
            out << ',';
        }
        out << ',' << format_double(l.xi.xi) << ',' << format_double(l.xi.raw) << ',' << (l.xi.clamped ? 1 : 0) << ','
            << format_double(rep.level) << ',' << format_double(l.ci.lo) << ',' << format_double(l.ci.hi) << ','
            << (l.ci.lo_clamped ? 1 : 0) << ',' << (l.ci.hi_clamped ? 1 : 0) << '\n';
    }
}

inline void write_report_markdown(std::ostream& out, const EstimateReport& rep) {
    out << "b_n = " << rep.b_n << ", T = " << format_double(rep.T) << ", a_n = " << format_double(rep.a_n)
        << " (r = " << format_fixed(rep.regime.r, 4) << ")\n";
    out << "S = (" << format_double(rep.S.s12) << ", " << format_double(rep.S.s11) << ", " << format_double(rep.S.s22)
        << ")\n";
    out << "C_n = " << format_double(rep.correlation) << "\n\n";
    out << "| variant | h | n(h) | xi | clamped | " << format_double(rep.level) << " CI |\n";
    out << "|---|---:|---:|---:|---|---|\n";
    for (const auto& l : rep.lines) {
        out << "| " << l.label << " | " << (l.bandwidth ? format_double(l.bandwidth->h) : "-") << " | "
            << (l.bandwidth ? std::to_string(l.bandwidth->window) : "-") << " | " << format_double(l.xi.xi) << " | "
            << (l.xi.clamped ? "yes" : "no") << " | [" << format_double(l.ci.lo) << ", " << format_double(l.ci.hi)
            << "]" << (l.ci.lo_clamped || l.ci.hi_clamped ? " (clipped)" : "") << " |\n";
    }
}

}  // namespace coxcorr
