#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "coxcorr/errors.hpp"
#include "coxcorr/estimators.hpp"
#include "coxcorr/model.hpp"
#include "coxcorr/oracle.hpp"
#include "coxcorr/rng.hpp"
#include "coxcorr/sim.hpp"
#include "coxcorr/summation.hpp"

namespace coxcorr {

/// Asymptotic variance estimators compared in the experiment: the two
/// quadratic Gamma estimators and the kernel estimator at three bandwidths.
enum class Variant { v1, v2, w, m, n };

inline constexpr std::array<Variant, 5> kAllVariants{Variant::v1, Variant::v2, Variant::w, Variant::m, Variant::n};

[[nodiscard]] constexpr std::string_view name(Variant v) noexcept {
    switch (v) {
        case Variant::v1: return "1";
        case Variant::v2: return "2";
        case Variant::w: return "w";
        case Variant::m: return "m";
        case Variant::n: return "n";
    }
    return "?";
}

[[nodiscard]] inline std::optional<Variant> parse_variant(std::string_view s) noexcept {
    for (Variant v : kAllVariants)
        if (name(v) == s) return v;
    return std::nullopt;
}

[[nodiscard]] constexpr bool is_kernel(Variant v) noexcept {
    return v == Variant::w || v == Variant::m || v == Variant::n;
}

struct ExperimentConfig {
    ModelParams model;
    std::vector<std::size_t> b_n_list{16, 32, 64, 128, 256, 512, 1024};
    std::vector<double> r_list{2.0, 2.5, 3.0, 3.5};
    std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};
    std::size_t replications = 1000;
    std::uint64_t seed = 20170601;
    std::size_t refinement = 8;
    double ci_level = 0.95;
    /// Bandwidth exponents e of h = T b_n^-e for the kernel variants w, m, n.
    std::array<double, 3> kernel_exponents{0.25, 0.5, 0.75};

    [[nodiscard]] double kernel_exponent(Variant v) const noexcept {
        switch (v) {
            case Variant::w: return kernel_exponents[0];
            case Variant::m: return kernel_exponents[1];
            case Variant::n: return kernel_exponents[2];
            default: return 0.0;
        }
    }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Field checks raise ConfigError; a vanishing volatility raises
/// DegenerateError because the target Xi is then undefined on every path.
inline void validate(const ExperimentConfig& c) {
    validate(c.model, "model.");
    if (c.b_n_list.empty()) throw ConfigError("experiment.b_n", "must not be empty");
    for (std::size_t b : c.b_n_list)
        if (b < 4) throw ConfigError("experiment.b_n", "every b_n must be >= 4");
    if (c.r_list.empty()) throw ConfigError("experiment.r", "must not be empty");
    for (double r : c.r_list)
        if (!std::isfinite(r) || r <= 0.0) throw ConfigError("experiment.r", "rate exponents must be finite and > 0");
    if (c.variants.empty()) throw ConfigError("experiment.variants", "must not be empty");
    if (c.replications < 1) throw ConfigError("experiment.replications", "must be >= 1");
    if (c.refinement < 1) throw ConfigError("experiment.refinement", "must be >= 1");
    if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) throw ConfigError("experiment.ci_level", "must lie in (0, 1)");
    for (double e : c.kernel_exponents)
        if (!std::isfinite(e) || e < 0.0) throw ConfigError("experiment.kernel_exponents", "must be finite and >= 0");
    if (c.model.sigma1 == 0.0 || c.model.sigma2 == 0.0)
        throw DegenerateError("model has a zero volatility: the asymptotic variance target is undefined");
}

[[nodiscard]] inline double intensity_scale(std::size_t b_n, double r) {
    return std::pow(static_cast<double>(b_n), r);
}

/// Gamma estimate for one variant from precomputed increments.
[[nodiscard]] inline GammaMatrix estimate_gamma(const Increments& inc, double T, Variant v, const ExperimentConfig& cfg) {
    switch (v) {
        case Variant::v1: return gamma_v1(inc, T);
        case Variant::v2: return gamma_v2(inc, T);
        default: return gamma_kernel(inc, T, BandwidthSpec::exponent(cfg.kernel_exponent(v)));
    }
}

struct VariantResult {
    Variant variant{};
    XiValue xi;
    ConfidenceInterval ci;
};

struct ReplicationRecord {
    std::size_t index = 0;
    bool degenerate = false;
    double correlation = 0.0;
    double truth_R = 0.0;
    double truth_xi = 0.0;
    std::vector<VariantResult> results;  // config.variants order; empty when degenerate

    friend bool operator==(const ReplicationRecord& a, const ReplicationRecord& b) {
        if (a.index != b.index || a.degenerate != b.degenerate || a.correlation != b.correlation ||
            a.truth_R != b.truth_R || a.truth_xi != b.truth_xi || a.results.size() != b.results.size())
            return false;
        for (std::size_t i = 0; i < a.results.size(); ++i) {
            const auto& x = a.results[i];
            const auto& y = b.results[i];
            if (x.variant != y.variant || x.xi.xi != y.xi.xi || x.xi.clamped != y.xi.clamped || x.ci.lo != y.ci.lo ||
                x.ci.hi != y.ci.hi)
                return false;
        }
        return true;
    }
};

/// One replication of cell (b_n, r): latent path, counts, all requested
/// estimators and the path-wise truth, driven by substream(seed, b_n, a_n, index).
[[nodiscard]] inline ReplicationRecord run_replication(const ExperimentConfig& cfg, std::size_t b_n, double r,
                                                       std::size_t index) {
    const SamplingDesign design{b_n, intensity_scale(b_n, r), cfg.refinement};
    validate(design);
    Generator rng = substream(cfg.seed, b_n, design.a_n, index);
    const LatentPath path = simulate_latent(cfg.model, design, rng);
    const CountPath counts = simulate_counts(integrated_intensity(path, design), design.a_n, rng);
    const TruthRecord truth = compute_truth(path, cfg.model);

    ReplicationRecord rec;
    rec.index = index;
    rec.truth_R = truth.R;
    rec.truth_xi = truth.Xi;

    const double T = cfg.model.T;
    const Increments inc = increments(tilde_series(counts, design.a_n, design.delta(T)));
    const CovEstimate s = estimate_S(inc);
    try {
        rec.correlation = estimate_correlation(s);
    } catch (const DegenerateError&) {
        rec.degenerate = true;
        return rec;
    }
    rec.results.reserve(cfg.variants.size());
    for (Variant v : cfg.variants) {
        VariantResult res;
        res.variant = v;
        res.xi = estimate_xi(s, estimate_gamma(inc, T, v, cfg));
        res.ci = confidence_interval(rec.correlation, res.xi, b_n, T, cfg.ci_level);
        rec.results.push_back(res);
    }
    return rec;
}

[[nodiscard]] inline std::size_t worker_count(std::size_t threads, std::size_t jobs) {
    std::size_t n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    return std::max<std::size_t>(1, std::min(n, jobs));
}

/// All N replications of one cell, indexed by replication. Records depend
/// only on (seed, b_n, r, index), never on the worker count.
[[nodiscard]] inline std::vector<ReplicationRecord> run_cell(const ExperimentConfig& cfg, std::size_t b_n, double r,
                                                             std::size_t threads = 1) {
    std::vector<ReplicationRecord> records(cfg.replications);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            try {
                records[i] = run_replication(cfg, b_n, r, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = records.size();
            }
        }
    };
    const std::size_t workers = worker_count(threads, records.size());
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

struct MseRow {
    Variant variant{};
    std::size_t b_n = 0;
    double r = 0.0;
    double mse = 0.0;
    double bn_times_mse = 0.0;
    std::size_t degenerate_count = 0;
    std::size_t clamped_count = 0;
    std::size_t n_effective = 0;
    /// Standard error of `mse` across replications.
    double mse_std_error = 0.0;
    /// MSE against the cross-replication mean of the path-wise truth.
    double mse_vs_mean_truth = 0.0;
    bool valid = false;

    [[nodiscard]] std::size_t replications() const noexcept { return n_effective + degenerate_count; }
};

/// Fold of the records of one cell for one variant, in replication order.
[[nodiscard]] inline MseRow aggregate(std::span<const ReplicationRecord> records, Variant v, std::size_t b_n,
                                      double r) {
    MseRow row;
    row.variant = v;
    row.b_n = b_n;
    row.r = r;
    std::vector<double> sq;
    std::vector<double> est;
    CompensatedSum truth_sum;
    sq.reserve(records.size());
    for (const auto& rec : records) {
        if (rec.degenerate) {
            ++row.degenerate_count;
            continue;
        }
        const auto it = std::find_if(rec.results.begin(), rec.results.end(),
                                     [v](const VariantResult& x) { return x.variant == v; });
        if (it == rec.results.end()) throw StructuralError("record lacks variant " + std::string(name(v)));
        if (it->xi.clamped) ++row.clamped_count;
        const double err = it->xi.xi - rec.truth_xi;
        sq.push_back(err * err);
        est.push_back(it->xi.xi);
        truth_sum += rec.truth_xi;
    }
    row.n_effective = sq.size();
    row.valid = row.n_effective > 0;
    if (!row.valid) return row;
    const double n = static_cast<double>(row.n_effective);
    row.mse = compensated_sum(sq) / n;
    row.bn_times_mse = static_cast<double>(b_n) * row.mse;
    if (row.n_effective > 1) {
        CompensatedSum dev;
        for (double x : sq) dev += (x - row.mse) * (x - row.mse);
        row.mse_std_error = std::sqrt(dev.value() / (n - 1.0) / n);
    }
    const double mean_truth = truth_sum.value() / n;
    CompensatedSum alt;
    for (double x : est) alt += (x - mean_truth) * (x - mean_truth);
    row.mse_vs_mean_truth = alt.value() / n;
    return row;
}

struct MseTable {
    std::vector<MseRow> rows;

    [[nodiscard]] const MseRow* find(Variant v, std::size_t b_n, double r) const noexcept {
        for (const auto& row : rows)
            if (row.variant == v && row.b_n == b_n && row.r == r) return &row;
        return nullptr;
    }
};

/// Rows ordered by r, then variant, then b_n (config order).
[[nodiscard]] inline MseTable run_mse_table(const ExperimentConfig& cfg, std::size_t threads = 1) {
    validate(cfg);
    std::vector<std::vector<MseRow>> per_cell;  // [r * |b_n| + b] -> rows in variant order
    for (double r : cfg.r_list) {
        for (std::size_t b : cfg.b_n_list) {
            const auto records = run_cell(cfg, b, r, threads);
            std::vector<MseRow> rows;
            for (Variant v : cfg.variants) rows.push_back(aggregate(records, v, b, r));
            per_cell.push_back(std::move(rows));
        }
    }
    MseTable table;
    const std::size_t nb = cfg.b_n_list.size();
    for (std::size_t ri = 0; ri < cfg.r_list.size(); ++ri)
        for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi)
            for (std::size_t bi = 0; bi < nb; ++bi) table.rows.push_back(per_cell[ri * nb + bi][vi]);
    return table;
}

/// Least-squares slope of log(mse) against log(b_n).
[[nodiscard]] inline double fit_log_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw DomainError("slope fit needs at least 3 valid points");
    double mx = 0.0, my = 0.0;
    for (const auto& [b, mse] : points) {
        if (!(b > 0.0) || !(mse > 0.0)) throw DomainError("slope fit needs positive b_n and mse");
        mx += std::log(b);
        my += std::log(mse);
    }
    const double n = static_cast<double>(points.size());
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [b, mse] : points) {
        const double dx = std::log(b) - mx;
        sxy += dx * (std::log(mse) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw DomainError("slope fit needs distinct b_n values");
    return sxy / sxx;
}

/// Slope of log(mse) vs log(b_n) for one variant at one r; invalid rows are
/// skipped.
[[nodiscard]] inline double rate_check(const MseTable& table, Variant v, double r) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : table.rows)
        if (row.variant == v && row.r == r && row.valid && row.mse > 0.0)
            pts.emplace_back(static_cast<double>(row.b_n), row.mse);
    return fit_log_slope(pts);
}

/// Runs the table restricted to `v` and fits the slope at every r of the config.
[[nodiscard]] inline std::vector<std::pair<double, double>> rate_check(ExperimentConfig cfg, Variant v,
                                                                       std::size_t threads = 1) {
    if (cfg.b_n_list.size() < 3) throw DomainError("rate check needs at least 3 b_n values");
    cfg.variants = {v};
    const MseTable table = run_mse_table(cfg, threads);
    std::vector<std::pair<double, double>> slopes;
    for (double r : cfg.r_list) slopes.emplace_back(r, rate_check(table, v, r));
    return slopes;
}

}  // namespace coxcorr
