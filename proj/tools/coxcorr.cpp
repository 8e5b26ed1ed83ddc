// Command-line front end: simulate count paths, estimate the correlation and
// its asymptotic variance from a count file, and run the Monte Carlo tables.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coxcorr/coxcorr.hpp"

namespace {

using namespace coxcorr;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        write_text_file(path, content);
    }
}

struct SimulateArgs {
    std::string config;
    std::string out;
    std::string latent_out;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
    ConfigFile cfg = load_config(a.config);
    if (a.seed) cfg.experiment.seed = *a.seed;
    const auto& model = cfg.experiment.model;
    const SamplingDesign design{cfg.simulate.b_n, cfg.simulate.resolved_a_n(), cfg.experiment.refinement};
    validate(design, "simulate.");
    Generator rng = substream(cfg.experiment.seed, design.b_n, design.a_n, cfg.simulate.replication);
    const LatentPath path = simulate_latent(model, design, rng);
    const CountPath counts = simulate_counts(integrated_intensity(path, design), design.a_n, rng);

    std::ostringstream c;
    write_counts(c, counts, model.T);
    emit(a.out.empty() ? cfg.output.counts : a.out, c.str());
    const std::string latent = a.latent_out.empty() ? cfg.output.latent : a.latent_out;
    if (!latent.empty()) {
        std::ostringstream l;
        write_latent(l, path);
        write_text_file(latent, l.str());
    }
    return 0;
}

struct EstimateArgs {
    std::string counts;
    double a_n = 1.0;
    std::vector<std::string> variants;
    std::optional<double> h;
    double level = 0.95;
    std::string format = "md";
    std::string out;
};

int cmd_estimate(const EstimateArgs& a) {
    const CountSeries series = read_counts_file(a.counts);
    std::vector<EstimatorChoice> choices;
    std::vector<std::string> names = a.variants;
    if (names.empty() && !a.h) names = {"1", "2", "w", "m", "n"};
    for (const auto& n : names) {
        const auto v = parse_variant(n);
        if (!v) throw ConfigError("--variant", "unknown variant '" + n + "' (expected 1, 2, w, m, n)");
        choices.push_back(EstimatorChoice::from_variant(*v));
    }
    if (a.h) choices.push_back({"h", EstimatorChoice::Kind::kernel, BandwidthSpec::width(*a.h)});
    const auto rep = estimate_counts(series.counts, series.T, a.a_n, choices, a.level);
    std::ostringstream s;
    if (a.format == "csv") {
        write_report_csv(s, rep);
    } else {
        write_report_markdown(s, rep);
    }
    emit(a.out, s.str());
    return 0;
}

struct TableArgs {
    std::string config;
    std::string out;
    std::string format;
    std::size_t threads = 0;
    std::optional<std::uint64_t> seed;
    bool full = false;
    bool mean_target = false;
};

ConfigFile load_experiment(const std::string& path, std::optional<std::uint64_t> seed, bool full) {
    ConfigFile cfg = load_config(path);
    if (seed) cfg.experiment.seed = *seed;
    if (full) cfg.experiment = full_profile(cfg.experiment);
    return cfg;
}

int cmd_mse_table(const TableArgs& a) {
    const ConfigFile cfg = load_experiment(a.config, a.seed, a.full);
    const MseTable table = run_mse_table(cfg.experiment, a.threads);
    const TableFormat fmt = a.format.empty() ? cfg.output.format : (a.format == "md" ? TableFormat::md : TableFormat::csv);
    std::ostringstream s;
    if (fmt == TableFormat::md) {
        write_mse_markdown(s, table);
    } else {
        write_mse_csv(s, table, a.mean_target);
    }
    emit(a.out.empty() ? cfg.output.table : a.out, s.str());
    std::size_t valid = 0;
    for (const auto& row : table.rows) {
        if (row.valid) {
            ++valid;
        } else {
            std::cerr << "warning: variant " << name(row.variant) << ", b_n=" << row.b_n
                      << ", r=" << format_double(row.r) << ": every replication was degenerate\n";
        }
    }
    return valid > 0 ? 0 : kExitFailure;
}

struct RateArgs {
    std::string config;
    std::vector<std::string> variants;
    std::size_t threads = 0;
    std::optional<std::uint64_t> seed;
    bool full = false;
};

int cmd_rate_check(const RateArgs& a) {
    const ConfigFile cfg = load_experiment(a.config, a.seed, a.full);
    std::vector<std::string> names = a.variants.empty() ? std::vector<std::string>{"1"} : a.variants;
    std::ostringstream s;
    s << "variant,r,slope\n";
    for (const auto& n : names) {
        const auto v = parse_variant(n);
        if (!v) throw ConfigError("--variant", "unknown variant '" + n + "'");
        for (const auto& [r, slope] : rate_check(cfg.experiment, *v, a.threads))
            s << n << ',' << format_double(r) << ',' << format_double(slope) << '\n';
    }
    std::cout << s.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation of latent intensities from high-frequency counts"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate one doubly stochastic Poisson count path");
    s->add_option("--config", sim.config, "JSON configuration")->required();
    s->add_option("--out", sim.out, "Count file (default: output.counts, else stdout)");
    s->add_option("--latent-out", sim.latent_out, "Fine-grid latent path file");
    s->add_option("--seed", sim.seed, "Root seed override");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "Estimate C_n, Xi and confidence intervals from a count file");
    e->add_option("--counts", est.counts, "Count file with header t,y1,y2")->required();
    e->add_option("--a-n", est.a_n, "Intensity scale a_n (C_n and Xi do not depend on it)")
        ->check(CLI::PositiveNumber);
    e->add_option("--variant", est.variants, "Estimator variant {1,2,w,m,n}; repeatable");
    e->add_option("--bandwidth", est.h, "Extra kernel estimator (label h) with explicit bandwidth h");
    e->add_option("--level", est.level, "Confidence level");
    e->add_option("--format", est.format, "Output format")->check(CLI::IsMember({"csv", "md"}));
    e->add_option("--out", est.out, "Output file (default stdout)");

    TableArgs tab;
    auto* t = app.add_subcommand("mse-table", "Run the Monte Carlo MSE grid");
    t->add_option("--config", tab.config, "JSON configuration")->required();
    t->add_option("--out", tab.out, "Output file (default: output.table, else stdout)");
    t->add_option("--format", tab.format, "Output format")->check(CLI::IsMember({"csv", "md"}));
    t->add_option("--threads", tab.threads, "Worker threads (0 = auto)");
    t->add_option("--seed", tab.seed, "Root seed override");
    t->add_flag("--full", tab.full, "Full-scale grid: all variants, b_n = 2^4..2^10, r = 2..3.5, N = 1000");
    t->add_flag("--mean-target", tab.mean_target, "Add MSE against the mean truth as an extra CSV column");

    RateArgs rate;
    auto* r = app.add_subcommand("rate-check", "Fit the log-log slope of MSE against b_n");
    r->add_option("--config", rate.config, "JSON configuration")->required();
    r->add_option("--variant", rate.variants, "Estimator variant; repeatable (default 1)");
    r->add_option("--threads", rate.threads, "Worker threads (0 = auto)");
    r->add_option("--seed", rate.seed, "Root seed override");
    r->add_flag("--full", rate.full, "Full-scale grid");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*s) return cmd_simulate(sim);
        if (*e) return cmd_estimate(est);
        if (*t) return cmd_mse_table(tab);
        if (*r) return cmd_rate_check(rate);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const DegenerateError& ex) {
        std::cerr << "degenerate data: " << ex.what() << '\n';
        return kExitDegenerate;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
