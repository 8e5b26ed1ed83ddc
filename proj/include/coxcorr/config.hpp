#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "coxcorr/errors.hpp"
#include "coxcorr/harness.hpp"
#include "coxcorr/model.hpp"

namespace coxcorr {

/// The single path written by `simulate`: grid size, intensity scale (either
/// a_n directly or r with a_n = b_n^r) and which replication substream to use.
struct SimulateSpec {
    std::size_t b_n = 16;
    std::optional<double> a_n;
    std::optional<double> r;
    std::size_t replication = 0;

    [[nodiscard]] double resolved_a_n() const {
        if (a_n) return *a_n;
        return intensity_scale(b_n, r.value_or(3.5));
    }

    friend bool operator==(const SimulateSpec&, const SimulateSpec&) = default;
};

enum class TableFormat { csv, md };

struct OutputSpec {
    std::string counts;
    std::string latent;
    std::string table;
    TableFormat format = TableFormat::csv;

    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ConfigFile {
    ExperimentConfig experiment;
    SimulateSpec simulate;
    OutputSpec output;

    friend bool operator==(const ConfigFile&, const ConfigFile&) = default;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix.substr(0, prefix.size() - 1), "must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, _] : obj.items())
        if (!keys.count(k)) throw ConfigError(prefix + k, "unknown key");
}

inline double get_real(const json& obj, const std::string& prefix, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(prefix + key, "must be a number");
    return v.get<double>();
}

inline std::uint64_t get_unsigned(const json& obj, const std::string& prefix, const char* key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned())
        throw ConfigError(prefix + key, "must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

inline std::string get_string(const json& obj, const std::string& prefix, const char* key, std::string fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(prefix + key, "must be a string");
    return v.get<std::string>();
}

inline ModelParams parse_model(const json& j) {
    const std::string pre = "model.";
    reject_unknown(j, pre, {"mu1", "mu2", "sigma1", "sigma2", "rho", "x1_0", "x2_0", "T"});
    ModelParams d;
    ModelParams m;
    m.mu1 = get_real(j, pre, "mu1", d.mu1);
    m.mu2 = get_real(j, pre, "mu2", d.mu2);
    m.sigma1 = get_real(j, pre, "sigma1", d.sigma1);
    m.sigma2 = get_real(j, pre, "sigma2", d.sigma2);
    m.rho = get_real(j, pre, "rho", d.rho);
    m.x1_0 = get_real(j, pre, "x1_0", d.x1_0);
    m.x2_0 = get_real(j, pre, "x2_0", d.x2_0);
    m.T = get_real(j, pre, "T", d.T);
    validate(m, pre);
    return m;
}

inline void parse_experiment(const json& j, ExperimentConfig& c) {
    const std::string pre = "experiment.";
    reject_unknown(j, pre, {"b_n", "r", "variants", "replications", "seed", "refinement", "ci_level", "kernel_exponents"});
    if (j.contains("b_n")) {
        const auto& a = j.at("b_n");
        if (!a.is_array()) throw ConfigError(pre + "b_n", "must be an array of integers");
        c.b_n_list.clear();
        for (const auto& v : a) {
            if (!v.is_number_unsigned()) throw ConfigError(pre + "b_n", "entries must be positive integers");
            c.b_n_list.push_back(v.get<std::size_t>());
        }
    }
    if (j.contains("r")) {
        const auto& a = j.at("r");
        if (!a.is_array()) throw ConfigError(pre + "r", "must be an array of numbers");
        c.r_list.clear();
        for (const auto& v : a) {
            if (!v.is_number()) throw ConfigError(pre + "r", "entries must be numbers");
            c.r_list.push_back(v.get<double>());
        }
    }
    if (j.contains("variants")) {
        const auto& a = j.at("variants");
        if (!a.is_array()) throw ConfigError(pre + "variants", "must be an array of strings");
        c.variants.clear();
        for (const auto& v : a) {
            const auto parsed = v.is_string() ? parse_variant(v.get<std::string>()) : std::nullopt;
            if (!parsed) throw ConfigError(pre + "variants", "entries must be one of 1, 2, w, m, n");
            c.variants.push_back(*parsed);
        }
    }
    c.replications = get_unsigned(j, pre, "replications", c.replications);
    c.seed = get_unsigned(j, pre, "seed", c.seed);
    c.refinement = get_unsigned(j, pre, "refinement", c.refinement);
    c.ci_level = get_real(j, pre, "ci_level", c.ci_level);
    if (j.contains("kernel_exponents")) {
        const auto& k = j.at("kernel_exponents");
        const std::string kp = pre + "kernel_exponents.";
        reject_unknown(k, kp, {"w", "m", "n"});
        c.kernel_exponents[0] = get_real(k, kp, "w", c.kernel_exponents[0]);
        c.kernel_exponents[1] = get_real(k, kp, "m", c.kernel_exponents[1]);
        c.kernel_exponents[2] = get_real(k, kp, "n", c.kernel_exponents[2]);
    }
}

inline SimulateSpec parse_simulate(const json& j) {
    const std::string pre = "simulate.";
    reject_unknown(j, pre, {"b_n", "a_n", "r", "replication"});
    SimulateSpec s;
    s.b_n = get_unsigned(j, pre, "b_n", s.b_n);
    if (j.contains("a_n")) s.a_n = get_real(j, pre, "a_n", 0.0);
    if (j.contains("r")) s.r = get_real(j, pre, "r", 0.0);
    s.replication = get_unsigned(j, pre, "replication", s.replication);
    if (s.b_n < 4) throw ConfigError(pre + "b_n", "must be >= 4");
    if (s.a_n && s.r) throw ConfigError(pre + "a_n", "give either a_n or r, not both");
    if (s.a_n && (!(*s.a_n > 0.0) || !std::isfinite(*s.a_n))) throw ConfigError(pre + "a_n", "must be finite and > 0");
    if (s.r && (!(*s.r > 0.0) || !std::isfinite(*s.r))) throw ConfigError(pre + "r", "must be finite and > 0");
    return s;
}

inline OutputSpec parse_output(const json& j) {
    const std::string pre = "output.";
    reject_unknown(j, pre, {"counts", "latent", "table", "format"});
    OutputSpec o;
    o.counts = get_string(j, pre, "counts", o.counts);
    o.latent = get_string(j, pre, "latent", o.latent);
    o.table = get_string(j, pre, "table", o.table);
    const std::string fmt = get_string(j, pre, "format", "csv");
    if (fmt == "csv") {
        o.format = TableFormat::csv;
    } else if (fmt == "md") {
        o.format = TableFormat::md;
    } else {
        throw ConfigError(pre + "format", "must be csv or md");
    }
    return o;
}

}  // namespace detail

/// Parses and validates a configuration document. Missing keys take the
/// defaults of the corresponding structs; unknown keys are rejected.
[[nodiscard]] inline ConfigFile parse_config(const nlohmann::json& j) {
    detail::reject_unknown(j, "", {"model", "experiment", "simulate", "output"});
    ConfigFile c;
    if (j.contains("model")) c.experiment.model = detail::parse_model(j.at("model"));
    if (j.contains("experiment")) detail::parse_experiment(j.at("experiment"), c.experiment);
    if (j.contains("simulate")) c.simulate = detail::parse_simulate(j.at("simulate"));
    if (j.contains("output")) c.output = detail::parse_output(j.at("output"));
    validate(c.experiment.model, "model.");
    // ConfigError subset of the experiment checks; the degenerate-model check
    // is left to the commands that need the target.
    ExperimentConfig probe = c.experiment;
    if (probe.model.sigma1 == 0.0) probe.model.sigma1 = 1.0;
    if (probe.model.sigma2 == 0.0) probe.model.sigma2 = 1.0;
    validate(probe);
    return c;
}

[[nodiscard]] inline ConfigFile parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

[[nodiscard]] inline ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

[[nodiscard]] inline nlohmann::json to_json(const ConfigFile& c) {
    using nlohmann::json;
    const auto& e = c.experiment;
    const auto& m = e.model;
    json variants = json::array();
    for (Variant v : e.variants) variants.push_back(std::string(name(v)));
    json sim = {{"b_n", c.simulate.b_n}, {"replication", c.simulate.replication}};
    if (c.simulate.a_n) sim["a_n"] = *c.simulate.a_n;
    if (c.simulate.r) sim["r"] = *c.simulate.r;
    return {
        {"model",
         {{"mu1", m.mu1}, {"mu2", m.mu2}, {"sigma1", m.sigma1}, {"sigma2", m.sigma2}, {"rho", m.rho},
          {"x1_0", m.x1_0}, {"x2_0", m.x2_0}, {"T", m.T}}},
        {"experiment",
         {{"b_n", e.b_n_list},
          {"r", e.r_list},
          {"variants", variants},
          {"replications", e.replications},
          {"seed", e.seed},
          {"refinement", e.refinement},
          {"ci_level", e.ci_level},
          {"kernel_exponents",
           {{"w", e.kernel_exponents[0]}, {"m", e.kernel_exponents[1]}, {"n", e.kernel_exponents[2]}}}}},
        {"simulate", sim},
        {"output",
         {{"counts", c.output.counts},
          {"latent", c.output.latent},
          {"table", c.output.table},
          {"format", c.output.format == TableFormat::md ? "md" : "csv"}}},
    };
}

[[nodiscard]] inline std::string serialize(const ConfigFile& c) { return to_json(c).dump(2) + "\n"; }

/// Full-scale experiment: all variants, b_n = 2^4..2^10, r in {2, 2.5, 3, 3.5}, N = 1000.
[[nodiscard]] inline ExperimentConfig full_profile(ExperimentConfig base) {
    base.b_n_list = {16, 32, 64, 128, 256, 512, 1024};
    base.r_list = {2.0, 2.5, 3.0, 3.5};
    base.variants.assign(kAllVariants.begin(), kAllVariants.end());
    base.replications = 1000;
    return base;
}

}  // namespace coxcorr
