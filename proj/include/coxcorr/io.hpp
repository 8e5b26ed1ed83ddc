#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "coxcorr/errors.hpp"
#include "coxcorr/format.hpp"
#include "coxcorr/harness.hpp"
#include "coxcorr/model.hpp"

namespace coxcorr {

/// A parsed `t,y1,y2` file: cumulative counts on an equidistant grid.
struct CountSeries {
    CountPath counts;
    double t0 = 0.0;
    double T = 0.0;  // t_last - t0

    [[nodiscard]] double delta() const noexcept { return T / static_cast<double>(counts.b_n()); }
};

/// Relative tolerance on the spacing of observation times.
inline constexpr double kEquidistanceTolerance = 1e-9;

inline void write_counts(std::ostream& out, const CountPath& counts, double T) {
    const std::size_t b = counts.b_n();
    out << "t,y1,y2\n";
    for (std::size_t j = 0; j <= b; ++j) {
        const double t = T * static_cast<double>(j) / static_cast<double>(b);
        out << format_double(t) << ',' << counts.y1[j] << ',' << counts.y2[j] << '\n';
    }
}

inline void write_latent(std::ostream& out, const LatentPath& path) {
    out << "s,x1,x2\n";
    for (std::size_t i = 0; i < path.size(); ++i)
        out << format_double(path.time(i)) << ',' << format_double(path.x1[i]) << ',' << format_double(path.x2[i])
            << '\n';
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

}  // namespace detail

[[nodiscard]] inline CountSeries read_counts(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next_line() || line != "t,y1,y2") throw ParseError("count file must start with header t,y1,y2");
    std::vector<double> times;
    CountSeries s;
    while (next_line()) {
        const auto f = detail::split_commas(line);
        const std::string where = "line " + std::to_string(lineno);
        if (f.size() != 3) throw ParseError(where + ": expected 3 fields");
        const auto t = parse_double(f[0]);
        const auto y1 = parse_int64(f[1]);
        const auto y2 = parse_int64(f[2]);
        if (!t || !std::isfinite(*t)) throw ParseError(where + ": bad time value");
        if (!y1 || !y2) throw ParseError(where + ": counts must be integers");
        if (!times.empty() && !(*t > times.back())) throw ParseError(where + ": times must be strictly increasing");
        times.push_back(*t);
        s.counts.y1.push_back(*y1);
        s.counts.y2.push_back(*y2);
    }
    if (times.size() < 3) throw ParseError("count file needs at least 3 observation rows");
    s.t0 = times.front();
    s.T = times.back() - times.front();
    const double delta = s.T / static_cast<double>(times.size() - 1);
    for (std::size_t j = 1; j < times.size(); ++j) {
        const double expected = s.t0 + delta * static_cast<double>(j);
        if (std::abs(times[j] - expected) > kEquidistanceTolerance * s.T)
            throw ParseError("observation times are not equidistant (row " + std::to_string(j) + ")");
    }
    try {
        validate(s.counts);
    } catch (const StructuralError& e) {
        throw ParseError(e.what());
    }
    return s;
}

[[nodiscard]] inline CountSeries read_counts_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open count file " + path);
    return read_counts(in);
}

inline void write_mse_csv(std::ostream& out, const MseTable& table, bool mean_target_column = false) {
    out << "variant,b_n,r,mse,bn_times_mse,degenerate_count,clamped_count,N";
    if (mean_target_column) out << ",mse_vs_mean_truth";
    out << '\n';
    for (const auto& row : table.rows) {
        out << name(row.variant) << ',' << row.b_n << ',' << format_double(row.r) << ',';
        if (row.valid) {
            out << format_double(row.mse) << ',' << format_double(row.bn_times_mse);
        } else {
            out << "invalid,invalid";
        }
        out << ',' << row.degenerate_count << ',' << row.clamped_count << ',' << row.n_effective;
        if (mean_target_column) out << ',' << (row.valid ? format_double(row.mse_vs_mean_truth) : "invalid");
        out << '\n';
    }
}

namespace detail {

inline std::string bn_header(std::size_t b) {
    std::size_t e = 0;
    while ((std::size_t{1} << e) < b) ++e;
    if ((std::size_t{1} << e) == b) return "$b_n = 2^{" + std::to_string(e) + "}$";
    return "$b_n = " + std::to_string(b) + "$";
}

}  // namespace detail

/// Layout: one MSE table and one b_n x MSE table per r, variants
/// as rows and ascending b_n as columns.
inline void write_mse_markdown(std::ostream& out, const MseTable& table) {
    std::vector<double> rs;
    std::vector<std::size_t> bs;
    std::vector<Variant> vs;
    for (const auto& row : table.rows) {
        if (std::find(rs.begin(), rs.end(), row.r) == rs.end()) rs.push_back(row.r);
        if (std::find(bs.begin(), bs.end(), row.b_n) == bs.end()) bs.push_back(row.b_n);
        if (std::find(vs.begin(), vs.end(), row.variant) == vs.end()) vs.push_back(row.variant);
    }
    std::sort(bs.begin(), bs.end());
    bool first = true;
    for (double r : rs) {
        for (int scaled = 0; scaled < 2; ++scaled) {
            if (!first) out << '\n';
            first = false;
            out << "### " << (scaled ? "$b_n$ x MSE" : "MSE") << " of asymptotic variance estimators; $a_n = b_n^{"
                << format_double(r) << "}$\n\n";
            out << "| $*$ |";
            for (std::size_t b : bs) out << ' ' << detail::bn_header(b) << " |";
            out << "\n|---|";
            for (std::size_t i = 0; i < bs.size(); ++i) out << "---:|";
            out << '\n';
            for (Variant v : vs) {
                out << "| " << name(v) << " |";
                for (std::size_t b : bs) {
                    const MseRow* row = table.find(v, b, r);
                    if (!row) {
                        out << " |";
                    } else if (!row->valid) {
                        out << " invalid |";
                    } else {
                        out << ' ' << format_fixed(scaled ? row->bn_times_mse : row->mse, 4) << " |";
                    }
                }
                out << '\n';
            }
        }
    }
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open output file " + path);
    out << content;
    if (!out) throw ParseError("failed writing " + path);
}

}  // namespace coxcorr
