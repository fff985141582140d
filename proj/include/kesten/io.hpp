// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Strict CSV input and output. Every file starts with a header that must match
// the expected column names exactly; a malformed row is an error, never skipped.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "kesten/empirics.hpp"
#include "kesten/errors.hpp"
#include "kesten/process.hpp"
#include "kesten/tailstats.hpp"

namespace kesten::io {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> lines;  // source line of each row
    std::string source;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Parse CSV text whose header must be exactly `expected`.
inline CsvTable read_csv(std::istream& in, const std::string& source, const std::vector<std::string>& expected) {
    CsvTable table;
    table.source = source;
    table.columns = expected;
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(source, 1, "missing header; expected '" + expected.front() + "'");
    }
    const auto header = detail::split(line);
    for (std::size_t c = 0; c < expected.size(); ++c) {
        if (c >= header.size() || header[c] != expected[c]) {
            throw ParseError(source, 1, "missing column '" + expected[c] + "' in header");
        }
    }
    if (header.size() != expected.size()) {
        throw ParseError(source, 1, "unexpected extra column '" + std::string(header[expected.size()]) + "'");
    }
    std::size_t line_no = 1;
    std::size_t blank_at = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            blank_at = blank_at ? blank_at : line_no;
            continue;
        }
        if (blank_at) {
            throw ParseError(source, blank_at, "blank line inside data");
        }
        const auto fields = detail::split(line);
        if (fields.size() != expected.size()) {
            throw ParseError(source, line_no,
                             "expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto f = fields[c];
            const auto res = std::from_chars(f.data(), f.data() + f.size(), row[c]);
            if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(row[c])) {
                throw ParseError(source, line_no, "column '" + expected[c] + "': not a finite number: '" + std::string(f) + "'");
            }
        }
        table.rows.push_back(std::move(row));
        table.lines.push_back(line_no);
    }
    return table;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open file");
    }
    return in;
}

inline CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected) {
    auto in = open_input(path);
    return read_csv(in, path.string(), expected);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot write " + path.string());
    }
    out << text;
}

// ---------------------------------------------------------------------------
// Tails
// ---------------------------------------------------------------------------

inline void write_tail_csv(std::ostream& os, const EmpiricalTail& tail) {
    os << "wealth,exceedance\n";
    for (const auto& p : tail.points) {
        os << format_double(p.wealth) << ',' << format_double(p.exceedance) << '\n';
    }
}

inline std::string tail_csv(const EmpiricalTail& tail) {
    std::ostringstream os;
    write_tail_csv(os, tail);
    return os.str();
}

inline EmpiricalTail read_tail_csv(std::istream& in, const std::string& source) {
    const auto table = read_csv(in, source, {"wealth", "exceedance"});
    EmpiricalTail tail;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        tail.points.push_back({table.rows[i][0], table.rows[i][1]});
        EmpiricalTail last_two;
        last_two.points.assign(tail.points.end() - std::min<std::ptrdiff_t>(2, std::ssize(tail.points)), tail.points.end());
        try {
            last_two.validate();
        } catch (const InputError& e) {
            throw ParseError(source, table.lines[i], e.what());
        }
    }
    return tail;
}

inline EmpiricalTail read_tail_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_tail_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// Survey inputs
// ---------------------------------------------------------------------------

/// Lorenz CSV plus a metadata JSON {"year", "households", "total_wealth_gbp"}.
inline LorenzSurvey read_survey(const std::filesystem::path& csv, const std::filesystem::path& meta) {
    const auto table = read_csv(csv, {"cum_household_prop", "cum_wealth_prop"});
    LorenzSurvey survey;
    for (const auto& row : table.rows) {
        survey.rows.push_back({row[0], row[1]});
    }
    auto in = open_input(meta);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(meta.string(), 0, e.what());
    }
    for (const char* key : {"year", "households", "total_wealth_gbp"}) {
        if (!j.contains(key) || !j[key].is_number()) {
            throw ParseError(meta.string(), 0, std::string("missing numeric field '") + key + "'");
        }
    }
    survey.year = j["year"].get<int>();
    survey.households_total = j["households"].get<double>();
    survey.total_wealth = j["total_wealth_gbp"].get<double>();
    survey.validate();
    return survey;
}

inline RichList read_rich_list(const std::filesystem::path& csv, double households_total, int year = 0) {
    const auto table = read_csv(csv, {"rank", "wealth_gbp"});
    RichList rich;
    rich.year = year;
    rich.households_total = households_total;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (!(table.rows[i][1] > 0.0)) {
            throw ParseError(csv.string(), table.lines[i], "rich list wealth must be positive");
        }
        rich.wealth.push_back(table.rows[i][1]);
    }
    if (rich.wealth.empty()) {
        throw ParseError(csv.string(), 0, "rich list has no rows");
    }
    return rich;
}

inline std::vector<DecileRow> read_deciles(const std::filesystem::path& csv) {
    const auto table = read_csv(csv, {"median_wealth_gbp", "disposable_income_gbp", "expenditure_gbp"});
    std::vector<DecileRow> rows;
    for (const auto& r : table.rows) {
        rows.push_back({r[0], r[1], r[2]});
    }
    return rows;
}

inline std::vector<WealthPair> read_wealth_pairs(const std::filesystem::path& csv) {
    const auto table = read_csv(csv, {"wealth_gbp", "next_wealth_gbp"});
    std::vector<WealthPair> pairs;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (!(table.rows[i][0] > 0.0)) {
            throw ParseError(csv.string(), table.lines[i], "wealth must be positive");
        }
        pairs.push_back({table.rows[i][0], table.rows[i][1], 0.0});
    }
    return pairs;
}

/// Single-column file of values under `column`.
inline std::vector<double> read_values(const std::filesystem::path& csv, const std::string& column) {
    const auto table = read_csv(csv, {column});
    std::vector<double> v;
    v.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        v.push_back(r[0]);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct CheckpointMeta {
    std::uint32_t step = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::uint64_t bankruptcies = 0;
    std::size_t n_agents = 0;
};

/// `<stem>.csv` with one wealth value per line and a `<stem>.json` sidecar.
inline void write_checkpoint(const std::filesystem::path& stem, const Population& pop, std::uint64_t seed,
                             const std::string& config_hash) {
    std::string text = "wealth\n";
    for (double w : pop.wealth) {
        text += format_double(w);
        text += '\n';
    }
    write_text(std::filesystem::path(stem).concat(".csv"), text);
    nlohmann::ordered_json j;
    j["step"] = pop.step;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    j["bankruptcies"] = pop.total_bankruptcies();
    j["n_agents"] = pop.size();
    write_text(std::filesystem::path(stem).concat(".json"), j.dump(2) + "\n");
}

inline std::pair<std::vector<double>, CheckpointMeta> read_checkpoint(const std::filesystem::path& stem) {
    const auto wealth = read_values(std::filesystem::path(stem).concat(".csv"), "wealth");
    const auto meta_path = std::filesystem::path(stem).concat(".json");
    auto in = open_input(meta_path);
    CheckpointMeta meta;
    try {
        const auto j = nlohmann::json::parse(in);
        meta.step = j.at("step").get<std::uint32_t>();
        meta.seed = j.at("seed").get<std::uint64_t>();
        meta.config_hash = j.at("config_hash").get<std::string>();
        meta.bankruptcies = j.at("bankruptcies").get<std::uint64_t>();
        meta.n_agents = j.at("n_agents").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(meta_path.string(), 0, e.what());
    }
    if (meta.n_agents != wealth.size()) {
        throw ParseError(meta_path.string(), 0, "agent count does not match the wealth file");
    }
    return {wealth, meta};
}

}  // namespace kesten::io
