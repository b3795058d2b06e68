#pragma once

// Command-line front end: configuration (JSON file plus flag overrides),
// suite dispatch and CSV / JSON report emission.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "primeavg/arith.hpp"
#include "primeavg/expsums.hpp"
#include "primeavg/fit.hpp"
#include "primeavg/fixtures.hpp"
#include "primeavg/highlow.hpp"
#include "primeavg/inequality.hpp"
#include "primeavg/multiplier.hpp"
#include "primeavg/parallel.hpp"
#include "primeavg/verify.hpp"

#ifndef PRIMEAVG_DEFAULT_FIXTURES
#define PRIMEAVG_DEFAULT_FIXTURES "fixtures/fixtures.json"
#endif

namespace primeavg::cli {

using nlohmann::json;

enum ExitCode : int { kPass = 0, kFail = 1, kConfigError = 2 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- CSV

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row {
    public:
        Row& operator<<(const std::string& s) { return push(s); }
        Row& operator<<(const char* s) { return push(s); }
        Row& operator<<(double v) { return push(format_real(v)); }
        Row& operator<<(i64 v) { return push(std::to_string(v)); }
        Row& operator<<(int v) { return push(std::to_string(v)); }
        Row& operator<<(std::size_t v) { return push(std::to_string(v)); }

    private:
        friend class CsvTable;
        explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
        Row& push(std::string s) {
            cells_.push_back(std::move(s));
            return *this;
        }
        std::vector<std::string>& cells_;
    };

    Row row() {
        rows_.emplace_back();
        return Row(rows_.back());
    }

    std::size_t size() const { return rows_.size(); }

    void write(std::ostream& os) const {
        auto line = [&](const std::vector<std::string>& cells) {
            if (cells.size() != header_.size()) throw std::logic_error("csv: row width differs from header");
            for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_field(cells[i]);
            os << "\r\n";
        };
        line(header_);
        for (const auto& r : rows_) line(r);
    }

    std::string str() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// ---------------------------------------------------------------- configuration

enum class ParamType { integer, real, integer_list, real_list, text, flag };

struct ParamSpec {
    std::string key;
    ParamType type;
    json fallback;
    std::string help;
};

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
};

inline json pow2_list(int lo, int hi) {
    json out = json::array();
    for (int e = lo; e <= hi; ++e) out.push_back(i64{1} << e);
    return out;
}

inline const std::vector<CommandSpec>& command_specs() {
    using T = ParamType;
    static const std::vector<CommandSpec> specs{
        {"verify",
         "Run the exact identity suites and compare fixtures",
         {{"qmax", T::integer, 96, "largest q for the progression sums and Upsilon"},
          {"ymax", T::integer, 36, "largest y for the progression sums and Upsilon"},
          {"sample_cap", T::integer, 100000, "tuples sampled per identity when the grid is larger"},
          {"closed_qmax", T::integer, 128, "largest q for direct vs closed Ramanujan sums"},
          {"smooth_rmax", T::integer, 200, "largest r for the divisor sum of Ramanujan sums"},
          {"cohen_qmax", T::integer, 64, "largest q for the progression Cohen identity"},
          {"cohen_ymax", T::integer, 24, "largest y for the progression Cohen identity"},
          {"height_ymax", T::integer, 60, "largest y for height-class counts"},
          {"height_rmax", T::integer, 60, "largest r for height-class counts"},
          {"tol", T::real, 1e-8, "tolerance per unit of q"},
          {"check_fixtures", T::flag, true, "re-evaluate fixtures marked for verify"},
          {"csv_rows", T::text, "summary", "summary (worst and failing rows) or all"}}},
        {"approx",
         "Residual profile of the major-arc approximation",
         {{"N", T::integer, 4096, "length of the average"},
          {"y", T::integer, 1, "spacing of the progression"},
          {"b", T::integer, 0, "residue of the progression"},
          {"qcut", T::integer, 16, "denominator (or height) ceiling"},
          {"M", T::integer, 0, "grid size; 0 selects 4N rounded to a power of two"},
          {"cutoff", T::text, "smooth", "smooth or identity"},
          {"mode", T::text, "denominator", "arc selection: denominator or height"},
          {"J", T::integer, 2, "near-zero arc exponent"},
          {"max_sup_error", T::real, 0.0, "fail when the sup residual exceeds this (0 disables)"}}},
        {"highlow",
         "High/Low decomposition: partition, kernels and ratios",
         {{"N", T::integer, 4096, "length of the average"},
          {"y", T::integer, 1, "spacing of the progression"},
          {"b", T::integer, 0, "residue of the progression"},
          {"Q", T::integer_list, json::array({2, 4, 8}), "height thresholds (powers of two)"},
          {"qcut", T::integer, 16, "height ceiling"},
          {"M", T::integer, 0, "grid size; 0 selects 4N rounded to a power of two"},
          {"r", T::real, 1.5, "exponent for the Low ratio, in (1, 2)"},
          {"cutoff", T::text, "smooth", "smooth or identity"},
          {"max_spacing", T::integer, 32, "largest spacing d of the multiples-of-d test sets"},
          {"partition_tol", T::real, 1e-10, "tolerance of the partition identity"},
          {"export_kernels", T::flag, false, "write the Low and High kernels as (Q, kind, x, value)"}}},
        {"improving",
         "Fixed-scale improving ratio scan",
         {{"N", T::integer_list, json::array({16384, 65536, 262144}), "dyadic lengths"},
          {"y", T::integer_list, json::array({1, 3, 5}), "spacings"},
          {"b", T::integer_list, json::array(), "residues; empty selects every b coprime to y"},
          {"r", T::real_list, json::array({1.5}), "exponents in (1, 2)"},
          {"densities", T::integer_list, json::array({1, 2, 3, 4}), "random set densities 2^-j"},
          {"greedy", T::flag, false, "add the greedy weighted set"},
          {"floor_factor", T::integer, 1024, "require N >= floor_factor * y"},
          {"stability", T::real, 2.0, "allowed change of the max ratio between scales"}}},
        {"maximal",
         "Dyadic maximal weak-type scan",
         {{"N", T::integer_list, pow2_list(10, 16), "dyadic lengths"},
          {"y", T::integer_list, json::array({1, 5}), "spacings"},
          {"b", T::integer_list, json::array(), "residues; empty selects every b coprime to y"},
          {"r", T::real, 2.0, "exponent"},
          {"lambdas", T::real_list, json::array({0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625}), "heights"},
          {"densities", T::integer_list, json::array({3}), "random set densities 2^-j"},
          {"weak_bound", T::real, 0.0, "fail when a weak-type ratio exceeds this (0 disables)"},
          {"b_variation", T::real, 1.5, "fail when max/min over b reaches this (0 disables)"}}},
        {"ramanujan-avg",
         "Moments of sums of |tau_q(n)| along a progression",
         {{"Q", T::integer_list, json::array({4, 8, 16, 32}), "cutoffs for q"},
          {"y", T::integer, 5, "spacing of the progression"},
          {"b", T::integer, 2, "residue of the progression"},
          {"t", T::integer, 2, "moment"},
          {"length_factor", T::integer, 16, "M = length_factor * y * Q^t"},
          {"M", T::integer, 0, "fixed M for every Q (0 uses length_factor)"},
          {"exponent", T::real, 1.25, "reference exponent of the ratio column"},
          {"max_exponent", T::real, 0.0, "fail when the fitted exponent exceeds this (0 disables)"}}},
        {"sw",
         "Chebyshev function in a progression against x / phi(y)",
         {{"x", T::integer_list, json::array({1000, 10000, 100000, 1000000}), "evaluation points"},
          {"y", T::integer, 1, "spacing of the progression"},
          {"b", T::integer, 0, "residue of the progression"},
          {"J", T::integer, 2, "range exponent: y <= (log x)^J"}}},
    };
    return specs;
}

inline const CommandSpec& command_spec(const std::string& name) {
    for (const auto& s : command_specs())
        if (s.name == name) return s;
    throw ConfigError("unknown command '" + name + "'");
}

inline const std::vector<std::string>& top_level_keys() {
    static const std::vector<std::string> keys{"command", "seed", "workers", "out", "fixtures", "parameters"};
    return keys;
}

struct RunConfig {
    std::string command;
    json parameters = json::object();
    std::uint64_t seed = 0x5eed;
    unsigned workers = 1;
    std::string out;  // output directory; empty writes CSV to stdout
    std::string fixtures = PRIMEAVG_DEFAULT_FIXTURES;
    i64 memory_cap = kDefaultMemoryCap;
    std::optional<i64> table_bound;  // environment override

    i64 integer(const std::string& key) const { return parameters.at(key).get<i64>(); }
    double real(const std::string& key) const { return parameters.at(key).get<double>(); }
    bool flag(const std::string& key) const { return parameters.at(key).get<bool>(); }
    std::string text(const std::string& key) const { return parameters.at(key).get<std::string>(); }
    std::vector<i64> integers(const std::string& key) const { return parameters.at(key).get<std::vector<i64>>(); }
    std::vector<double> reals(const std::string& key) const {
        return parameters.at(key).get<std::vector<double>>();
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

inline i64 parse_integer(const std::string& key, const std::string& s) {
    try {
        std::size_t used = 0;
        const i64 v = std::stoll(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("parameter '" + key + "': expected an integer, got '" + s + "'");
    }
}

inline double parse_real(const std::string& key, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("parameter '" + key + "': expected a number, got '" + s + "'");
    }
}

inline bool parse_flag(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("parameter '" + key + "': expected true or false, got '" + s + "'");
}

// Flag text to the JSON value of the parameter type.
inline json from_text(const ParamSpec& spec, const std::string& s) {
    switch (spec.type) {
        case ParamType::integer: return parse_integer(spec.key, s);
        case ParamType::real: return parse_real(spec.key, s);
        case ParamType::text: return s;
        case ParamType::flag: return parse_flag(spec.key, s);
        case ParamType::integer_list: {
            json out = json::array();
            for (const auto& item : split_list(s)) out.push_back(parse_integer(spec.key, item));
            return out;
        }
        case ParamType::real_list: {
            json out = json::array();
            for (const auto& item : split_list(s)) out.push_back(parse_real(spec.key, item));
            return out;
        }
    }
    throw std::logic_error("unhandled parameter type");
}

// Checks a JSON value from a config file against the parameter type.
inline json checked(const ParamSpec& spec, const json& v) {
    auto fail = [&](const char* want) {
        throw ConfigError("parameter '" + spec.key + "': expected " + want + ", got " + v.dump());
    };
    switch (spec.type) {
        case ParamType::integer:
            if (!v.is_number_integer()) fail("an integer");
            return v;
        case ParamType::real:
            if (!v.is_number()) fail("a number");
            return v.get<double>();
        case ParamType::text:
            if (!v.is_string()) fail("a string");
            return v;
        case ParamType::flag:
            if (!v.is_boolean()) fail("true or false");
            return v;
        case ParamType::integer_list:
            if (v.is_number_integer()) return json::array({v});
            if (!v.is_array()) fail("a list of integers");
            for (const auto& e : v)
                if (!e.is_number_integer()) fail("a list of integers");
            return v;
        case ParamType::real_list: {
            if (v.is_number()) return json::array({v.get<double>()});
            if (!v.is_array()) fail("a list of numbers");
            json out = json::array();
            for (const auto& e : v) {
                if (!e.is_number()) fail("a list of numbers");
                out.push_back(e.get<double>());
            }
            return out;
        }
    }
    throw std::logic_error("unhandled parameter type");
}

inline std::optional<i64> env_integer(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    const i64 parsed = parse_integer(name, v);
    if (parsed < 1) throw ConfigError(std::string("environment ") + name + " must be positive");
    return parsed;
}

}  // namespace detail

// Resolution order: defaults, then the config file, then flags.
inline RunConfig resolve_config(const std::string& command, const json* file,
                                const std::map<std::string, std::string>& flags,
                                const std::map<std::string, std::string>& globals) {
    const auto& spec = command_spec(command);
    RunConfig cfg;
    cfg.command = command;
    cfg.workers = default_workers();
    for (const auto& p : spec.params) cfg.parameters[p.key] = p.fallback;

    auto find_spec = [&](const std::string& key) -> const ParamSpec& {
        for (const auto& p : spec.params)
            if (p.key == key) return p;
        throw ConfigError("unknown key 'parameters." + key + "' for command " + command);
    };

    if (file != nullptr) {
        if (!file->is_object()) throw ConfigError("config file must hold a JSON object");
        for (const auto& [key, value] : file->items()) {
            if (std::find(top_level_keys().begin(), top_level_keys().end(), key) == top_level_keys().end())
                throw ConfigError("unknown key '" + key + "' in config file");
        }
        if (file->contains("command") && file->at("command") != command)
            throw ConfigError("key 'command': config file is for '" + file->at("command").dump() +
                              "', not '" + command + "'");
        if (file->contains("seed")) {
            const auto& v = file->at("seed");
            if (!v.is_number_integer() || (v.is_number_unsigned() ? false : v.get<i64>() < 0))
                throw ConfigError("key 'seed': expected a non-negative integer");
            cfg.seed = file->at("seed").get<std::uint64_t>();
        }
        if (file->contains("workers")) {
            const auto& v = file->at("workers");
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<i64>() < 1))
                throw ConfigError("key 'workers': expected a positive integer");
            cfg.workers = file->at("workers").get<unsigned>();
        }
        if (file->contains("out")) {
            if (!file->at("out").is_string()) throw ConfigError("key 'out': expected a string");
            cfg.out = file->at("out").get<std::string>();
        }
        if (file->contains("fixtures")) {
            if (!file->at("fixtures").is_string()) throw ConfigError("key 'fixtures': expected a string");
            cfg.fixtures = file->at("fixtures").get<std::string>();
        }
        if (file->contains("parameters")) {
            const auto& params = file->at("parameters");
            if (!params.is_object()) throw ConfigError("key 'parameters': expected an object");
            for (const auto& [key, value] : params.items()) cfg.parameters[key] = detail::checked(find_spec(key), value);
        }
    }

    for (const auto& [key, text] : flags) cfg.parameters[key] = detail::from_text(find_spec(key), text);

    if (auto it = globals.find("seed"); it != globals.end()) {
        const i64 s = detail::parse_integer("seed", it->second);
        if (s < 0) throw ConfigError("key 'seed': expected a non-negative integer");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (auto it = globals.find("workers"); it != globals.end()) {
        const i64 w = detail::parse_integer("workers", it->second);
        if (w < 1) throw ConfigError("key 'workers': expected a positive integer");
        cfg.workers = static_cast<unsigned>(w);
    }
    if (auto it = globals.find("out"); it != globals.end()) cfg.out = it->second;
    if (auto it = globals.find("fixtures"); it != globals.end()) cfg.fixtures = it->second;
    if (cfg.workers < 1) throw ConfigError("key 'workers': expected a positive integer");

    if (auto cap = detail::env_integer("PRIMEAVG_MEMORY_CAP")) cfg.memory_cap = *cap;
    cfg.table_bound = detail::env_integer("PRIMEAVG_TABLE_BOUND");
    return cfg;
}

// ---------------------------------------------------------------- suites

struct Outcome {
    bool pass = true;
    json summary = json::object();
    std::optional<CsvTable> csv;
    std::vector<std::pair<std::string, CsvTable>> extra;  // (file stem, table)
};

namespace detail {

inline ArithTables tables_for(const RunConfig& cfg, i64 needed) {
    i64 bound = needed;
    if (cfg.table_bound) {
        if (*cfg.table_bound < needed)
            throw ConfigError("PRIMEAVG_TABLE_BOUND=" + std::to_string(*cfg.table_bound) + " is below the " +
                              std::to_string(needed) + " this run needs");
        bound = *cfg.table_bound;
    }
    return ArithTables::build(bound, cfg.memory_cap);
}

inline Progression progression_of(const RunConfig& cfg) {
    try {
        return Progression::make(cfg.integer("y"), cfg.integer("b"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("parameters 'y'/'b': ") + e.what());
    }
}

inline i64 grid_size(const RunConfig& cfg, i64 N) {
    const i64 M = cfg.integer("M");
    return M == 0 ? next_power_of_two(4 * N) : M;
}

inline CutoffSpec cutoff_of(const RunConfig& cfg) {
    try {
        return CutoffSpec::by_name(cfg.text("cutoff"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("parameter 'cutoff': ") + e.what());
    }
}

inline json summary_json(const IdentitySummary& s) {
    return {{"checked", s.checked},
            {"failures", s.failures},
            {"max_abs_err", s.max_abs_err},
            {"worst", {{"q", s.worst.q}, {"y", s.worst.y}, {"b", s.worst.b}, {"a_or_x", s.worst.a_or_x}}}};
}

inline void identity_row(CsvTable& t, const IdentityRow& r) {
    t.row() << r.identity << r.q << r.y << r.b << r.a_or_x << r.lhs.real() << r.lhs.imag() << r.rhs.real()
            << r.rhs.imag() << r.abs_err();
}

}  // namespace detail

inline Outcome run_verify(const RunConfig& cfg) {
    Outcome out;
    CsvTable csv({"identity_name", "q", "y", "b", "a_or_x", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err"});
    const std::string rows_mode = cfg.text("csv_rows");
    if (rows_mode != "summary" && rows_mode != "all")
        throw ConfigError("parameter 'csv_rows': expected summary or all, got '" + rows_mode + "'");
    const bool all_rows = rows_mode == "all";
    const double tol = cfg.real("tol");

    std::vector<IdentityRow> failing;
    RowSink sink = [&](const IdentityRow& r) {
        if (all_rows)
            detail::identity_row(csv, r);
        else if (!r.ok())
            failing.push_back(r);
    };

    SampledGrid grid{cfg.integer("qmax"), cfg.integer("ymax"), static_cast<std::size_t>(cfg.integer("sample_cap")),
                     cfg.seed, tol};
    std::vector<std::pair<IdentitySummary, bool>> suites;  // (summary, gates the exit code)
    suites.emplace_back(check_ramanujan_closed(cfg.integer("closed_qmax"), tol, sink), true);
    suites.emplace_back(check_divisor_tau(cfg.integer("smooth_rmax"), sink), true);
    suites.emplace_back(check_progression_ramanujan(grid, sink), true);
    suites.emplace_back(check_upsilon(grid, sink), true);
    suites.emplace_back(check_cohen(cfg.integer("cohen_qmax"), cfg.integer("cohen_ymax"), tol, sink), true);
    suites.emplace_back(check_height_counts(cfg.integer("height_ymax"), cfg.integer("height_rmax"), false, sink), true);
    // The count phi(r) y / gcd(y, r) disagrees with enumeration; reported, not gating.
    suites.emplace_back(check_height_counts(cfg.integer("height_ymax"), cfg.integer("height_rmax"), true, sink), false);

    json identities = json::object();
    for (const auto& [s, gating] : suites) {
        auto entry = detail::summary_json(s);
        entry["gating"] = gating;
        identities[s.identity] = entry;
        if (gating && !s.ok()) out.pass = false;
        if (!all_rows) {
            detail::identity_row(csv, s.worst);
        }
    }
    if (!all_rows)
        for (const auto& r : failing) detail::identity_row(csv, r);
    out.summary["identities"] = identities;
    out.summary["flagged"] = json::array();
    for (const auto& [s, gating] : suites)
        if (!gating && !s.ok())
            out.summary["flagged"].push_back(s.identity + ": " + std::to_string(s.failures) + " of " +
                                             std::to_string(s.checked) + " counts differ from enumeration");

    if (cfg.flag("check_fixtures")) {
        const auto fixtures = FixtureSet::load(cfg.fixtures);
        TableCache tables(cfg.memory_cap);
        json checked = json::object();
        for (const auto& [name, f] : fixtures.all()) {
            if (!f.verify) continue;
            const auto measured = evaluate_fixture(f, tables);
            if (!measured) continue;
            const bool ok = f.matches(*measured);
            checked[name] = {{"expected", f.value}, {"measured", *measured}, {"pass", ok}};
            if (!ok) out.pass = false;
        }
        out.summary["fixtures"] = checked;
        out.summary["fixtures_hash"] = fixtures.hash();
    }
    out.csv = std::move(csv);
    return out;
}

inline Outcome run_approx(const RunConfig& cfg) {
    Outcome out;
    const i64 N = cfg.integer("N");
    const auto prog = detail::progression_of(cfg);
    const i64 q_cut = cfg.integer("qcut");
    const i64 M = detail::grid_size(cfg, N);
    const auto cutoff = detail::cutoff_of(cfg);
    ArcSelection mode;
    try {
        mode = arc_selection_from(cfg.text("mode"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("parameter 'mode': ") + e.what());
    }
    if (N < 2) throw ConfigError("parameter 'N': must be >= 2");
    if (q_cut < 2) throw ConfigError("parameter 'qcut': must be >= 2");
    const auto tables = detail::tables_for(cfg, N);
    const auto err = approx_error_profile(tables, N, prog, q_cut, cutoff, M, mode);
    const double nz = near_zero_error(tables, N, prog, static_cast<int>(cfg.integer("J")));

    CsvTable csv({"k", "xi", "re", "im", "abs"});
    for (std::size_t k = 0; k < err.residual.values.size(); ++k) {
        const auto v = err.residual.values[k];
        csv.row() << k << err.residual.xi(k) << v.real() << v.imag() << std::abs(v);
    }
    out.summary = {{"N", N},         {"y", prog.y},         {"b", prog.b},
                   {"q_cut", q_cut}, {"M", M},              {"sup_error", err.sup_error},
                   {"near_zero_error", nz}, {"mode", cfg.text("mode")}, {"cutoff", cutoff.name}};
    json warnings = json::array();
    if (!q_cut_in_range(q_cut, N)) warnings.push_back("q_cut exceeds N^(1/10)");
    out.summary["warnings"] = warnings;
    const double gate = cfg.real("max_sup_error");
    if (gate > 0.0 && err.sup_error > gate) out.pass = false;
    out.csv = std::move(csv);
    return out;
}

inline Outcome run_highlow(const RunConfig& cfg) {
    Outcome out;
    DecompositionConfig base;
    base.N = cfg.integer("N");
    base.prog = detail::progression_of(cfg);
    base.q_cut = cfg.integer("qcut");
    base.M = detail::grid_size(cfg, base.N);
    base.cutoff = detail::cutoff_of(cfg);
    const double r = cfg.real("r");
    const auto Q_list = cfg.integers("Q");
    if (Q_list.empty()) throw ConfigError("parameter 'Q': empty list");

    const auto approx = decomposed_approximant_profile(base);
    const auto hi_fams = hi_test_families(base.N, base.prog, cfg.seed, cfg.integer("max_spacing"));
    const auto lo_fams = standard_families(base.N, base.prog, cfg.seed, FamilyOptions{});

    CsvTable csv({"N", "y", "b", "Q", "r", "ratio_kind", "value"});
    CsvTable kernels({"Q", "kind", "x", "value"});
    std::vector<double> qs, hi_max;
    json per_Q = json::array();
    for (i64 Q : Q_list) {
        auto cfgQ = base;
        cfgQ.Q = Q;
        try {
            cfgQ.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("parameter 'Q': ") + e.what());
        }
        const auto lo_hat = lo_hat_profile(cfgQ);
        const auto hi_hat = hi_hat_profile(cfgQ);
        double partition = 0.0;
        for (std::size_t k = 0; k < approx.values.size(); ++k)
            partition = std::max(partition, std::abs(lo_hat.values[k] + hi_hat.values[k] - approx.values[k]));

        const auto lo_k = lo_kernel_spectral(cfgQ);
        const auto lo_c = lo_kernel_closed(cfgQ);
        const auto hi_k = hi_kernel_spectral(cfgQ);
        double disc = 0.0;
        for (std::size_t i = 0; i < lo_k.size(); ++i) disc = std::max(disc, std::abs(lo_k[i] - lo_c[i]));
        const double peak = lo_k.norm_inf();
        const double rel_disc = peak > 0.0 ? disc / peak : disc;

        auto emit = [&](const std::string& kind, double v) {
            csv.row() << base.N << base.prog.y << base.prog.b << Q << r << kind << v;
        };
        emit("partition_error", partition);
        emit("lo_dual_discrepancy", rel_disc);
        double best_hi = 0.0, best_lo = 0.0;
        for (const auto& fam : hi_fams) {
            const double v = hi_l2_ratio(hi_k, base.N, fam.elements);
            best_hi = std::max(best_hi, v);
            emit("hi_l2:" + fam.name, v);
        }
        for (const auto& fam : lo_fams) {
            const double v = lo_linf_ratio(lo_k, base.N, base.prog, fam.elements, r);
            best_lo = std::max(best_lo, v);
            emit("lo_linf:" + fam.name, v);
        }
        emit("hi_l2_max", best_hi);
        emit("lo_linf_max", best_lo);
        qs.push_back(static_cast<double>(Q));
        hi_max.push_back(best_hi);
        if (partition > cfg.real("partition_tol")) out.pass = false;
        per_Q.push_back({{"Q", Q},
                         {"partition_error", partition},
                         {"lo_dual_discrepancy", rel_disc},
                         {"hi_l2_max", best_hi},
                         {"lo_linf_max", best_lo}});

        if (cfg.flag("export_kernels")) {
            for (std::size_t i = 0; i < lo_k.size(); ++i) {
                const i64 x = lo_k.position(i);
                if (std::llabs(x) > 2 * base.N) continue;
                kernels.row() << Q << "lo" << x << lo_k[i];
                kernels.row() << Q << "hi" << x << hi_k[i];
            }
        }
    }
    out.summary = {{"N", base.N},         {"y", base.prog.y}, {"b", base.prog.b}, {"q_cut", base.q_cut},
                   {"M", base.M},         {"r", r},           {"per_Q", per_Q}};
    if (qs.size() >= 2 && std::all_of(hi_max.begin(), hi_max.end(), [](double v) { return v > 0.0; }))
        out.summary["hi_l2_exponent"] = loglog_slope(qs, hi_max);
    out.summary["warnings"] = base.warnings();
    out.csv = std::move(csv);
    if (cfg.flag("export_kernels")) out.extra.emplace_back("highlow_kernels", std::move(kernels));
    return out;
}

namespace detail {

inline FamilyOptions family_options(const RunConfig& cfg) {
    FamilyOptions opts;
    opts.random_density_exponents.clear();
    for (i64 j : cfg.integers("densities")) {
        if (j < 0 || j > 30) throw ConfigError("parameter 'densities': exponents must lie in [0, 30]");
        opts.random_density_exponents.push_back(static_cast<int>(j));
    }
    return opts;
}

inline json report_summary(const ScanReport& rep) {
    json s = json::object();
    for (const auto& [k, v] : rep.summary) s[k] = v;
    return {{"summary", s}, {"notes", rep.notes}, {"verdict", rep.verdict_ok ? "pass" : "fail"}};
}

}  // namespace detail

inline Outcome run_improving(const RunConfig& cfg) {
    ImprovingScanConfig sc;
    sc.N_list = cfg.integers("N");
    sc.y_list = cfg.integers("y");
    sc.b_list = cfg.integers("b");
    sc.r_list = cfg.reals("r");
    sc.families = detail::family_options(cfg);
    sc.families.greedy = cfg.flag("greedy");
    sc.seed = cfg.seed;
    sc.workers = cfg.workers;
    sc.floor_factor = cfg.integer("floor_factor");
    sc.stability_factor = cfg.real("stability");
    try {
        sc.validate();
        for (i64 y : sc.y_list) (void)residues_for(y, sc.b_list);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto tables =
        detail::tables_for(cfg, *std::max_element(sc.N_list.begin(), sc.N_list.end()));
    const auto rep = improving_scan(tables, sc);

    Outcome out;
    CsvTable csv({"N", "y", "b", "r", "family", "set_size", "seed", "ratio_kind", "value"});
    for (const auto& row : rep.rows)
        csv.row() << row.N << row.y << row.b << row.r << row.family << row.set_size << cfg.seed << row.kind
                  << row.value;
    out.summary = detail::report_summary(rep);
    out.pass = rep.verdict_ok;
    out.csv = std::move(csv);
    return out;
}

inline Outcome run_maximal(const RunConfig& cfg) {
    MaximalScanConfig sc;
    sc.N_list = cfg.integers("N");
    sc.y_list = cfg.integers("y");
    sc.b_list = cfg.integers("b");
    sc.r = cfg.real("r");
    sc.lambdas = cfg.reals("lambdas");
    sc.families = detail::family_options(cfg);
    sc.families.single_point = false;
    sc.seed = cfg.seed;
    sc.workers = cfg.workers;
    sc.weak_bound = cfg.real("weak_bound");
    sc.b_variation_bound = cfg.real("b_variation");
    try {
        sc.validate();
        for (i64 y : sc.y_list) (void)residues_for(y, sc.b_list);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const i64 n_min = *std::min_element(sc.N_list.begin(), sc.N_list.end());
    const i64 n_max = *std::max_element(sc.N_list.begin(), sc.N_list.end());
    const auto tables = detail::tables_for(cfg, n_max);
    const auto rep = maximal_scan(tables, sc);

    Outcome out;
    CsvTable csv({"N_min", "N_max", "y", "b", "r", "family", "set_size", "seed", "lambda", "Q_lambda",
                  "ratio_kind", "value"});
    for (const auto& row : rep.rows)
        csv.row() << n_min << n_max << row.y << row.b << row.r << row.family << row.set_size << cfg.seed
                  << row.lambda << row.Q << row.kind << row.value;
    out.summary = detail::report_summary(rep);
    out.pass = rep.verdict_ok;
    out.csv = std::move(csv);
    return out;
}

inline Outcome run_ramanujan_avg(const RunConfig& cfg) {
    const auto prog = detail::progression_of(cfg);
    const i64 t = cfg.integer("t");
    if (t < 1) throw ConfigError("parameter 't': must be >= 1");
    const auto Q_list = cfg.integers("Q");
    if (Q_list.empty()) throw ConfigError("parameter 'Q': empty list");
    const double ref = cfg.real("exponent");

    Outcome out;
    CsvTable csv({"Q", "M", "y", "b", "t", "lhs", "ratio"});
    std::vector<double> qs, vs;
    json warnings = json::array();
    double max_ratio = 0.0;
    for (i64 Q : Q_list) {
        if (Q < 1) throw ConfigError("parameter 'Q': values must be >= 1");
        i64 M = cfg.integer("M");
        i64 min_len = 0;
        try {
            min_len = bourgain_min_length(Q, prog, static_cast<int>(t));
        } catch (const std::overflow_error& e) {
            throw ConfigError(std::string("parameter 'Q': ") + e.what());
        }
        if (M == 0) M = cfg.integer("length_factor") * (min_len - 1);
        if (M < min_len) warnings.push_back("M=" + std::to_string(M) + " is not above y*Q^t for Q=" + std::to_string(Q));
        const double lhs = bourgain_average(Q, M, prog, static_cast<int>(t));
        const double ratio = lhs / std::pow(static_cast<double>(Q), ref);
        max_ratio = std::max(max_ratio, ratio);
        csv.row() << Q << M << prog.y << prog.b << t << lhs << ratio;
        qs.push_back(static_cast<double>(Q));
        vs.push_back(lhs);
    }
    out.summary = {{"y", prog.y}, {"b", prog.b}, {"t", t}, {"max_ratio", max_ratio}, {"warnings", warnings}};
    if (qs.size() >= 2) {
        const double slope = loglog_slope(qs, vs);
        out.summary["fitted_exponent"] = slope;
        const double gate = cfg.real("max_exponent");
        if (gate > 0.0 && slope > gate) out.pass = false;
    }
    out.csv = std::move(csv);
    return out;
}

inline Outcome run_sw(const RunConfig& cfg) {
    const auto prog = detail::progression_of(cfg);
    const auto xs = cfg.integers("x");
    if (xs.empty()) throw ConfigError("parameter 'x': empty list");
    for (i64 x : xs)
        if (x < 1) throw ConfigError("parameter 'x': values must be positive");
    const auto tables = detail::tables_for(cfg, *std::max_element(xs.begin(), xs.end()));
    const auto rep = sw_error_report(tables, xs, prog, static_cast<int>(cfg.integer("J")));

    Outcome out;
    CsvTable csv({"x", "psi", "main_term", "rel_error"});
    for (const auto& row : rep.rows) csv.row() << row.x << row.psi << row.main_term << row.rel_error;
    out.summary = {{"y", prog.y}, {"b", prog.b}, {"outside_range", rep.outside_range}};
    out.csv = std::move(csv);
    return out;
}

inline Outcome dispatch(const RunConfig& cfg) {
    if (cfg.command == "verify") return run_verify(cfg);
    if (cfg.command == "approx") return run_approx(cfg);
    if (cfg.command == "highlow") return run_highlow(cfg);
    if (cfg.command == "improving") return run_improving(cfg);
    if (cfg.command == "maximal") return run_maximal(cfg);
    if (cfg.command == "ramanujan-avg") return run_ramanujan_avg(cfg);
    if (cfg.command == "sw") return run_sw(cfg);
    throw ConfigError("unknown command '" + cfg.command + "'");
}

// ---------------------------------------------------------------- entry point

inline void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file " + path.string());
    f << body;
    if (!f) throw ConfigError("failed writing output file " + path.string());
}

// Runs a resolved configuration: emits artifacts, returns the exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    Outcome result = dispatch(cfg);
    json summary = result.summary;
    summary["command"] = cfg.command;
    summary["seed"] = cfg.seed;
    summary["version"] = kVersion;
    summary["parameters"] = cfg.parameters;
    summary["pass"] = result.pass;
    if (!summary.contains("fixtures_hash")) {
        try {
            summary["fixtures_hash"] = FixtureSet::load(cfg.fixtures).hash();
        } catch (const std::exception&) {
            summary["fixtures_hash"] = nullptr;
        }
    }
    const std::string summary_text = summary.dump(2) + "\n";
    if (cfg.out.empty()) {
        if (result.csv) result.csv->write(out);
        err << summary_text;
    } else {
        std::error_code ec;
        std::filesystem::create_directories(cfg.out, ec);
        const std::filesystem::path dir(cfg.out);
        if (result.csv) write_file(dir / (cfg.command + ".csv"), result.csv->str());
        for (const auto& [stem, table] : result.extra) write_file(dir / (stem + ".csv"), table.str());
        write_file(dir / (cfg.command + ".json"), summary_text);
        out << summary_text;
    }
    return result.pass ? kPass : kFail;
}

inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Prime averages along arithmetic progressions: identity suites and inequality scans"};
    app.require_subcommand(1);
    std::map<std::string, std::string> globals;
    std::string config_path;

    struct Bound {
        std::string key;
        CLI::Option* option;
        std::string value;
    };
    std::map<std::string, std::vector<Bound>> bound;  // per command, stable addresses below
    for (const auto& spec : command_specs()) bound[spec.name].reserve(spec.params.size() + 4);

    std::map<std::string, CLI::App*> subs;
    for (const auto& spec : command_specs()) {
        auto* sub = app.add_subcommand(spec.name, spec.help);
        subs[spec.name] = sub;
        sub->add_option("--config", config_path, "JSON config file; flags override it");
        for (const char* g : {"seed", "workers", "out", "fixtures"}) {
            auto& slot = bound[spec.name].emplace_back(Bound{g, nullptr, {}});
            slot.option = sub->add_option(std::string("--") + g, slot.value, std::string(g));
        }
        for (const auto& p : spec.params) {
            auto& slot = bound[spec.name].emplace_back(Bound{p.key, nullptr, {}});
            slot.option = sub->add_option("--" + p.key, slot.value, p.help + " [" + p.fallback.dump() + "]");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    try {
        std::string command;
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) command = name;
        std::map<std::string, std::string> flags;
        for (const auto& slot : bound[command]) {
            if (slot.option->count() == 0) continue;
            if (slot.key == "seed" || slot.key == "workers" || slot.key == "out" || slot.key == "fixtures")
                globals[slot.key] = slot.value;
            else
                flags[slot.key] = slot.value;
        }
        std::optional<json> file;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file " + config_path);
            try {
                file = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("config file " + config_path + " is not valid JSON: " + e.what());
            }
        }
        const auto cfg = resolve_config(command, file ? &*file : nullptr, flags, globals);
        return run(cfg, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::out_of_range& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::length_error& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFail;
    }
}

}  // namespace primeavg::cli
