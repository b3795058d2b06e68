#pragma once

// Versioned file of frozen constants: oracle values, measured trend values and
// the bounds the scans are held to.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "primeavg/arith.hpp"
#include "primeavg/expsums.hpp"
#include "primeavg/fit.hpp"
#include "primeavg/highlow.hpp"
#include "primeavg/multiplier.hpp"

namespace primeavg {

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Fixture {
    std::string name;
    std::string kind;
    nlohmann::json params;
    double value = 0.0;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    bool verify = false;

    bool matches(double measured) const {
        return std::abs(measured - value) <= abs_tol + rel_tol * std::abs(value);
    }
};

class FixtureSet {
public:
    static FixtureSet load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read fixtures file " + path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        FixtureSet set;
        set.path_ = path;
        set.hash_ = hex64(fnv1a(text));
        const auto doc = nlohmann::json::parse(text);
        for (const auto& [name, entry] : doc.at("fixtures").items()) {
            Fixture f;
            f.name = name;
            f.kind = entry.at("kind").get<std::string>();
            f.params = entry.value("params", nlohmann::json::object());
            f.value = entry.at("value").get<double>();
            f.rel_tol = entry.value("rel_tol", 0.0);
            f.abs_tol = entry.value("abs_tol", 0.0);
            f.verify = entry.value("verify", false);
            set.fixtures_.emplace(name, std::move(f));
        }
        return set;
    }

    const Fixture& at(const std::string& name) const {
        auto it = fixtures_.find(name);
        if (it == fixtures_.end()) throw std::out_of_range("fixture not found: " + name);
        return it->second;
    }
    double value(const std::string& name) const { return at(name).value; }
    const std::map<std::string, Fixture>& all() const { return fixtures_; }
    const std::string& hash() const { return hash_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string hash_;
    std::map<std::string, Fixture> fixtures_;
};

// Sieve tables grown on demand and shared between evaluations.
class TableCache {
public:
    explicit TableCache(i64 memory_cap = kDefaultMemoryCap) : cap_(memory_cap) {}

    const ArithTables& at_least(i64 bound) {
        if (!tables_ || tables_->bound() < bound) tables_ = std::make_unique<ArithTables>(ArithTables::build(bound, cap_));
        return *tables_;
    }

private:
    i64 cap_;
    std::unique_ptr<ArithTables> tables_;
};

// Recomputes a fixture from its parameters; nullopt for kinds that are only
// produced by a full scan (bounds and scan maxima).
inline std::optional<double> evaluate_fixture(const Fixture& f, TableCache& tables) {
    const auto& p = f.params;
    auto prog = [&] { return Progression::make(p.at("y").get<i64>(), p.at("b").get<i64>()); };
    if (f.kind == "psi") {
        const i64 x = p.at("x").get<i64>();
        return psi_progression(tables.at_least(x), x, prog());
    }
    if (f.kind == "bourgain_max_ratio") {
        const int t = p.at("t").get<int>();
        const i64 factor = p.at("length_factor").get<i64>();
        const auto pr = prog();
        double best = 0.0;
        for (i64 Q : p.at("Q").get<std::vector<i64>>()) {
            const i64 M = factor * pr.y * static_cast<i64>(std::llround(std::pow(static_cast<double>(Q), t)));
            best = std::max(best, bourgain_average(Q, M, pr, t) / std::pow(static_cast<double>(Q), 1.25));
        }
        return best;
    }
    if (f.kind == "near_zero_error") {
        const i64 N = p.at("N").get<i64>();
        return near_zero_error(tables.at_least(N), N, prog(), p.at("J").get<int>());
    }
    if (f.kind == "approx_sup_error") {
        const i64 N = p.at("N").get<i64>();
        return approx_error_profile(tables.at_least(N), N, prog(), p.at("q_cut").get<i64>(), CutoffSpec::smooth(),
                                    4 * N)
            .sup_error;
    }
    if (f.kind == "mm_constant") {
        double worst = 0.0;
        for (i64 N : p.at("N").get<std::vector<i64>>())
            for (i64 y : p.at("y").get<std::vector<i64>>())
                for (i64 b : reduced_residues(y))
                    worst = std::max(worst, mm_constant(N, Progression::make(y, b), p.at("samples").get<i64>()));
        return worst;
    }
    if (f.kind == "phi_envelope") {
        DecompositionConfig cfg;
        cfg.N = p.at("N").get<i64>();
        cfg.M = p.at("M").get<i64>();
        cfg.prog = prog();
        return phi_envelope_constant(cfg, p.at("q").get<std::vector<i64>>());
    }
    if (f.kind == "hi_l2_slope") {
        std::vector<double> qs, vs;
        for (i64 Q : p.at("Q").get<std::vector<i64>>()) {
            DecompositionConfig cfg;
            cfg.N = p.at("N").get<i64>();
            cfg.prog = prog();
            cfg.Q = Q;
            cfg.M = 4 * cfg.N;
            cfg.q_cut = p.at("q_cut").get<i64>();
            qs.push_back(static_cast<double>(Q));
            vs.push_back(hi_l2_family_max(cfg, p.value("seed", std::uint64_t{0x5eed})).value);
        }
        return loglog_slope(qs, vs);
    }
    return std::nullopt;
}

}  // namespace primeavg
