#pragma once

// Empirical scanners for the fixed-scale l^r-improving inequality and the
// dyadic maximal inequality of the prime averages A_{N,y,b}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "primeavg/arith.hpp"
#include "primeavg/families.hpp"
#include "primeavg/highlow.hpp"
#include "primeavg/multiplier.hpp"
#include "primeavg/parallel.hpp"
#include "primeavg/signal.hpp"

namespace primeavg {

inline constexpr const char* kVersion = "primeavg 0.1.0";

// A_{N,y,b} f = K * f with K(n) = (phi(y)/N) Lambda(n) 1_{n = b mod y}, 1 <= n < N.
class PrimeAverage {
public:
    PrimeAverage(const ArithTables& tables, i64 N, const Progression& prog, i64 M = 0)
        : N_(N), M_(M == 0 ? next_power_of_two(4 * N) : M), prog_(prog), kernel_(make_kernel(tables)),
          convolver_(kernel_) {}

    i64 N() const { return N_; }
    i64 M() const { return M_; }
    const Progression& progression() const { return prog_; }
    const CyclicSignal& kernel() const { return kernel_; }

    CyclicSignal apply(const CyclicSignal& f) const { return convolver_.apply(f); }
    CyclicSignal apply_indicator(std::span<const i64> F) const {
        return apply(CyclicSignal::indicator(static_cast<std::size_t>(M_), F));
    }

private:
    CyclicSignal make_kernel(const ArithTables& tables) const {
        require_grid(M_);
        if (M_ < 2 * N_) throw std::invalid_argument("PrimeAverage: need M >= 2N to avoid wraparound");
        CyclicSignal k(static_cast<std::size_t>(M_));
        for (auto [n, w] : detail::prime_kernel_terms(tables, N_, prog_)) k[static_cast<std::size_t>(n)] = w;
        return k;
    }

    i64 N_;
    i64 M_;
    Progression prog_;
    CyclicSignal kernel_;
    CyclicConvolver convolver_;
};

namespace detail {

inline void require_exponent(double r) {
    if (!(r > 1.0 && r < 2.0)) throw std::invalid_argument("exponent r must lie in (1, 2)");
}

inline double dual_exponent(double r) { return r / (r - 1.0); }

}  // namespace detail

// ||A 1_F||_{r'} / ((y/N)^{1/r - 1/r'} |F|^{1/r}).
inline double improving_ratio(const PrimeAverage& avg, double r, std::span<const i64> F) {
    detail::require_exponent(r);
    detail::require_subset(F, avg.N());
    const double rp = detail::dual_exponent(r);
    const auto out = avg.apply_indicator(F);
    const double scale =
        std::pow(static_cast<double>(avg.progression().y) / static_cast<double>(avg.N()), 1.0 / r - 1.0 / rp) *
        std::pow(static_cast<double>(F.size()), 1.0 / r);
    return out.norm(rp) / scale;
}

inline double improving_ratio(const ArithTables& tables, i64 N, const Progression& prog, double r,
                              std::span<const i64> F) {
    return improving_ratio(PrimeAverage(tables, N, prog), r, F);
}

struct DualRatio {
    double ratio = 0.0;
    // y^2 |F| |G| / N^2 >= (log N)^{-r'}: the bound holds for trivial reasons.
    bool trivial_regime = false;
};

// (y/N) <A 1_F, 1_G> / ((y|F|/N)^{1/r} (y|G|/N)^{1/r}).
inline DualRatio dual_ratio(const PrimeAverage& avg, double r, std::span<const i64> F, std::span<const i64> G) {
    detail::require_exponent(r);
    detail::require_subset(F, avg.N());
    detail::require_subset(G, avg.N());
    const double y = static_cast<double>(avg.progression().y);
    const double N = static_cast<double>(avg.N());
    const auto out = avg.apply_indicator(F);
    double pairing = 0.0;
    for (i64 x : G) pairing += out.value_at(x);
    const double fF = y * static_cast<double>(F.size()) / N;
    const double fG = y * static_cast<double>(G.size()) / N;
    DualRatio d;
    d.ratio = (y / N) * pairing / (std::pow(fF, 1.0 / r) * std::pow(fG, 1.0 / r));
    d.trivial_regime = fF * fG >= std::pow(std::log(N), -detail::dual_exponent(r));
    return d;
}

struct ScanRow {
    i64 N = 0;
    i64 y = 1;
    i64 b = 0;
    double r = 0.0;
    std::string family;
    i64 set_size = 0;
    double lambda = 0.0;  // weak-type height; 0 when not applicable
    i64 Q = 0;            // height threshold policy value; 0 when not applicable
    std::string kind;     // improving | weak | strong
    double value = 0.0;
};

struct ScanReport {
    std::string command;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::vector<ScanRow> rows;
    // Summary entries keyed by a descriptive name.
    std::map<std::string, double> summary;
    bool verdict_ok = true;
    std::vector<std::string> notes;
};

struct ImprovingScanConfig {
    std::vector<i64> N_list{i64{1} << 14, i64{1} << 16, i64{1} << 18};
    std::vector<i64> y_list{1, 3, 5};
    std::vector<i64> b_list;  // empty: every b in A_y
    std::vector<double> r_list{1.5};
    FamilyOptions families{};
    std::uint64_t seed = 0x5eed;
    unsigned workers = 1;
    i64 floor_factor = 1024;  // require N >= floor_factor * y
    double stability_factor = 2.0;

    void validate() const {
        if (N_list.empty() || y_list.empty() || r_list.empty())
            throw std::invalid_argument("improving scan: N, y and r lists must be non-empty");
        for (double r : r_list) detail::require_exponent(r);
        for (i64 N : N_list)
            if (!is_power_of_two(N)) throw std::invalid_argument("improving scan: N values must be powers of two");
        for (i64 y : y_list)
            for (i64 N : N_list)
                if (N < floor_factor * y)
                    throw std::invalid_argument("improving scan: N=" + std::to_string(N) +
                                                " is below the desk-scale floor for y=" + std::to_string(y));
    }
};

inline std::vector<i64> residues_for(i64 y, std::span<const i64> b_list) {
    std::vector<i64> out;
    if (b_list.empty()) return reduced_residues(y);
    for (i64 b : b_list)
        if (b >= 0 && b < y && std::gcd(b, y) == 1) out.push_back(b);
    if (out.empty()) throw std::invalid_argument("no admissible residue b for y=" + std::to_string(y));
    return out;
}

inline std::string summary_key(const std::string& what, i64 y, double r, i64 N = 0) {
    std::string key = what + "[y=" + std::to_string(y);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", r);
    key += ",r=" + std::string(buf);
    if (N != 0) key += ",N=" + std::to_string(N);
    return key + "]";
}

// For each (y, b, N, r): ratios of every family. Verdict: for each (y, r) the
// maximum ratio changes by less than stability_factor between consecutive N
// among the top three scales.
inline ScanReport improving_scan(const ArithTables& tables, const ImprovingScanConfig& cfg) {
    cfg.validate();
    struct Cell {
        i64 y, b, N;
    };
    std::vector<Cell> cells;
    for (i64 y : cfg.y_list)
        for (i64 b : residues_for(y, cfg.b_list))
            for (i64 N : cfg.N_list) cells.push_back({y, b, N});

    std::vector<std::vector<ScanRow>> per_cell(cells.size());
    parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
        const auto [y, b, N] = cells[i];
        const auto prog = Progression::make(y, b);
        const PrimeAverage avg(tables, N, prog);
        const auto fams = standard_families(N, prog, cfg.seed, cfg.families, &avg.kernel());
        for (double r : cfg.r_list)
            for (const auto& fam : fams)
                per_cell[i].push_back({N, y, b, r, fam.name, static_cast<i64>(fam.elements.size()), 0.0, 0,
                                       "improving", improving_ratio(avg, r, fam.elements)});
    });

    ScanReport report;
    report.command = "improving";
    report.seed = cfg.seed;
    for (auto& rows : per_cell)
        for (auto& row : rows) report.rows.push_back(std::move(row));

    auto sorted_N = cfg.N_list;
    std::sort(sorted_N.begin(), sorted_N.end());
    sorted_N.erase(std::unique(sorted_N.begin(), sorted_N.end()), sorted_N.end());
    for (i64 y : cfg.y_list) {
        for (double r : cfg.r_list) {
            std::vector<double> maxima;
            for (i64 N : sorted_N) {
                double m = 0.0;
                for (const auto& row : report.rows)
                    if (row.y == y && row.r == r && row.N == N) m = std::max(m, row.value);
                report.summary[summary_key("max_ratio", y, r, N)] = m;
                maxima.push_back(m);
            }
            const std::size_t first = maxima.size() > 3 ? maxima.size() - 3 : 0;
            double worst = 1.0;
            for (std::size_t i = first + 1; i < maxima.size(); ++i) {
                const double change = std::max(maxima[i] / maxima[i - 1], maxima[i - 1] / maxima[i]);
                worst = std::max(worst, change);
            }
            report.summary[summary_key("max_change", y, r)] = worst;
            if (!(worst < cfg.stability_factor)) {
                report.verdict_ok = false;
                report.notes.push_back("unstable improving ratio for " + summary_key("", y, r));
            }
        }
    }
    return report;
}

struct MaximalScanConfig {
    std::vector<i64> N_list{i64{1} << 10, i64{1} << 11, i64{1} << 12, i64{1} << 13,
                            i64{1} << 14, i64{1} << 15, i64{1} << 16};
    std::vector<i64> y_list{1, 5};
    std::vector<i64> b_list;  // empty: every b in A_y
    double r = 2.0;
    std::vector<double> lambdas{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
    FamilyOptions families{{3}, true, true, false, false};
    std::uint64_t seed = 0x5eed;
    unsigned workers = 1;
    double weak_bound = 0.0;          // 0: no bound enforced
    double b_variation_bound = 0.0;   // 0: no bound enforced

    void validate() const {
        if (N_list.empty() || y_list.empty() || lambdas.empty())
            throw std::invalid_argument("maximal scan: N, y and lambda lists must be non-empty");
        if (!(r > 1.0)) throw std::invalid_argument("maximal scan: r must exceed 1");
        for (i64 N : N_list)
            if (!is_power_of_two(N)) throw std::invalid_argument("maximal scan: N values must be dyadic");
        for (double l : lambdas)
            if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("maximal scan: lambda must lie in (0, 1)");
    }
};

// Q(lambda) ~ lambda^{-1 + r/2}, rounded to a power of two (at least 1).
inline i64 height_threshold_policy(double lambda, double r) {
    const double target = std::pow(lambda, -1.0 + r / 2.0);
    i64 Q = 1;
    while (static_cast<double>(2 * Q) <= target) Q *= 2;
    return Q;
}

struct MaximalCell {
    double weak_max = 0.0;
    double strong = 0.0;
};

// sup over the N list of |A_N 1_F|, on one cyclic group of size 4 max N.
inline CyclicSignal maximal_average(const ArithTables& tables, std::span<const i64> N_list, const Progression& prog,
                                    std::span<const i64> F) {
    const i64 n_max = *std::max_element(N_list.begin(), N_list.end());
    const i64 M = next_power_of_two(4 * n_max);
    CyclicSignal sup(static_cast<std::size_t>(M));
    const auto indicator = CyclicSignal::indicator(static_cast<std::size_t>(M), F);
    for (i64 N : N_list) {
        const PrimeAverage avg(tables, N, prog, M);
        const auto out = avg.apply(indicator);
        for (std::size_t i = 0; i < sup.size(); ++i) sup[i] = std::max(sup[i], std::abs(out[i]));
    }
    return sup;
}

// lambda |{sup > lambda}|^{1/r} / |F|^{1/r}.
inline double weak_type_ratio(const CyclicSignal& sup, std::size_t set_size, double lambda, double r) {
    std::size_t count = 0;
    for (double v : sup.values())
        if (v > lambda) ++count;
    return lambda * std::pow(static_cast<double>(count) / static_cast<double>(set_size), 1.0 / r);
}

inline ScanReport maximal_scan(const ArithTables& tables, const MaximalScanConfig& cfg) {
    cfg.validate();
    const i64 n_max = *std::max_element(cfg.N_list.begin(), cfg.N_list.end());
    struct Cell {
        i64 y, b;
    };
    std::vector<Cell> cells;
    for (i64 y : cfg.y_list)
        for (i64 b : residues_for(y, cfg.b_list)) cells.push_back({y, b});

    std::vector<std::vector<ScanRow>> per_cell(cells.size());
    parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
        const auto [y, b] = cells[i];
        const auto prog = Progression::make(y, b);
        for (const auto& fam : standard_families(n_max, prog, cfg.seed, cfg.families)) {
            const auto sup = maximal_average(tables, cfg.N_list, prog, fam.elements);
            const auto size = static_cast<i64>(fam.elements.size());
            for (double lambda : cfg.lambdas)
                per_cell[i].push_back({n_max, y, b, cfg.r, fam.name, size, lambda,
                                       height_threshold_policy(lambda, cfg.r), "weak",
                                       weak_type_ratio(sup, fam.elements.size(), lambda, cfg.r)});
            per_cell[i].push_back({n_max, y, b, cfg.r, fam.name, size, 0.0, 0, "strong",
                                   sup.norm(cfg.r) / std::pow(static_cast<double>(size), 1.0 / cfg.r)});
        }
    });

    ScanReport report;
    report.command = "maximal";
    report.seed = cfg.seed;
    for (auto& rows : per_cell)
        for (auto& row : rows) report.rows.push_back(std::move(row));

    for (i64 y : cfg.y_list) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (i64 b : residues_for(y, cfg.b_list)) {
            double m = 0.0;
            for (const auto& row : report.rows)
                if (row.y == y && row.b == b && row.kind == "weak") m = std::max(m, row.value);
            report.summary["max_weak[y=" + std::to_string(y) + ",b=" + std::to_string(b) + "]"] = m;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        const double variation = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        report.summary["max_weak[y=" + std::to_string(y) + "]"] = hi;
        report.summary["b_variation[y=" + std::to_string(y) + "]"] = variation;
        if (cfg.weak_bound > 0.0 && hi > cfg.weak_bound) {
            report.verdict_ok = false;
            report.notes.push_back("weak-type ratio above bound for y=" + std::to_string(y));
        }
        if (cfg.b_variation_bound > 0.0 && !(variation < cfg.b_variation_bound)) {
            report.verdict_ok = false;
            report.notes.push_back("b variation above bound for y=" + std::to_string(y));
        }
    }
    return report;
}

}  // namespace primeavg
