#pragma once

// Exhaustive and sampled sweeps of the exact exponential-sum identities.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "primeavg/arith.hpp"
#include "primeavg/expsums.hpp"

namespace primeavg {

struct IdentityRow {
    std::string identity;
    i64 q = 0;
    i64 y = 0;
    i64 b = 0;
    i64 a_or_x = 0;
    cplx lhs;
    cplx rhs;
    double tolerance = 0.0;

    double abs_err() const { return std::abs(lhs - rhs); }
    bool ok() const { return abs_err() <= tolerance; }
};

struct IdentitySummary {
    std::string identity;
    std::size_t checked = 0;
    std::size_t failures = 0;
    double max_abs_err = 0.0;
    IdentityRow worst;

    bool ok() const { return checked > 0 && failures == 0; }
};

// Receives every checked row; may be empty.
using RowSink = std::function<void(const IdentityRow&)>;

namespace detail {

class SummaryBuilder {
public:
    SummaryBuilder(std::string name, const RowSink& sink) : sink_(sink) { s_.identity = std::move(name); }

    void add(const IdentityRow& row) {
        ++s_.checked;
        const double err = row.abs_err();
        if (!row.ok()) ++s_.failures;
        if (s_.checked == 1 || err > s_.max_abs_err) {
            s_.max_abs_err = err;
            s_.worst = row;
        }
        if (sink_) sink_(row);
    }

    IdentitySummary done() { return std::move(s_); }

private:
    IdentitySummary s_;
    const RowSink& sink_;
};

}  // namespace detail

// Direct and closed Ramanujan sums for q <= q_max, x in [0, 2q).
inline IdentitySummary check_ramanujan_closed(i64 q_max, double tol = 1e-8, const RowSink& sink = {}) {
    detail::SummaryBuilder out("ramanujan_closed", sink);
    for (i64 q = 1; q <= q_max; ++q)
        for (i64 x = 0; x < 2 * q; ++x)
            out.add({"ramanujan_closed", q, 1, 0, x, ramanujan_sum(q, x),
                     static_cast<double>(ramanujan_sum_closed(q, x)), tol});
    return out.done();
}

// sum_{d | r} tau_d(x) = r 1_{r | x} for r <= r_max, x in [0, 2r), exact after rounding.
inline IdentitySummary check_divisor_tau(i64 r_max, const RowSink& sink = {}) {
    detail::SummaryBuilder out("divisor_tau", sink);
    for (i64 r = 1; r <= r_max; ++r)
        for (i64 x = 0; x < 2 * r; ++x)
            out.add({"divisor_tau", r, 1, 0, x, static_cast<double>(divisor_tau_check(r, x)),
                     x % r == 0 ? static_cast<double>(r) : 0.0, 0.0});
    return out.done();
}

struct SampledGrid {
    i64 q_max = 96;
    i64 y_max = 36;
    std::size_t sample_cap = 100000;
    std::uint64_t seed = 0x5eed;
    double tol_per_q = 1e-8;  // tolerance is tol_per_q * q
};

namespace detail {

// Visits (q, y, b, a) with b in A_y, a in A_q, keeping each tuple with
// probability sample_cap / total when the grid exceeds sample_cap.
template <class Fn>
void visit_sampled_grid(const SampledGrid& grid, Fn&& fn) {
    double total = 0.0;
    for (i64 q = 1; q <= grid.q_max; ++q)
        for (i64 y = 1; y <= grid.y_max; ++y)
            total += static_cast<double>(totient_of(q)) * static_cast<double>(totient_of(y));
    const double keep = std::min(1.0, static_cast<double>(grid.sample_cap) / total);
    std::mt19937_64 rng(grid.seed);
    std::bernoulli_distribution coin(keep);
    for (i64 q = 1; q <= grid.q_max; ++q) {
        const auto units_q = reduced_residues(q);
        for (i64 y = 1; y <= grid.y_max; ++y)
            for (i64 b : reduced_residues(y))
                for (i64 a : units_q)
                    if (keep >= 1.0 || coin(rng)) fn(q, y, b, a);
    }
}

}  // namespace detail

inline IdentitySummary check_progression_ramanujan(const SampledGrid& grid, const RowSink& sink = {}) {
    detail::SummaryBuilder out("progression_ramanujan", sink);
    detail::visit_sampled_grid(grid, [&](i64 q, i64 y, i64 b, i64 a) {
        out.add({"progression_ramanujan", q, y, b, a, progression_ramanujan_direct(q, y, b, a),
                 progression_ramanujan_closed(q, y, b, a), grid.tol_per_q * static_cast<double>(q)});
    });
    return out.done();
}

inline IdentitySummary check_upsilon(const SampledGrid& grid, const RowSink& sink = {}) {
    detail::SummaryBuilder out("gauss_upsilon", sink);
    detail::visit_sampled_grid(grid, [&](i64 q, i64 y, i64 b, i64 a) {
        out.add({"gauss_upsilon", q, y, b, a, gauss_upsilon_direct(a, q, y, b), gauss_upsilon_closed(a, q, y, b),
                 grid.tol_per_q * static_cast<double>(q)});
    });
    return out.done();
}

// Exhaustive over q <= q_max, y <= y_max, b in A_y, x in [0, q).
inline IdentitySummary check_cohen(i64 q_max, i64 y_max, double tol_per_q = 1e-8, const RowSink& sink = {}) {
    detail::SummaryBuilder out("cohen_progression", sink);
    for (i64 q = 1; q <= q_max; ++q)
        for (i64 y = 1; y <= y_max; ++y)
            for (i64 b : reduced_residues(y))
                for (i64 x = 0; x < q; ++x) {
                    const auto c = cohen_progression_check(q, y, b, x);
                    out.add({"cohen_progression", q, y, b, x, c.lhs, c.rhs, tol_per_q * static_cast<double>(q)});
                }
    return out.done();
}

// Enumerated height-class sizes against a closed count, for y <= y_max, r <= r_max.
// Rows use q = r. `stated` selects phi(r) y / gcd(y, r); otherwise height_class_size.
inline IdentitySummary check_height_counts(i64 y_max, i64 r_max, bool stated, const RowSink& sink = {}) {
    const std::string name = stated ? "height_class_stated" : "height_class";
    detail::SummaryBuilder out(name, sink);
    for (i64 y = 1; y <= y_max; ++y)
        for (i64 r = 1; r <= r_max; ++r) {
            const auto [enumerated, formula] = count_height_class(y, r);
            const i64 closed = stated ? formula : height_class_size(y, r);
            out.add({name, r, y, 0, r, static_cast<double>(enumerated), static_cast<double>(closed), 0.0});
        }
    return out.done();
}

}  // namespace primeavg
