#pragma once

// Ramanujan sums, their restriction to a residue class, the normalized
// Gauss sums Upsilon attached to rationals a/q, Ramanujan heights, and the
// progression average of sums of |tau_q(n)|.
//
// Each identity is available as a direct exponential sum and as a closed
// form; the two routes are kept independent so they can check each other.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "primeavg/arith.hpp"

namespace primeavg {

using cplx = std::complex<double>;

// e(x) = exp(2 pi i x).
inline cplx e(double x) {
    const double frac = x - std::floor(x);
    return std::polar(1.0, 2.0 * std::numbers::pi * frac);
}

// e(num / den), reducing the numerator exactly before converting to floating point.
inline cplx unit_root(i64 num, i64 den) {
    const i64 r = mod(num, den);
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(den));
}

namespace detail {

inline void require_positive(i64 v, const char* what) {
    if (v < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
}

inline void require_coprime(i64 u, i64 v, const char* what) {
    if (std::gcd(u, v) != 1) throw std::invalid_argument(std::string("precondition violated: ") + what);
}

}  // namespace detail

// tau_q(x) by direct summation over the reduced residues mod q.
inline double ramanujan_sum(i64 q, i64 x) {
    detail::require_positive(q, "ramanujan_sum: q");
    cplx acc{0.0, 0.0};
    for (i64 a : reduced_residues(q)) acc += unit_root(a * mod(x, q), q);
    const double tol = 1e-9 * static_cast<double>(q);
    if (std::abs(acc.imag()) > tol || std::abs(acc.real() - std::round(acc.real())) > tol)
        throw std::logic_error("ramanujan_sum: direct sum is not a rational integer (q=" +
                               std::to_string(q) + ", x=" + std::to_string(x) + ")");
    return acc.real();
}

// tau_q(x) = sum over d | gcd(q, x) of d * mu(q/d), with gcd(q, 0) = q.
inline i64 ramanujan_sum_closed(i64 q, i64 x) {
    detail::require_positive(q, "ramanujan_sum_closed: q");
    const i64 g = std::gcd(q, mod(x, q));
    i64 sum = 0;
    for (i64 d : divisors(g)) sum += d * mobius_of(q / d);
    return sum;
}

// Sum over d | r of tau_d(x), from direct sums, rounded to the nearest integer.
// Equals r when r | x and 0 otherwise.
inline i64 divisor_tau_check(i64 r, i64 x) {
    detail::require_positive(r, "divisor_tau_check: r");
    double acc = 0.0;
    for (i64 d : divisors(r)) acc += ramanujan_sum(d, x);
    return std::llround(acc);
}

namespace detail {

inline void progression_sum_preconditions(i64 q, i64 y, i64 b, i64 a) {
    require_positive(q, "q");
    require_positive(y, "y");
    require_coprime(a, q, "gcd(a, q) = 1");
    require_coprime(b, std::gcd(q, y), "gcd(b, gcd(q, y)) = 1");
}

// Splits q against g = gcd(q, y). When gcd(g, q/g) = 1 and g < q, t solves
// 1 - g * inv(g mod q/g) = (q/g) * t.
struct GcdSplit {
    i64 g;
    i64 cofactor;  // q / g
    bool degenerate;  // 1 < g < q and gcd(g, q/g) > 1
    i64 t;
};

inline GcdSplit split(i64 q, i64 y) {
    GcdSplit s{};
    s.g = std::gcd(q, y);
    s.cofactor = q / s.g;
    s.degenerate = s.g > 1 && s.g < q && std::gcd(s.g, s.cofactor) > 1;
    if (!s.degenerate && s.g < q) {
        const i64 g_bar = inverse_mod(s.g, s.cofactor);
        s.t = (1 - s.g * g_bar) / s.cofactor;
    }
    return s;
}

}  // namespace detail

// Sum of e(r a / q) over r in A_q with r = b mod gcd(q, y), by direct summation.
inline cplx progression_ramanujan_direct(i64 q, i64 y, i64 b, i64 a) {
    detail::progression_sum_preconditions(q, y, b, a);
    const i64 g = std::gcd(q, y);
    cplx acc{0.0, 0.0};
    for (i64 r : reduced_residues(q))
        if (mod(r - b, g) == 0) acc += unit_root(r * a, q);
    return acc;
}

// Three-case closed form of the restricted Ramanujan sum:
//   0                       if 1 < g < q and gcd(g, q/g) > 1,
//   mu(q/g) e(a b t / g)    if 1 <= g < q and gcd(g, q/g) = 1,
//   e(a b / q)              if g = q.
inline cplx progression_ramanujan_closed(i64 q, i64 y, i64 b, i64 a) {
    detail::progression_sum_preconditions(q, y, b, a);
    const auto s = detail::split(q, y);
    if (s.g == q) return unit_root(a * b, q);
    if (s.degenerate) return {0.0, 0.0};
    return static_cast<double>(mobius_of(s.cofactor)) * unit_root(mod(a * b, s.g) * mod(s.t, s.g), s.g);
}

struct IdentityCheck {
    cplx lhs;
    cplx rhs;

    double abs_err() const { return std::abs(lhs - rhs); }
};

// Progression form of Cohen's identity: sum of tau_q(x + t) over t in A_q with
// t = b mod g, against mu(q/g) tau_{q/g}(x) tau_g(x + b) (or 0 when gcd(g, q/g) > 1).
inline IdentityCheck cohen_progression_check(i64 q, i64 y, i64 b, i64 x) {
    detail::require_positive(q, "q");
    detail::require_positive(y, "y");
    const i64 g = std::gcd(y, q);
    detail::require_coprime(b, g, "gcd(b, gcd(q, y)) = 1");

    IdentityCheck check{};
    for (i64 t : reduced_residues(q))
        if (mod(t - b, g) == 0) check.lhs += ramanujan_sum(q, x + t);

    const i64 cofactor = q / g;
    if (std::gcd(g, cofactor) > 1) {
        check.rhs = 0.0;
    } else {
        check.rhs = static_cast<double>(mobius_of(cofactor)) * ramanujan_sum(cofactor, x) *
                    ramanujan_sum(g, x + b);
    }
    return check;
}

namespace detail {

inline void upsilon_preconditions(i64 a, i64 q, i64 y, i64 b) {
    require_positive(q, "q");
    require_positive(y, "y");
    require_coprime(a, q, "gcd(a, q) = 1");
    require_coprime(b, y, "gcd(b, y) = 1");
}

}  // namespace detail

// Upsilon(a, q) = (phi(y) / phi(l)) * sum of e(-r a / q) over r in A_q, r = b mod g,
// with l = lcm(y, q), by direct summation.
inline cplx gauss_upsilon_direct(i64 a, i64 q, i64 y, i64 b) {
    detail::upsilon_preconditions(a, q, y, b);
    const i64 g = std::gcd(q, y);
    cplx acc{0.0, 0.0};
    for (i64 r : reduced_residues(q))
        if (mod(r - b, g) == 0) acc += unit_root(-r * a, q);
    const double scale = static_cast<double>(totient_of(y)) / static_cast<double>(totient_of(lcm(y, q)));
    return scale * acc;
}

inline cplx gauss_upsilon_closed(i64 a, i64 q, i64 y, i64 b) {
    detail::upsilon_preconditions(a, q, y, b);
    const auto s = detail::split(q, y);
    if (s.g == q) return unit_root(-b * a, q);
    if (s.degenerate) return {0.0, 0.0};
    const double scale = static_cast<double>(totient_of(y)) / static_cast<double>(totient_of(lcm(y, q)));
    return scale * static_cast<double>(mobius_of(s.cofactor)) *
           unit_root(-mod(a * b, s.g) * mod(s.t, s.g), s.g);
}

// Ramanujan height of q with respect to y: 0 when 1 < g < q and gcd(g, q/g) > 1,
// lcm(y, q) / y otherwise.
inline i64 height(i64 q, i64 y) {
    detail::require_positive(q, "height: q");
    detail::require_positive(y, "height: y");
    const i64 g = std::gcd(q, y);
    if (g > 1 && g < q && std::gcd(g, q / g) > 1) return 0;
    return q / g;
}

// Number of rationals a/q in [0,1) of height r, by enumeration over every q <= y*r
// (any q of height r divides lcm(y, q) = y*r), paired with phi(r) * y / gcd(y, r).
inline std::pair<i64, i64> count_height_class(i64 y, i64 r) {
    detail::require_positive(y, "count_height_class: y");
    detail::require_positive(r, "count_height_class: r");
    i64 enumerated = 0;
    for (i64 q = 1; q <= y * r; ++q)
        if (height(q, y) == r) enumerated += totient_of(q);
    return {enumerated, totient_of(r) * y / std::gcd(y, r)};
}

// Closed count that matches the enumeration: every q = g r with g | y
// contributes when gcd(r, y) = 1, and none do otherwise.
inline i64 height_class_size(i64 y, i64 r) {
    detail::require_positive(y, "height_class_size: y");
    detail::require_positive(r, "height_class_size: r");
    return std::gcd(y, r) == 1 ? y * totient_of(r) : 0;
}

// Smallest M for which the average below is in its stated range, i.e. y * Q^t + 1.
inline i64 bourgain_min_length(i64 Q, const Progression& prog, int t) {
    i64 bound = prog.y;
    for (int i = 0; i < t; ++i) {
        if (bound > std::numeric_limits<i64>::max() / Q)
            throw std::overflow_error("bourgain_average: y * Q^t overflows 64 bits");
        bound *= Q;
    }
    return bound + 1;
}

// [ (y/M) * sum over n <= M, n = b mod y of ( sum over q <= Q, gcd(q,y)=1 of |tau_q(n)| )^t ]^(1/t)
inline double bourgain_average(i64 Q, i64 M, const Progression& prog, int t) {
    detail::require_positive(Q, "bourgain_average: Q");
    detail::require_positive(M, "bourgain_average: M");
    if (t < 1) throw std::invalid_argument("bourgain_average: t must be >= 1");
    (void)bourgain_min_length(Q, prog, t);

    std::vector<i64> moduli;
    std::vector<int> mu;
    for (i64 q = 1; q <= Q; ++q) {
        if (std::gcd(q, prog.y) != 1) continue;
        moduli.push_back(q);
        mu.push_back(mobius_of(q));
    }

    // tau_q(n) depends on n only through gcd(n, q); d * mu(q/d) over d | gcd.
    double total = 0.0;
    for (i64 n = prog.first_positive(); n <= M; n += prog.y) {
        double inner = 0.0;
        for (std::size_t i = 0; i < moduli.size(); ++i) {
            const i64 q = moduli[i];
            const i64 g = std::gcd(n, q);
            if (g == 1) {
                inner += static_cast<double>(std::abs(mu[i]));
                continue;
            }
            inner += static_cast<double>(std::llabs(ramanujan_sum_closed(q, g)));
        }
        total += std::pow(inner, t);
    }
    return std::pow(static_cast<double>(prog.y) / static_cast<double>(M) * total, 1.0 / t);
}

// A reduced rational a/q together with its data relative to a progression.
struct FareyPoint {
    i64 a = 0;
    i64 q = 1;
    i64 y = 1;
    i64 b = 0;
    i64 g = 1;    // gcd(y, q)
    i64 ell = 1;  // lcm(y, q)
    i64 height = 1;
    cplx upsilon{1.0, 0.0};

    double center() const { return static_cast<double>(a) / static_cast<double>(q); }
};

inline FareyPoint make_farey_point(i64 a, i64 q, const Progression& prog) {
    detail::require_positive(q, "make_farey_point: q");
    if (a < 0 || a >= q) throw std::invalid_argument("make_farey_point: a must lie in [0, q)");
    detail::require_coprime(a, q, "gcd(a, q) = 1");
    FareyPoint p;
    p.a = a;
    p.q = q;
    p.y = prog.y;
    p.b = prog.b;
    p.g = std::gcd(prog.y, q);
    p.ell = lcm(prog.y, q);
    p.height = height(q, prog.y);
    p.upsilon = p.height == 0 ? cplx{0.0, 0.0} : gauss_upsilon_closed(a, q, prog.y, prog.b);
    return p;
}

}  // namespace primeavg
