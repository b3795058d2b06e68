#pragma once

// Sieved arithmetic functions (von Mangoldt, Moebius, Euler totient) and
// Chebyshev sums restricted to an arithmetic progression.
//
// Every sum written over "n < x" is strict: n runs over 1 <= n < x.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace primeavg {

using i64 = std::int64_t;

inline constexpr i64 kDefaultMemoryCap = 200'000'000;

// Non-negative residue of a modulo m (m >= 1).
inline i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 lcm(i64 a, i64 b) { return a / std::gcd(a, b) * b; }

// Inverse of a modulo m via extended Euclid; m == 1 yields 0.
inline i64 inverse_mod(i64 a, i64 m) {
    if (m < 1) throw std::invalid_argument("inverse_mod: modulus must be positive");
    if (m == 1) return 0;
    i64 old_r = mod(a, m), r = m;
    i64 old_s = 1, s = 0;
    while (r != 0) {
        i64 quot = old_r / r;
        i64 tmp = old_r - quot * r;
        old_r = r;
        r = tmp;
        tmp = old_s - quot * s;
        old_s = s;
        s = tmp;
    }
    if (old_r != 1)
        throw std::invalid_argument("inverse_mod: " + std::to_string(a) +
                                    " is not invertible mod " + std::to_string(m));
    return mod(old_s, m);
}

struct PrimePower {
    i64 p;
    int k;
};

// Trial-division factorization; intended for the small moduli of the
// exponential-sum code, not for table-scale work.
inline std::vector<PrimePower> factorize(i64 n) {
    if (n < 1) throw std::invalid_argument("factorize: n must be positive");
    std::vector<PrimePower> out;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        int k = 0;
        while (n % p == 0) {
            n /= p;
            ++k;
        }
        out.push_back({p, k});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

inline int mobius_of(i64 n) {
    int sign = 1;
    for (auto [p, k] : factorize(n)) {
        if (k > 1) return 0;
        sign = -sign;
    }
    return sign;
}

inline i64 totient_of(i64 n) {
    i64 phi = n;
    for (auto [p, k] : factorize(n)) phi = phi / p * (p - 1);
    return phi;
}

inline std::vector<i64> divisors(i64 n) {
    if (n < 1) throw std::invalid_argument("divisors: n must be positive");
    std::vector<i64> small, large;
    for (i64 d = 1; d * d <= n; ++d) {
        if (n % d != 0) continue;
        small.push_back(d);
        if (d != n / d) large.push_back(n / d);
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

// The reduced residue system {a in [0,q) : gcd(a,q) = 1}; {0} for q = 1.
inline std::vector<i64> reduced_residues(i64 q) {
    if (q < 1) throw std::invalid_argument("reduced_residues: q must be >= 1");
    if (q == 1) return {0};
    std::vector<i64> out;
    for (i64 a = 1; a < q; ++a)
        if (std::gcd(a, q) == 1) out.push_back(a);
    return out;
}

// The progression {n : n = b mod y} with gcd(b, y) = 1 and 0 <= b < y.
struct Progression {
    i64 y = 1;
    i64 b = 0;

    static Progression make(i64 y, i64 b) {
        if (y < 1) throw std::invalid_argument("Progression: spacing y must be >= 1");
        if (b < 0 || b >= y)
            throw std::invalid_argument("Progression: residue b must lie in [0, y)");
        if (std::gcd(b, y) != 1)
            throw std::invalid_argument("Progression: gcd(b, y) must be 1 (y=" + std::to_string(y) +
                                        ", b=" + std::to_string(b) + ")");
        return Progression{y, b};
    }

    // Smallest positive member of the progression.
    i64 first_positive() const { return b == 0 ? y : b; }

    bool contains(i64 n) const { return mod(n - b, y) == 0; }

    friend bool operator==(const Progression&, const Progression&) = default;
};

// Immutable tables of Lambda, mu, phi and primality on [0, bound], built by
// a single linear (Euler) sieve pass. Index 0 is a placeholder.
class ArithTables {
public:
    static ArithTables build(i64 bound, i64 memory_cap = kDefaultMemoryCap) {
        if (bound < 2) throw std::invalid_argument("ArithTables: bound must be >= 2");
        if (bound + 1 > memory_cap)
            throw std::length_error("ArithTables: bound " + std::to_string(bound) +
                                    " exceeds memory cap " + std::to_string(memory_cap));
        if (bound > static_cast<i64>(UINT32_MAX) - 1)
            throw std::length_error("ArithTables: bound exceeds 32-bit table range");

        ArithTables t;
        t.bound_ = bound;
        const auto size = static_cast<std::size_t>(bound + 1);
        t.lambda_.assign(size, 0.0);
        t.mobius_.assign(size, 0);
        t.totient_.assign(size, 0);
        t.is_prime_.assign(size, 0);

        // least_prime[n] and cofactor[n] = n with every factor least_prime[n] removed.
        std::vector<std::uint32_t> least_prime(size, 0), cofactor(size, 0);
        std::vector<std::uint32_t> primes;
        t.mobius_[1] = 1;
        t.totient_[1] = 1;
        cofactor[1] = 1;
        for (i64 i = 2; i <= bound; ++i) {
            if (least_prime[i] == 0) {
                least_prime[i] = static_cast<std::uint32_t>(i);
                cofactor[i] = 1;
                primes.push_back(static_cast<std::uint32_t>(i));
                t.is_prime_[i] = 1;
                t.mobius_[i] = -1;
                t.totient_[i] = static_cast<std::uint32_t>(i - 1);
            }
            for (std::uint32_t p : primes) {
                const i64 n = i * p;
                if (p > least_prime[i] || n > bound) break;
                least_prime[n] = p;
                if (p == least_prime[i]) {
                    cofactor[n] = cofactor[i];
                    t.mobius_[n] = 0;
                    t.totient_[n] = t.totient_[i] * p;
                } else {
                    cofactor[n] = static_cast<std::uint32_t>(i);
                    t.mobius_[n] = static_cast<std::int8_t>(-t.mobius_[i]);
                    t.totient_[n] = t.totient_[i] * (p - 1);
                }
            }
            if (cofactor[i] == 1) t.lambda_[i] = std::log(static_cast<double>(least_prime[i]));
        }
        return t;
    }

    i64 bound() const { return bound_; }

    double lambda(i64 n) const { return lambda_.at(static_cast<std::size_t>(n)); }
    int mobius(i64 n) const { return mobius_.at(static_cast<std::size_t>(n)); }
    i64 totient(i64 n) const { return totient_.at(static_cast<std::size_t>(n)); }
    bool is_prime(i64 n) const { return is_prime_.at(static_cast<std::size_t>(n)) != 0; }

    std::span<const double> lambda_values() const { return lambda_; }
    std::span<const std::int8_t> mobius_values() const { return mobius_; }
    std::span<const std::uint32_t> totient_values() const { return totient_; }

private:
    ArithTables() = default;

    i64 bound_ = 0;
    std::vector<double> lambda_;
    std::vector<std::int8_t> mobius_;
    std::vector<std::uint32_t> totient_;
    std::vector<std::uint8_t> is_prime_;
};

// Psi(x, y, b) = sum of Lambda(n) over 1 <= n < x with n = b mod y.
inline double psi_progression(const ArithTables& tables, i64 x, const Progression& prog) {
    if (x > tables.bound())
        throw std::out_of_range("psi_progression: x=" + std::to_string(x) + " exceeds table bound " +
                                std::to_string(tables.bound()));
    double sum = 0.0;
    for (i64 n = prog.first_positive(); n < x; n += prog.y) sum += tables.lambda(n);
    return sum;
}

struct SwRow {
    i64 x;
    double psi;
    double main_term;  // x / phi(y)
    double rel_error;  // |psi - x/phi(y)| * phi(y) / x
};

struct SwReport {
    std::vector<SwRow> rows;
    // True when y exceeds (log max x)^J, outside the Siegel-Walfisz range.
    bool outside_range = false;
};

inline SwReport sw_error_report(const ArithTables& tables, std::span<const i64> x_grid,
                                const Progression& prog, int J = 2) {
    if (x_grid.empty()) throw std::invalid_argument("sw_error_report: empty x grid");
    SwReport report;
    i64 x_max = 0;
    const double phi_y = static_cast<double>(totient_of(prog.y));
    for (i64 x : x_grid) {
        if (x < 1) throw std::invalid_argument("sw_error_report: x must be positive");
        x_max = std::max(x_max, x);
        const double psi = psi_progression(tables, x, prog);
        const double main = static_cast<double>(x) / phi_y;
        report.rows.push_back({x, psi, main, std::abs(psi - main) / main});
    }
    report.outside_range =
        static_cast<double>(prog.y) > std::pow(std::log(static_cast<double>(x_max)), J);
    return report;
}

}  // namespace primeavg
