#pragma once

// Naive reference implementations used as test oracles. Nothing here calls
// into the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracle {

using i64 = std::int64_t;
using cplx = std::complex<double>;

inline double von_mangoldt(i64 n) {
    if (n < 2) return 0.0;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        i64 m = n;
        while (m % p == 0) m /= p;
        return m == 1 ? std::log(static_cast<double>(p)) : 0.0;
    }
    return std::log(static_cast<double>(n));
}

inline int mobius(i64 n) {
    int sign = 1;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        n /= p;
        if (n % p == 0) return 0;
        sign = -sign;
    }
    return n > 1 ? -sign : sign;
}

inline i64 totient(i64 n) {
    i64 count = 0;
    for (i64 a = 1; a <= n; ++a)
        if (std::gcd(a, n) == 1) ++count;
    return count;
}

inline cplx e(double x) { return std::polar(1.0, 2.0 * std::numbers::pi * x); }

inline double psi(i64 x, i64 y, i64 b) {
    double s = 0.0;
    for (i64 n = 1; n < x; ++n)
        if ((n - b) % y == 0) s += von_mangoldt(n);
    return s;
}

// X_k = sum_n x_n e(-nk/M).
inline std::vector<cplx> dft(const std::vector<cplx>& x) {
    const std::size_t M = x.size();
    std::vector<cplx> out(M);
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t n = 0; n < M; ++n)
            out[k] += x[n] * e(-static_cast<double>((n * k) % M) / static_cast<double>(M));
    return out;
}

// (k * f)(x) = sum_z k(x - z) f(z) on Z_M.
inline std::vector<double> cyclic_convolution(const std::vector<double>& k, const std::vector<double>& f) {
    const std::size_t M = k.size();
    std::vector<double> out(M, 0.0);
    for (std::size_t z = 0; z < M; ++z) {
        if (f[z] == 0.0) continue;
        for (std::size_t x = 0; x < M; ++x) out[x] += k[(x + M - z) % M] * f[z];
    }
    return out;
}

// (phi(y)/N) sum_{1 <= n < N, n = b mod y} Lambda(n) e(-n theta).
inline cplx prime_multiplier(double theta, i64 N, i64 y, i64 b) {
    cplx acc{0.0, 0.0};
    for (i64 n = 1; n < N; ++n)
        if ((n - b) % y == 0) acc += von_mangoldt(n) * e(-static_cast<double>(n) * theta);
    return static_cast<double>(totient(y)) / static_cast<double>(N) * acc;
}

}  // namespace oracle
