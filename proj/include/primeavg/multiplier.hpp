#pragma once

// Fourier multipliers on the torus: the prime average A_{N,y,b}, the plain
// and progression averages M_N and M_{N,y,b}, the major-arc terms L^{a,q},
// their sum over Farey points, and the approximation error between them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "primeavg/arith.hpp"
#include "primeavg/expsums.hpp"
#include "primeavg/signal.hpp"

namespace primeavg {

inline constexpr i64 kMaxGridSize = i64{1} << 26;

// Representative of x modulo 1 in [-1/2, 1/2).
inline double wrap_unit(double x) {
    const double r = x - std::floor(x + 0.5);
    return r >= 0.5 ? r - 1.0 : r;
}

// Distance from x to the nearest integer.
inline double dist_to_int(double x) { return std::abs(wrap_unit(x)); }

// Values of a multiplier on the grid xi = k/M, k = 0..M-1.
struct SpectralProfile {
    i64 M = 0;
    std::vector<cplx> values;
    i64 N = 0;
    i64 y = 1;
    i64 b = 0;

    SpectralProfile() = default;
    SpectralProfile(i64 grid, i64 n, const Progression& prog)
        : M(grid), values(static_cast<std::size_t>(grid)), N(n), y(prog.y), b(prog.b) {}

    double xi(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(M); }

    double sup_abs() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

inline void require_grid(i64 M) {
    if (!is_power_of_two(M)) throw std::invalid_argument("grid size M must be a power of two");
    if (M > kMaxGridSize)
        throw std::length_error("grid size M=" + std::to_string(M) + " exceeds limit " + std::to_string(kMaxGridSize));
}

// Smooth step: 0 for t <= 0, 1 for t >= 1, infinitely differentiable.
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double f0 = std::exp(-1.0 / t);
    const double f1 = std::exp(-1.0 / (1.0 - t));
    return f0 / (f0 + f1);
}

// Even cutoff eta with 1 on [-inner, inner] and 0 outside (-outer, outer).
struct CutoffSpec {
    std::string name;
    double inner = 1.0 / 16.0;
    double outer = 1.0 / 4.0;
    std::function<double(double)> evaluator;

    double operator()(double u) const { return evaluator(u); }

    static CutoffSpec smooth(double inner = 1.0 / 16.0, double outer = 1.0 / 4.0) {
        if (!(0.0 < inner && inner < outer)) throw std::invalid_argument("CutoffSpec: need 0 < inner < outer");
        CutoffSpec c;
        c.name = "smooth";
        c.inner = inner;
        c.outer = outer;
        c.evaluator = [inner, outer](double u) {
            return 1.0 - smooth_step((std::abs(u) - inner) / (outer - inner));
        };
        return c;
    }

    // eta == 1; no frequency localization. Diagnostic use only.
    static CutoffSpec identity() {
        CutoffSpec c;
        c.name = "identity";
        c.inner = std::numeric_limits<double>::infinity();
        c.outer = std::numeric_limits<double>::infinity();
        c.evaluator = [](double) { return 1.0; };
        return c;
    }

    static CutoffSpec by_name(const std::string& name) {
        if (name == "smooth") return smooth();
        if (name == "identity") return identity();
        throw std::invalid_argument("unknown cutoff '" + name + "'");
    }
};

// Average of length L >= 1: (1/L) * sum over integers 0 <= n < L of e(-n theta).
inline cplx m_hat(double theta, double length) {
    if (!(length >= 1.0)) throw std::invalid_argument("m_hat: length must be >= 1");
    const double count = std::ceil(length);
    const double t = wrap_unit(theta);
    const double s = std::sin(std::numbers::pi * t);
    if (s == 0.0) return {count / length, 0.0};
    const double ratio = std::sin(std::numbers::pi * count * t) / (length * s);
    return ratio * std::polar(1.0, -std::numbers::pi * (count - 1.0) * t);
}

// (y/N) * sum over 0 <= n < N, n = b mod y of e(-n theta), by direct summation.
inline cplx m_prog_hat(double theta, i64 N, const Progression& prog) {
    if (N < prog.y) throw std::invalid_argument("m_prog_hat: need N >= y");
    cplx acc{0.0, 0.0};
    const double t = wrap_unit(theta);
    for (i64 n = prog.b; n < N; n += prog.y)
        acc += std::polar(1.0, -2.0 * std::numbers::pi * wrap_unit(static_cast<double>(n) * t));
    return static_cast<double>(prog.y) / static_cast<double>(N) * acc;
}

// Largest |m_prog_hat(theta) - m_hat(y theta, (N - b)/y)| / (b |theta|) over
// `samples` equally spaced theta in [1/N, 1/2]; 0 when b = 0.
inline double mm_constant(i64 N, const Progression& prog, i64 samples = 2048) {
    if (N - prog.b < prog.y) throw std::invalid_argument("mm_constant: need N - b >= y");
    if (samples < 2) throw std::invalid_argument("mm_constant: need at least two samples");
    if (prog.b == 0) return 0.0;
    const double lo = 1.0 / static_cast<double>(N);
    const double length = static_cast<double>(N - prog.b) / static_cast<double>(prog.y);
    double worst = 0.0;
    for (i64 s = 0; s < samples; ++s) {
        const double theta = lo + (0.5 - lo) * static_cast<double>(s) / static_cast<double>(samples - 1);
        const double diff = std::abs(m_prog_hat(theta, N, prog) - m_hat(static_cast<double>(prog.y) * theta, length));
        worst = std::max(worst, diff / (static_cast<double>(prog.b) * theta));
    }
    return worst;
}

namespace detail {

struct WeightedTerm {
    i64 n;
    double w;
};

// Nonzero terms of the kernel (phi(y)/N) Lambda(n) 1_{n = b mod y}, n < N.
inline std::vector<WeightedTerm> prime_kernel_terms(const ArithTables& tables, i64 N, const Progression& prog) {
    if (N < 2) throw std::invalid_argument("prime kernel: N must be >= 2");
    if (N - 1 > tables.bound())
        throw std::out_of_range("prime kernel: N=" + std::to_string(N) + " exceeds table bound " +
                                std::to_string(tables.bound()));
    const double scale = static_cast<double>(totient_of(prog.y)) / static_cast<double>(N);
    std::vector<WeightedTerm> terms;
    for (i64 n = prog.first_positive(); n < N; n += prog.y) {
        const double lam = tables.lambda(n);
        if (lam != 0.0) terms.push_back({n, scale * lam});
    }
    return terms;
}

}  // namespace detail

// (phi(y)/N) * sum over n < N, n = b mod y of Lambda(n) e(-n theta), direct.
inline cplx a_hat(const ArithTables& tables, double theta, i64 N, const Progression& prog) {
    const double t = wrap_unit(theta);
    cplx acc{0.0, 0.0};
    for (auto [n, w] : detail::prime_kernel_terms(tables, N, prog))
        acc += w * std::polar(1.0, -2.0 * std::numbers::pi * wrap_unit(static_cast<double>(n) * t));
    return acc;
}

// a_hat on the whole grid k/M via one length-M transform of the zero-padded kernel.
inline SpectralProfile a_hat_profile(const ArithTables& tables, i64 N, const Progression& prog, i64 M) {
    require_grid(M);
    if (M < N) throw std::invalid_argument("a_hat_profile: grid size M must be >= N");
    std::vector<cplx> kernel(static_cast<std::size_t>(M));
    for (auto [n, w] : detail::prime_kernel_terms(tables, N, prog)) kernel[static_cast<std::size_t>(n)] = w;
    SpectralProfile profile(M, N, prog);
    profile.values = dft_forward(std::move(kernel));
    return profile;
}

// a_hat at theta_j = center + j / (oversample * N) for j = -half_steps..half_steps
// (entry j + half_steps). Uses oversample length-N transforms of modulated
// kernels when that is cheaper than direct summation.
inline std::vector<cplx> a_hat_local(const ArithTables& tables, i64 N, const Progression& prog, double center,
                                     i64 half_steps, i64 oversample) {
    if (half_steps < 0 || oversample < 1) throw std::invalid_argument("a_hat_local: bad grid");
    const auto terms = detail::prime_kernel_terms(tables, N, prog);
    const auto count = static_cast<std::size_t>(2 * half_steps + 1);
    std::vector<cplx> out(count);
    const double step = 1.0 / (static_cast<double>(oversample) * static_cast<double>(N));

    const double direct_cost = static_cast<double>(count) * static_cast<double>(terms.size());
    const double fft_cost = 5.0 * static_cast<double>(oversample) * static_cast<double>(N) *
                            std::log2(static_cast<double>(N));
    if (direct_cost <= fft_cost) {
        for (std::size_t idx = 0; idx < count; ++idx) {
            const double theta = center + static_cast<double>(static_cast<i64>(idx) - half_steps) * step;
            const double t = wrap_unit(theta);
            cplx acc{0.0, 0.0};
            for (auto [n, w] : terms)
                acc += w * std::polar(1.0, -2.0 * std::numbers::pi * wrap_unit(static_cast<double>(n) * t));
            out[idx] = acc;
        }
        return out;
    }

    // theta_j with j = k * oversample + s: sum_n [w_n e(-n(center + s*step))] e(-n k / N).
    for (i64 s = 0; s < oversample; ++s) {
        std::vector<cplx> modulated(static_cast<std::size_t>(N));
        const double shift = wrap_unit(center + static_cast<double>(s) * step);
        for (auto [n, w] : terms)
            modulated[static_cast<std::size_t>(n)] =
                w * std::polar(1.0, -2.0 * std::numbers::pi * wrap_unit(static_cast<double>(n) * shift));
        const auto spectrum = dft_forward(std::move(modulated));
        for (i64 j = -half_steps; j <= half_steps; ++j) {
            if (mod(j, oversample) != s) continue;
            const i64 k = (j - s) / oversample;
            out[static_cast<std::size_t>(j + half_steps)] = spectrum[static_cast<std::size_t>(mod(k, N))];
        }
    }
    return out;
}

enum class ArcSelection {
    denominator,  // q <= bound
    height,       // 1 <= h_y(q) <= bound
};

inline ArcSelection arc_selection_from(const std::string& name) {
    if (name == "denominator") return ArcSelection::denominator;
    if (name == "height") return ArcSelection::height;
    throw std::invalid_argument("unknown arc selection '" + name + "'");
}

// Reduced a/q in [0,1) with q <= bound (denominator mode) or with
// 1 <= h_y(q) <= bound (height mode), ordered by (q, a).
inline std::vector<FareyPoint> farey_points(i64 bound, const Progression& prog, ArcSelection mode) {
    if (bound < 1) throw std::invalid_argument("farey_points: bound must be >= 1");
    std::vector<FareyPoint> points;
    // A point of height h has q <= lcm(y, q) = y h.
    const i64 q_max = mode == ArcSelection::denominator ? bound : prog.y * bound;
    for (i64 q = 1; q <= q_max; ++q) {
        if (mode == ArcSelection::height) {
            const i64 h = height(q, prog.y);
            if (h < 1 || h > bound) continue;
        }
        for (i64 a : reduced_residues(q)) points.push_back(make_farey_point(a, q, prog));
    }
    return points;
}

// Points entering the approximant with ceiling q_cut: q < q_cut, or 1 <= h < q_cut.
inline std::vector<FareyPoint> approximant_points(i64 q_cut, const Progression& prog, ArcSelection mode) {
    if (q_cut <= 1) return {};
    return farey_points(q_cut - 1, prog, mode);
}

inline void require_same_progression(const FareyPoint& point, const Progression& prog) {
    if (point.y != prog.y || point.b != prog.b)
        throw std::invalid_argument("Farey point was built for a different progression");
}

// Upsilon * M_{N/l}(l (xi - a/q)) * eta(l^2 (xi - a/q)).
inline cplx l_hat(double xi, const FareyPoint& point, i64 N, const Progression& prog, const CutoffSpec& cutoff) {
    require_same_progression(point, prog);
    if (point.height == 0) return {0.0, 0.0};
    const double delta = wrap_unit(xi - point.center());
    const double ell = static_cast<double>(point.ell);
    const double u = ell * ell * delta;
    if (std::abs(u) >= cutoff.outer) return {0.0, 0.0};
    return point.upsilon * m_hat(ell * delta, static_cast<double>(N) / ell) * cutoff(u);
}

// Adds every point's l_hat term to the profile, touching only grid points in
// the cutoff support.
inline void accumulate_l_hat(SpectralProfile& profile, const std::vector<FareyPoint>& points, i64 N,
                             const CutoffSpec& cutoff) {
    const double M = static_cast<double>(profile.M);
    for (const auto& p : points) {
        if (p.height == 0) continue;
        const double ell = static_cast<double>(p.ell);
        const double c = p.center();
        i64 k_lo = 0, k_hi = profile.M - 1;
        double base = 0.0;
        if (std::isfinite(cutoff.outer)) {
            const double radius = cutoff.outer / (ell * ell);
            k_lo = static_cast<i64>(std::ceil((c - radius) * M));
            k_hi = static_cast<i64>(std::floor((c + radius) * M));
            base = c;
        }
        for (i64 k = k_lo; k <= k_hi; ++k) {
            const double delta = std::isfinite(cutoff.outer) ? static_cast<double>(k) / M - base
                                                             : wrap_unit(static_cast<double>(k) / M - c);
            const double u = ell * ell * delta;
            if (std::abs(u) >= cutoff.outer) continue;
            profile.values[static_cast<std::size_t>(mod(k, profile.M))] +=
                p.upsilon * m_hat(ell * delta, static_cast<double>(N) / ell) * cutoff(u);
        }
    }
}

inline cplx approximant_hat(double xi, i64 N, const Progression& prog, i64 q_cut, const CutoffSpec& cutoff,
                            ArcSelection mode = ArcSelection::denominator) {
    cplx acc{0.0, 0.0};
    for (const auto& p : approximant_points(q_cut, prog, mode)) acc += l_hat(xi, p, N, prog, cutoff);
    return acc;
}

inline SpectralProfile approximant_profile(i64 N, const Progression& prog, i64 q_cut, const CutoffSpec& cutoff,
                                           i64 M, ArcSelection mode = ArcSelection::denominator) {
    require_grid(M);
    SpectralProfile profile(M, N, prog);
    accumulate_l_hat(profile, approximant_points(q_cut, prog, mode), N, cutoff);
    return profile;
}

// True when q_cut respects the ceiling q < N^{1/10} of the approximation.
inline bool q_cut_in_range(i64 q_cut, i64 N) {
    return static_cast<double>(q_cut) <= std::pow(static_cast<double>(N), 0.1);
}

// Number of grid steps of size 1/(oversample N) strictly inside |theta| < (log N)^J / N.
inline i64 arc_half_steps(i64 N, int J, i64 oversample) {
    const double extent = std::pow(std::log(static_cast<double>(N)), J) * static_cast<double>(oversample);
    auto steps = static_cast<i64>(std::floor(extent));
    if (static_cast<double>(steps) >= extent) --steps;
    return std::max<i64>(steps, 0);
}

// sup over |theta| < (log N)^J / N of |a_hat(theta) - M_{N/y}(y theta)|, on a grid
// with `oversample` points per unit of 1/N.
inline double near_zero_error(const ArithTables& tables, i64 N, const Progression& prog, int J,
                              i64 oversample = 64) {
    if (oversample < 64) throw std::invalid_argument("near_zero_error: need >= 64 grid points per 1/N");
    const i64 half = arc_half_steps(N, J, oversample);
    const auto values = a_hat_local(tables, N, prog, 0.0, half, oversample);
    const double step = 1.0 / (static_cast<double>(oversample) * static_cast<double>(N));
    const double y = static_cast<double>(prog.y);
    double sup = 0.0;
    for (i64 j = -half; j <= half; ++j) {
        const double theta = static_cast<double>(j) * step;
        const cplx model = m_hat(y * theta, static_cast<double>(N) / y);
        sup = std::max(sup, std::abs(values[static_cast<std::size_t>(j + half)] - model));
    }
    return sup;
}

// sup over |xi - a/q| < (log N)^J / N of |a_hat(xi) - Upsilon M_{N/l}(l (xi - a/q))|.
inline double major_arc_error(const ArithTables& tables, i64 N, const Progression& prog, const FareyPoint& point,
                              int J, i64 oversample = 64) {
    require_same_progression(point, prog);
    const i64 half = arc_half_steps(N, J, oversample);
    const auto values = a_hat_local(tables, N, prog, point.center(), half, oversample);
    const double step = 1.0 / (static_cast<double>(oversample) * static_cast<double>(N));
    const double ell = static_cast<double>(point.ell);
    double sup = 0.0;
    for (i64 j = -half; j <= half; ++j) {
        const double delta = static_cast<double>(j) * step;
        const cplx model = point.upsilon * m_hat(ell * delta, static_cast<double>(N) / ell);
        sup = std::max(sup, std::abs(values[static_cast<std::size_t>(j + half)] - model));
    }
    return sup;
}

struct ApproxError {
    double sup_error = 0.0;
    SpectralProfile residual;
};

// Residual a_hat - approximant_hat on the grid k/M.
inline ApproxError approx_error_profile(const ArithTables& tables, i64 N, const Progression& prog, i64 q_cut,
                                        const CutoffSpec& cutoff, i64 M,
                                        ArcSelection mode = ArcSelection::denominator) {
    require_grid(M);
    ApproxError out;
    out.residual = a_hat_profile(tables, N, prog, M);
    auto approx = approximant_profile(N, prog, q_cut, cutoff, M, mode);
    for (std::size_t k = 0; k < out.residual.values.size(); ++k) out.residual.values[k] -= approx.values[k];
    out.sup_error = out.residual.sup_abs();
    return out;
}

}  // namespace primeavg
