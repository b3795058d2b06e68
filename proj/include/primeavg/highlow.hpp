#pragma once

// High/Low split of the major-arc approximant by Ramanujan height, realized
// on the cyclic group Z_M. Low collects heights in [1, Q), High collects
// heights in [Q, q_cut). Height-zero points have Upsilon = 0 and belong to
// neither part.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "primeavg/arith.hpp"
#include "primeavg/expsums.hpp"
#include "primeavg/multiplier.hpp"
#include "primeavg/families.hpp"
#include "primeavg/signal.hpp"

namespace primeavg {

struct DecompositionConfig {
    i64 N = 4096;
    Progression prog{};
    i64 Q = 2;       // height threshold, a power of two
    i64 M = 16384;   // cyclic embedding size, a power of two
    CutoffSpec cutoff = CutoffSpec::smooth();
    i64 q_cut = 16;  // height ceiling of the approximant

    void validate() const {
        if (N < 2) throw std::invalid_argument("DecompositionConfig: N must be >= 2");
        if (!is_power_of_two(Q)) throw std::invalid_argument("DecompositionConfig: Q must be a power of two");
        require_grid(M);
        if (M < 4 * N) throw std::invalid_argument("DecompositionConfig: need M >= 4N");
        if (Q > q_cut) throw std::invalid_argument("DecompositionConfig: need Q <= q_cut");
    }

    std::vector<std::string> warnings() const {
        std::vector<std::string> out;
        if (!q_cut_in_range(q_cut, N))
            out.push_back("q_cut=" + std::to_string(q_cut) + " exceeds N^(1/10) for N=" + std::to_string(N));
        return out;
    }
};

namespace detail {

inline std::vector<FareyPoint> points_in_heights(const DecompositionConfig& cfg, i64 h_lo, i64 h_hi) {
    std::vector<FareyPoint> out;
    if (h_hi <= h_lo) return out;
    for (auto& p : farey_points(h_hi - 1, cfg.prog, ArcSelection::height))
        if (p.height >= h_lo) out.push_back(p);
    return out;
}

inline CyclicSignal real_inverse(const SpectralProfile& profile, const char* what) {
    const auto inv = dft_inverse(profile.values);
    std::vector<double> re(inv.size());
    double peak = 0.0, imag = 0.0;
    for (std::size_t i = 0; i < inv.size(); ++i) {
        re[i] = inv[i].real();
        peak = std::max(peak, std::abs(inv[i].real()));
        imag = std::max(imag, std::abs(inv[i].imag()));
    }
    if (imag > 1e-9 * std::max(peak, 1.0 / static_cast<double>(inv.size())))
        throw std::logic_error(std::string(what) + ": inverse transform is not real");
    return CyclicSignal(std::move(re));
}

inline void require_subset(std::span<const i64> F, i64 N) {
    if (F.empty()) throw std::invalid_argument("finite set F must be non-empty");
    for (i64 x : F)
        if (x < 0 || x >= N) throw std::invalid_argument("F must lie in [0, N)");
}

}  // namespace detail

inline SpectralProfile lo_hat_profile(const DecompositionConfig& cfg) {
    cfg.validate();
    SpectralProfile profile(cfg.M, cfg.N, cfg.prog);
    accumulate_l_hat(profile, detail::points_in_heights(cfg, 1, cfg.Q), cfg.N, cfg.cutoff);
    return profile;
}

inline SpectralProfile hi_hat_profile(const DecompositionConfig& cfg) {
    cfg.validate();
    SpectralProfile profile(cfg.M, cfg.N, cfg.prog);
    accumulate_l_hat(profile, detail::points_in_heights(cfg, cfg.Q, cfg.q_cut), cfg.N, cfg.cutoff);
    return profile;
}

// The approximant whose split into Hi + Lo is exact: all points of height below q_cut.
inline SpectralProfile decomposed_approximant_profile(const DecompositionConfig& cfg) {
    cfg.validate();
    return approximant_profile(cfg.N, cfg.prog, cfg.q_cut, cfg.cutoff, cfg.M, ArcSelection::height);
}

// Phi_{N,q}: inverse transform of M_{N/l}(l xi) eta(l^2 xi), l = lcm(y, q).
inline CyclicSignal phi_kernel(const DecompositionConfig& cfg, i64 q) {
    cfg.validate();
    if (q < 1) throw std::invalid_argument("phi_kernel: q must be >= 1");
    const i64 ell = lcm(cfg.prog.y, q);
    if (4 * ell * ell > cfg.M)
        throw std::invalid_argument("phi_kernel: l^2 = " + std::to_string(ell * ell) + " exceeds M/4");
    SpectralProfile profile(cfg.M, cfg.N, cfg.prog);
    const double l = static_cast<double>(ell);
    const double length = static_cast<double>(cfg.N) / l;
    for (std::size_t k = 0; k < profile.values.size(); ++k) {
        const double xi = wrap_unit(profile.xi(k));
        const double u = l * l * xi;
        if (std::abs(u) >= cfg.cutoff.outer) continue;
        profile.values[k] = m_hat(l * xi, length) * cfg.cutoff(u);
    }
    return detail::real_inverse(profile, "phi_kernel");
}

inline CyclicSignal lo_kernel_spectral(const DecompositionConfig& cfg) {
    return detail::real_inverse(lo_hat_profile(cfg), "lo_kernel_spectral");
}

inline CyclicSignal hi_kernel_spectral(const DecompositionConfig& cfg) {
    return detail::real_inverse(hi_hat_profile(cfg), "hi_kernel_spectral");
}

// Low kernel in physical space:
//   y 1_{y | x-b} * sum over q' < Q, gcd(q', y) = 1 of Phi_{N,q'}(x) mu(q')/phi(q') tau_{q'}(x),
// with x read in the centered window of Z_M.
inline CyclicSignal lo_kernel_closed(const DecompositionConfig& cfg) {
    cfg.validate();
    CyclicSignal out(static_cast<std::size_t>(cfg.M));
    const i64 y = cfg.prog.y;
    for (i64 qp = 1; qp < cfg.Q; ++qp) {
        if (std::gcd(qp, y) != 1) continue;
        const int mu = mobius_of(qp);
        if (mu == 0) continue;
        const double coeff = static_cast<double>(mu) / static_cast<double>(totient_of(qp));
        const auto phi = phi_kernel(cfg, qp);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const i64 x = out.position(i);
            if (mod(x - cfg.prog.b, y) != 0) continue;
            out[i] += phi[i] * coeff * static_cast<double>(ramanujan_sum_closed(qp, x));
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= static_cast<double>(y);
    return out;
}

// Smallest C with |Phi_{N,q}(x)| <= C (1/N) (1 + |x|/N)^{-3} for every q in the list.
inline double phi_envelope_constant(const DecompositionConfig& cfg, std::span<const i64> qs) {
    double C = 0.0;
    const double N = static_cast<double>(cfg.N);
    for (i64 q : qs) {
        const auto k = phi_kernel(cfg, q);
        for (std::size_t i = 0; i < k.size(); ++i) {
            const double x = std::abs(static_cast<double>(k.position(i)));
            C = std::max(C, std::abs(k[i]) * N * std::pow(1.0 + x / N, 3));
        }
    }
    return C;
}

// Upper envelope of |Lo(x)|: y 1_{y|x-b} sum_{q'<Q,(q',y)=1} |tau_{q'}(x)|/phi(q') * |Phi_{N,1}|-type
// envelope supplied by the caller (one value per slot).
inline CyclicSignal lo_envelope(const DecompositionConfig& cfg, const CyclicSignal& eta_envelope) {
    cfg.validate();
    if (eta_envelope.size() != static_cast<std::size_t>(cfg.M))
        throw std::invalid_argument("lo_envelope: envelope size mismatch");
    CyclicSignal out(static_cast<std::size_t>(cfg.M));
    const i64 y = cfg.prog.y;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const i64 x = out.position(i);
        if (mod(x - cfg.prog.b, y) != 0) continue;
        double s = 0.0;
        for (i64 qp = 1; qp < cfg.Q; ++qp) {
            if (std::gcd(qp, y) != 1) continue;
            s += static_cast<double>(std::llabs(ramanujan_sum_closed(qp, x))) / static_cast<double>(totient_of(qp));
        }
        out[i] = static_cast<double>(y) * s * eta_envelope[i];
    }
    return out;
}

// ||Hi * 1_F||_2 / |F|^{1/2}.
inline double hi_l2_ratio(const CyclicSignal& hi_kernel, i64 N, std::span<const i64> F) {
    detail::require_subset(F, N);
    const auto conv = convolve(hi_kernel, CyclicSignal::indicator(hi_kernel.size(), F));
    return conv.norm(2.0) / std::sqrt(static_cast<double>(F.size()));
}

inline double hi_l2_ratio(const DecompositionConfig& cfg, std::span<const i64> F) {
    return hi_l2_ratio(hi_kernel_spectral(cfg), cfg.N, F);
}

// ||Lo * 1_F||_inf / ((y/N)^{1/r} |F|^{1/r}).
inline double lo_linf_ratio(const CyclicSignal& lo_kernel, i64 N, const Progression& prog, std::span<const i64> F,
                            double r) {
    if (!(r > 1.0 && r < 2.0)) throw std::invalid_argument("lo_linf_ratio: r must lie in (1, 2)");
    detail::require_subset(F, N);
    const auto conv = convolve(lo_kernel, CyclicSignal::indicator(lo_kernel.size(), F));
    const double scale = std::pow(static_cast<double>(prog.y) / static_cast<double>(N) *
                                      static_cast<double>(F.size()),
                                  1.0 / r);
    return conv.norm_inf() / scale;
}

inline double lo_linf_ratio(const DecompositionConfig& cfg, std::span<const i64> F, double r) {
    return lo_linf_ratio(lo_kernel_spectral(cfg), cfg.N, cfg.prog, F, r);
}

struct MaximalRatios {
    double hi_max_ratio = 0.0;  // ||sup_N |Hi_N * f| ||_2 / ||f||_2
    double lo_max_ratio = 0.0;  // ||sup_N |Lo_N * f| ||_r / ||f||_r
};

// Pointwise suprema over a family of scales sharing one cyclic size M.
inline MaximalRatios maximal_ratios(std::span<const DecompositionConfig> family, const CyclicSignal& f, double r,
                                    i64 n_floor = 0) {
    if (family.empty()) throw std::invalid_argument("maximal_ratios: empty family of scales");
    if (!(r > 1.0)) throw std::invalid_argument("maximal_ratios: r must exceed 1");
    const auto M = static_cast<std::size_t>(family.front().M);
    if (f.size() != M) throw std::invalid_argument("maximal_ratios: signal size differs from M");
    std::vector<double> hi_sup(M, 0.0), lo_sup(M, 0.0);
    for (const auto& cfg : family) {
        if (static_cast<std::size_t>(cfg.M) != M) throw std::invalid_argument("maximal_ratios: mixed M");
        if (!is_power_of_two(cfg.N)) throw std::invalid_argument("maximal_ratios: scales must be dyadic");
        if (cfg.N <= n_floor) throw std::invalid_argument("maximal_ratios: scale below the configured floor");
        const auto hi = convolve(hi_kernel_spectral(cfg), f);
        const auto lo = convolve(lo_kernel_spectral(cfg), f);
        for (std::size_t i = 0; i < M; ++i) {
            hi_sup[i] = std::max(hi_sup[i], std::abs(hi[i]));
            lo_sup[i] = std::max(lo_sup[i], std::abs(lo[i]));
        }
    }
    MaximalRatios out;
    out.hi_max_ratio = CyclicSignal(std::move(hi_sup)).norm(2.0) / f.norm(2.0);
    out.lo_max_ratio = CyclicSignal(std::move(lo_sup)).norm(r) / f.norm(r);
    return out;
}

// Maximal function over dyadic scales 2^n of the multiplier
// sum_j eta(2^n (theta - j/D)) for the J rationals j/D, j = 0..J-1:
// returns || sup_n |T_n f| ||_2 / ||f||_2.
inline double common_denominator_maximal(i64 D, i64 J, std::span<const int> scales, const CyclicSignal& f,
                                         const CutoffSpec& cutoff = CutoffSpec::smooth()) {
    if (D < 1 || J < 1 || J > D) throw std::invalid_argument("common_denominator_maximal: need 1 <= J <= D");
    if (scales.empty()) throw std::invalid_argument("common_denominator_maximal: no scales");
    const auto M = static_cast<i64>(f.size());
    require_grid(M);
    const double log_d = std::log2(static_cast<double>(D));
    const auto f_hat = dft_forward(std::vector<cplx>(f.values().begin(), f.values().end()));
    std::vector<double> sup(static_cast<std::size_t>(M), 0.0);
    for (int n : scales) {
        if (static_cast<double>(n) <= 2.0 * log_d)
            throw std::invalid_argument("common_denominator_maximal: scale 2^n must exceed D^2");
        const double s = std::ldexp(1.0, n);
        std::vector<cplx> spec(f_hat.size());
        for (std::size_t k = 0; k < spec.size(); ++k) {
            const double xi = static_cast<double>(k) / static_cast<double>(M);
            double mult = 0.0;
            for (i64 j = 0; j < J; ++j) {
                const double u = s * wrap_unit(xi - static_cast<double>(j) / static_cast<double>(D));
                if (std::abs(u) < cutoff.outer) mult += cutoff(u);
            }
            spec[k] = f_hat[k] * mult;
        }
        const auto out = dft_inverse(std::move(spec));
        for (std::size_t i = 0; i < sup.size(); ++i) sup[i] = std::max(sup[i], std::abs(out[i]));
    }
    return CyclicSignal(std::move(sup)).norm(2.0) / f.norm(2.0);
}

// Test sets for the High part: multiples of d for d = 1..max_spacing, whose
// spectra sit on the rationals j/d, followed by the standard families.
inline std::vector<SetFamily> hi_test_families(i64 N, const Progression& prog, std::uint64_t seed,
                                               i64 max_spacing = 32) {
    std::vector<SetFamily> out;
    for (i64 d = 1; d <= max_spacing; ++d) {
        SetFamily fam{"multiples_of_" + std::to_string(d), {}};
        for (i64 n = 0; n < N; n += d) fam.elements.push_back(n);
        out.push_back(std::move(fam));
    }
    for (auto& fam : standard_families(N, prog, seed, FamilyOptions{})) out.push_back(std::move(fam));
    return out;
}

struct FamilyMax {
    double value = 0.0;
    std::string family;
};

inline FamilyMax hi_l2_family_max(const DecompositionConfig& cfg, std::uint64_t seed, i64 max_spacing = 32) {
    const auto kernel = hi_kernel_spectral(cfg);
    FamilyMax best;
    for (const auto& fam : hi_test_families(cfg.N, cfg.prog, seed, max_spacing)) {
        const double v = hi_l2_ratio(kernel, cfg.N, fam.elements);
        if (v > best.value) best = {v, fam.name};
    }
    return best;
}

}  // namespace primeavg
