#pragma once

// Finite model of Z as the cyclic group Z_M: real signals, discrete
// transforms (FFTW) and cyclic convolution.
//
// Transform conventions: forward X_k = sum_n x_n e(-nk/M); inverse
// x_n = (1/M) sum_k X_k e(nk/M). Entry k of a spectrum is the multiplier at
// xi = k/M.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace primeavg {

using cplx = std::complex<double>;

namespace detail {

// FFTW planning is not thread-safe; execution on distinct arrays is.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

class FftwPlan {
public:
    explicit FftwPlan(fftw_plan plan) : plan_(plan) {
        if (plan_ == nullptr) throw std::runtime_error("fftw: plan creation failed");
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    ~FftwPlan() {
        std::scoped_lock lock(fftw_plan_mutex());
        fftw_destroy_plan(plan_);
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

inline void require_size(std::size_t n) {
    if (n == 0) throw std::invalid_argument("transform size must be positive");
    if (n > static_cast<std::size_t>(std::numeric_limits<int>::max()))
        throw std::length_error("transform size exceeds FFTW int range");
}

}  // namespace detail

inline bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline std::int64_t next_power_of_two(std::int64_t n) {
    std::int64_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline std::vector<cplx> dft_forward(std::vector<cplx> data) {
    detail::require_size(data.size());
    std::vector<cplx> out(data.size());
    const int n = static_cast<int>(data.size());
    fftw_plan raw;
    {
        std::scoped_lock lock(detail::fftw_plan_mutex());
        raw = fftw_plan_dft_1d(n, detail::as_fftw(data.data()), detail::as_fftw(out.data()), FFTW_FORWARD,
                               FFTW_ESTIMATE);
    }
    detail::FftwPlan(raw).execute();
    return out;
}

inline std::vector<cplx> dft_inverse(std::vector<cplx> spectrum) {
    detail::require_size(spectrum.size());
    std::vector<cplx> out(spectrum.size());
    const int n = static_cast<int>(spectrum.size());
    fftw_plan raw;
    {
        std::scoped_lock lock(detail::fftw_plan_mutex());
        raw = fftw_plan_dft_1d(n, detail::as_fftw(spectrum.data()), detail::as_fftw(out.data()),
                               FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    detail::FftwPlan(raw).execute();
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
    return out;
}

// Half spectrum (M/2 + 1 entries) of a real sequence.
inline std::vector<cplx> rdft_forward(std::span<const double> data) {
    detail::require_size(data.size());
    std::vector<double> in(data.begin(), data.end());
    std::vector<cplx> out(data.size() / 2 + 1);
    const int n = static_cast<int>(data.size());
    fftw_plan raw;
    {
        std::scoped_lock lock(detail::fftw_plan_mutex());
        raw = fftw_plan_dft_r2c_1d(n, in.data(), detail::as_fftw(out.data()), FFTW_ESTIMATE);
    }
    detail::FftwPlan(raw).execute();
    return out;
}

inline std::vector<double> rdft_inverse(std::vector<cplx> half_spectrum, std::size_t n) {
    detail::require_size(n);
    if (half_spectrum.size() != n / 2 + 1) throw std::invalid_argument("rdft_inverse: spectrum size mismatch");
    std::vector<double> out(n);
    fftw_plan raw;
    {
        std::scoped_lock lock(detail::fftw_plan_mutex());
        // c2r destroys its input; half_spectrum is a private copy.
        raw = fftw_plan_dft_c2r_1d(static_cast<int>(n), detail::as_fftw(half_spectrum.data()), out.data(),
                                   FFTW_ESTIMATE);
    }
    detail::FftwPlan(raw).execute();
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= scale;
    return out;
}

// Real signal on Z_M. Index i stands for the integer i when i < M/2 and
// i - M otherwise (the centered window [-M/2, M/2)).
class CyclicSignal {
public:
    CyclicSignal() = default;
    explicit CyclicSignal(std::size_t size) : values_(size, 0.0) {}
    explicit CyclicSignal(std::vector<double> values) : values_(std::move(values)) {}

    static CyclicSignal delta(std::size_t size, std::int64_t at) {
        CyclicSignal s(size);
        s.values_[s.index_of(at)] = 1.0;
        return s;
    }

    static CyclicSignal indicator(std::size_t size, std::span<const std::int64_t> set) {
        CyclicSignal s(size);
        for (auto x : set) s.values_[s.index_of(x)] = 1.0;
        return s;
    }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }

    // Integer represented by slot i.
    std::int64_t position(std::size_t i) const {
        const auto m = static_cast<std::int64_t>(size());
        const auto k = static_cast<std::int64_t>(i);
        return k < m / 2 ? k : k - m;
    }

    std::size_t index_of(std::int64_t x) const {
        const auto m = static_cast<std::int64_t>(size());
        const std::int64_t r = x % m;
        return static_cast<std::size_t>(r < 0 ? r + m : r);
    }

    double value_at(std::int64_t x) const { return values_[index_of(x)]; }

    double norm(double r) const {
        if (std::isinf(r)) return norm_inf();
        if (r <= 0) throw std::invalid_argument("norm: exponent must be positive");
        double acc = 0.0;
        for (double v : values_) acc += std::pow(std::abs(v), r);
        return std::pow(acc, 1.0 / r);
    }

    double norm_inf() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    double sum() const {
        double acc = 0.0;
        for (double v : values_) acc += v;
        return acc;
    }

private:
    std::vector<double> values_;
};

// Convolution by a fixed kernel on Z_M; the kernel transform is computed once.
class CyclicConvolver {
public:
    explicit CyclicConvolver(const CyclicSignal& kernel)
        : size_(kernel.size()), kernel_hat_(rdft_forward(kernel.values())) {}

    std::size_t size() const { return size_; }

    CyclicSignal apply(const CyclicSignal& f) const {
        if (f.size() != size_)
            throw std::invalid_argument("convolve: size mismatch (" + std::to_string(f.size()) + " vs " +
                                        std::to_string(size_) + ")");
        auto f_hat = rdft_forward(f.values());
        for (std::size_t k = 0; k < f_hat.size(); ++k) f_hat[k] *= kernel_hat_[k];
        return CyclicSignal(rdft_inverse(std::move(f_hat), size_));
    }

private:
    std::size_t size_;
    std::vector<cplx> kernel_hat_;
};

// (kernel * f)(x) = sum over z in Z_M of kernel(x - z) f(z).
inline CyclicSignal convolve(const CyclicSignal& kernel, const CyclicSignal& f) {
    if (kernel.size() != f.size())
        throw std::invalid_argument("convolve: size mismatch (" + std::to_string(kernel.size()) + " vs " +
                                    std::to_string(f.size()) + ")");
    return CyclicConvolver(kernel).apply(f);
}

}  // namespace primeavg
