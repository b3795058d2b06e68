#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace primeavg {

// Least-squares slope of log(value) against log(scale).
inline double loglog_slope(std::span<const double> scales, std::span<const double> values) {
    if (scales.size() != values.size() || scales.size() < 2)
        throw std::invalid_argument("loglog_slope: need two or more paired points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(scales.size());
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] > 0.0 && values[i] > 0.0)) throw std::invalid_argument("loglog_slope: non-positive point");
        mx += std::log(scales[i]) / n;
        my += std::log(values[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const double dx = std::log(scales[i]) - mx;
        sxy += dx * (std::log(values[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_slope: scales are all equal");
    return sxy / sxx;
}

}  // namespace primeavg
