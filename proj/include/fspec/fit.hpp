#pragma once

#include "fspec/common.hpp"

#include <span>

namespace fspec {

/// Least-squares slope of y against x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("ols_slope: need two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

/// Number of trailing entries making up the last `fraction` of n, at least min_count.
inline std::size_t window_length(std::size_t n, double fraction, std::size_t min_count = 3) {
    auto w = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    w = std::max(w, min_count);
    return std::min(w, n);
}

}  // namespace fspec
