#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "uiq/errors.hpp"

namespace uiq {

struct FitResult {
    double slope = 0;
    double intercept = 0;  // of log y on log x
    double std_error = 0;  // of the slope; 0 for an exact power law
    double lo = 0, hi = 0;
    std::size_t points = 0;
};

// Least-squares slope of log y against log x over the points with x in [lo, hi].
inline FitResult fit_exponent(const std::vector<std::pair<double, double>>& points, double lo, double hi) {
    std::vector<double> lx, ly;
    for (const auto& [x, y] : points) {
        if (x < lo || x > hi) continue;
        if (!(x > 0) || !(y > 0)) throw RangeError("fit_exponent: points must be positive");
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    const std::size_t n = lx.size();
    if (n < 3) throw RangeError("fit_exponent: " + std::to_string(n) + " points in window, need at least 3");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0)) throw RangeError("fit_exponent: window holds a single abscissa");
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - f.intercept - f.slope * lx[i];
        rss += r * r;
    }
    f.std_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    f.lo = lo;
    f.hi = hi;
    f.points = n;
    return f;
}

} // namespace uiq
