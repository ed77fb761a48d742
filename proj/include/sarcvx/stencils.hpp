#pragma once

#include <cstddef>
#include <vector>

#include "sarcvx/errors.hpp"

namespace sarcvx {

// Second-order first derivative: centered inside, one-sided at the ends.
inline std::vector<double> deriv1(const std::vector<double>& f, double h) {
    size_t n = f.size();
    if (n < 3) throw SolverError("deriv1: need at least 3 samples");
    std::vector<double> d(n);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return d;
}

// Second-order second derivative with one-sided closures.
inline std::vector<double> deriv2(const std::vector<double>& f, double h) {
    size_t n = f.size();
    if (n < 4) throw SolverError("deriv2: need at least 4 samples");
    std::vector<double> d(n);
    double h2 = h * h;
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    return d;
}

// Fourth-order first derivative (5-point interior, second-order closures).
inline std::vector<double> deriv1_o4(const std::vector<double>& f, double h) {
    size_t n = f.size();
    if (n < 5) return deriv1(f, h);
    std::vector<double> d = deriv1(f, h);
    for (size_t i = 2; i + 2 < n; ++i)
        d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    return d;
}

// Fourth-order second derivative (5-point interior, second-order closures).
inline std::vector<double> deriv2_o4(const std::vector<double>& f, double h) {
    size_t n = f.size();
    if (n < 5) return deriv2(f, h);
    std::vector<double> d = deriv2(f, h);
    for (size_t i = 2; i + 2 < n; ++i)
        d[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) /
               (12.0 * h * h);
    return d;
}

// 5-point moving average with shrinking windows at the ends.
inline std::vector<double> moving_average5(const std::vector<double>& f) {
    size_t n = f.size();
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        size_t a = i >= 2 ? i - 2 : 0;
        size_t b = i + 2 < n ? i + 2 : n - 1;
        double s = 0.0;
        for (size_t k = a; k <= b; ++k) s += f[k];
        out[i] = s / static_cast<double>(b - a + 1);
    }
    return out;
}

// Linear interpolation of samples f on the uniform grid x0 + i*h; clamps
// outside the grid.
inline double lerp_uniform(const std::vector<double>& f, double x0, double h, double x) {
    if (f.empty()) return 0.0;
    double s = (x - x0) / h;
    if (s <= 0.0) return f.front();
    if (s >= static_cast<double>(f.size() - 1)) return f.back();
    size_t i = static_cast<size_t>(s);
    double w = s - static_cast<double>(i);
    return f[i] * (1.0 - w) + f[i + 1] * w;
}

// Cumulative trapezoid integral starting at 0.
inline std::vector<double> cumtrapz(const std::vector<double>& f, double h) {
    std::vector<double> out(f.size(), 0.0);
    for (size_t i = 1; i < f.size(); ++i)
        out[i] = out[i - 1] + 0.5 * h * (f[i] + f[i - 1]);
    return out;
}

// Fourth-order cumulative integral: per-cell Simpson with a cubic-interpolated
// midpoint.
inline std::vector<double> cumint4(const std::vector<double>& f, double h) {
    size_t n = f.size();
    if (n < 4) return cumtrapz(f, h);
    std::vector<double> out(n, 0.0);
    for (size_t i = 0; i + 1 < n; ++i) {
        double mid;
        if (i == 0)
            mid = (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0;
        else if (i + 2 >= n)
            mid = (f[n - 4] - 5.0 * f[n - 3] + 15.0 * f[n - 2] + 5.0 * f[n - 1]) / 16.0;
        else
            mid = (-f[i - 1] + 9.0 * f[i] + 9.0 * f[i + 1] - f[i + 2]) / 16.0;
        out[i + 1] = out[i] + h / 6.0 * (f[i] + 4.0 * mid + f[i + 1]);
    }
    return out;
}

// Cubic Lagrange interpolation on a uniform grid; degrades to linear at the
// ends, clamps outside.
inline double interp_cubic_uniform(const std::vector<double>& f, double x0, double h, double x) {
    size_t n = f.size();
    if (n < 4) return lerp_uniform(f, x0, h, x);
    double s = (x - x0) / h;
    if (s <= 0.0) return f.front();
    if (s >= static_cast<double>(n - 1)) return f.back();
    size_t i = static_cast<size_t>(s);
    if (i == 0 || i + 2 >= n) return lerp_uniform(f, x0, h, x);
    double t = s - static_cast<double>(i);
    double fm = f[i - 1], f0 = f[i], f1 = f[i + 1], f2 = f[i + 2];
    return f0 + t * ((-2.0 * fm - 3.0 * f0 + 6.0 * f1 - f2) / 6.0 +
                     t * ((fm - 2.0 * f0 + f1) / 2.0 +
                          t * ((f2 - fm) / 6.0 + (f0 - f1) / 2.0)));
}

}  // namespace sarcvx
