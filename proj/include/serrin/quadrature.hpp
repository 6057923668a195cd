#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>

namespace serrin::quad {

/// Adaptive 15-point Gauss-Kronrod on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b) {
    if (a == b) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 12, 1e-13,
                                                                         &err);
}

/// Integrates on [a, b] after splitting at a geometric sequence of breakpoints, which keeps
/// the adaptive rule accurate for integrands that vary on the scale of the abscissa.
inline double integrate_geometric(const std::function<double(double)>& f, double a, double b,
                                  double ratio = 2.0) {
    if (a == b) return 0.0;
    if (b < a) return -integrate_geometric(f, b, a, ratio);
    double sum = 0.0;
    double lo = a;
    while (lo < b) {
        double hi = lo > 0.0 ? std::min(b, lo * ratio) : std::min(b, 1.0);
        if (hi - lo < 1e-300) hi = b;
        sum += integrate(f, lo, hi);
        lo = hi;
    }
    return sum;
}

/// Single non-adaptive Gauss-Kronrod 15 panel.
inline double panel(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0);
}

}  // namespace serrin::quad
