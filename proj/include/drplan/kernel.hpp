#pragma once

// Keys cubic convolution kernel and its analytic derivative.

#include <cmath>

namespace drplan {

/// Piecewise-cubic interpolating kernel: k(0)=1, k(n)=0 at nonzero
/// integers, C1-continuous, zero for |x| >= 2. a_param = -0.5 is the
/// common bicubic default; kept as a named constant so alternatives
/// can be tested.
struct CubicKernel {
    double a_param = -0.5;
};

inline double kernel_eval(double x, CubicKernel k = {}) {
    const double a = k.a_param;
    const double t = std::abs(x);
    if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return a * (((t - 5.0) * t + 8.0) * t - 4.0);
    return 0.0;
}

inline double kernel_deriv(double x, CubicKernel k = {}) {
    const double a = k.a_param;
    const double t = std::abs(x);
    double d;
    if (t < 1.0)
        d = (3.0 * (a + 2.0) * t - 2.0 * (a + 3.0)) * t;
    else if (t < 2.0)
        d = a * ((3.0 * t - 10.0) * t + 8.0);
    else
        return 0.0;
    return x < 0.0 ? -d : d;
}

}  // namespace drplan
