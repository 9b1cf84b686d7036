#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drplan/kernel.hpp"

using namespace drplan;

TEST_CASE("interpolating identities hold exactly") {
    CHECK(kernel_eval(0.0) == 1.0);
    CHECK(kernel_eval(1.0) == 0.0);
    CHECK(kernel_eval(-1.0) == 0.0);
    CHECK(kernel_eval(2.0) == 0.0);
    CHECK(kernel_eval(-2.0) == 0.0);
    CHECK(kernel_eval(3.5) == 0.0);
}

TEST_CASE("frozen values of the default kernel") {
    // evaluated by hand from the piecewise cubic with a_param = -1/2
    CHECK(kernel_eval(0.5) == doctest::Approx(9.0 / 16.0).epsilon(1e-15));
    CHECK(kernel_eval(1.5) == doctest::Approx(-1.0 / 16.0).epsilon(1e-15));
    CHECK(kernel_deriv(0.0) == 0.0);
    CHECK(kernel_deriv(1.0) == -0.5);
    CHECK(kernel_deriv(-1.0) == 0.5);
    CHECK(kernel_deriv(2.0) == 0.0);
    CHECK(kernel_deriv(0.5) == doctest::Approx(-11.0 / 8.0).epsilon(1e-15));
    CHECK(kernel_deriv(1.5) == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
    CHECK(kernel_deriv(-1.5) == doctest::Approx(-1.0 / 8.0).epsilon(1e-15));
}

TEST_CASE("derivative matches central differences") {
    const double h = 1e-6;
    for (double x = -2.5; x <= 2.5; x += 0.013) {
        const double fd = (kernel_eval(x + h) - kernel_eval(x - h)) / (2.0 * h);
        CHECK(kernel_deriv(x) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("kernel is C1-continuous at the breakpoints") {
    const double eps = 1e-9;
    for (double a : {-0.5, -0.75, -1.0}) {
        const CubicKernel k{a};
        for (double b : {1.0, 2.0}) {
            CHECK(kernel_eval(b - eps, k) == doctest::Approx(kernel_eval(b + eps, k)).epsilon(1e-7));
            CHECK(kernel_deriv(b - eps, k) ==
                  doctest::Approx(kernel_deriv(b + eps, k)).epsilon(1e-6));
        }
        CHECK(kernel_eval(0.0, k) == 1.0);
        CHECK(kernel_eval(1.0, k) == 0.0);
        CHECK(kernel_eval(2.0, k) == 0.0);
    }
}

TEST_CASE("partition of unity across the 4-tap window") {
    for (double f = 0.0; f < 1.0; f += 0.01) {
        const double sum =
            kernel_eval(f + 1.0) + kernel_eval(f) + kernel_eval(f - 1.0) + kernel_eval(f - 2.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}
