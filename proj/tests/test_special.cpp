#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "wlab/special.hpp"

namespace sp = wlab::special;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Special, LogGammaMatchesBoost) {
    for (double x : {1e-8, 0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 50.5, 171.3, 1e4, 1e8}) {
        EXPECT_LT(std::abs(sp::log_gamma(x) - boost::math::lgamma(x)), 2e-14 * std::max(1.0, std::abs(boost::math::lgamma(x))))
            << x;
    }
}

TEST(Special, IncompleteGammaMatchesBoost) {
    for (double a : {0.05, 0.5, 1.0, 1.5, 9.0 / 7.0, 5.0, 25.0, 50.0, 250.0, 5000.0}) {
        for (double f : {1e-6, 0.01, 0.3, 0.9, 1.0, 1.1, 2.0, 5.0, 20.0}) {
            const double x = a * f;
            const double p = boost::math::gamma_p(a, x);
            const double q = boost::math::gamma_q(a, x);
            if (p > 1e-300) EXPECT_LT(rel(sp::gamma_p(a, x), p), 1e-12) << a << " " << x;
            if (q > 1e-300) EXPECT_LT(rel(sp::gamma_q(a, x), q), 1e-12) << a << " " << x;
        }
    }
}

TEST(Special, BoundaryValues) {
    EXPECT_EQ(sp::gamma_p(2.0, 0.0), 0.0);
    EXPECT_EQ(sp::gamma_q(2.0, 0.0), 1.0);
    EXPECT_NEAR(sp::gamma_p(1.0, 1.0), -std::expm1(-1.0), 4e-16);
    EXPECT_NEAR(sp::gamma_q(1.0, 700.0) / std::exp(-700.0), 1.0, 1e-12);
}

TEST(Special, PoissonKernelAndDensity) {
    for (double a : {0.5, 3.0, 50.0, 1000.0}) {
        for (double x : {0.01, 1.0, 40.0, 990.0}) {
            const double kernel = boost::math::gamma_p_derivative(a + 1.0, x);
            const double density = boost::math::gamma_p_derivative(a, x);
            if (kernel > 1e-290) EXPECT_LT(rel(sp::poisson_kernel(a, x), kernel), 1e-12) << a << " " << x;
            if (density > 1e-290) {
                EXPECT_LT(rel(sp::gamma_density(a, x), density), 1e-12) << a << " " << x;
                EXPECT_NEAR(sp::log_gamma_density(a, x), std::log(density), 1e-12 * (1.0 + std::abs(std::log(density))));
            }
        }
    }
}

TEST(Special, LogKernelStaysFiniteWhereKernelUnderflows) {
    const double lk = sp::log_poisson_kernel(1000.0, 0.01);
    EXPECT_TRUE(std::isfinite(lk));
    EXPECT_NEAR(lk, 1000.0 * std::log(0.01) - 0.01 - boost::math::lgamma(1001.0), 1e-9 * std::abs(lk));
}
