#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "oatbell/analytic.hpp"
#include "oatbell/bell.hpp"

using oatbell::cplx;
using std::numbers::pi;

TEST_CASE("gaussian short-time model at distinguished twisting strengths") {
    // kappa = tau N / 2; at kappa = 0 the model reads 4 exp(-pi^2 N / 8)
    for (int n : {8, 100})
        CHECK(oatbell::gaussian_log_correlator(n, 0.0)
              == doctest::Approx(std::log(4.0) - pi * pi * n / 8.0).epsilon(1e-12));
    // at kappa = 1 (tau = 2/N) the prefactor collapses to 1 and the exponent halves
    for (int n : {8, 100})
        CHECK(oatbell::gaussian_log_correlator(n, 2.0 / n)
              == doctest::Approx(-pi * pi * n / 16.0).epsilon(1e-12));
    CHECK(std::log(oatbell::gaussian_correlator(100, 0.01))
          == doctest::Approx(oatbell::gaussian_log_correlator(100, 0.01)).epsilon(1e-12));
}

TEST_CASE("gaussian model has a single interior maximum in tau") {
    // the lone maximum sits near tau = pi/(2 sqrt(N)); sweep well past it
    for (int n : {20, 100, 1000}) {
        int maxima = 0;
        const int pts = 4000;
        const double step = 4.0 / std::sqrt(double(n)) / pts;
        double prev = oatbell::gaussian_log_correlator(n, 1e-6);
        double cur = oatbell::gaussian_log_correlator(n, 1e-6 + step);
        for (int i = 2; i <= pts; ++i) {
            const double next = oatbell::gaussian_log_correlator(n, 1e-6 + i * step);
            if (cur > prev && cur >= next) ++maxima;
            prev = cur;
            cur = next;
        }
        CHECK(maxima == 1);
    }
}

TEST_CASE("critical-time estimate scales as 1/N with the documented constant") {
    // tau_crit_approx(N) * N = 2 sqrt(pi^2/(8 ln 2) - 1) = 1.76618...
    const double c = oatbell::tau_crit_approx(100) * 100.0;
    CHECK(c > 1.766);
    CHECK(c < 1.7663);
    for (int n : {4, 100, 1000})
        CHECK(oatbell::tau_crit_approx(n) * n == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("squeezing time scale N^{-2/3} and its ordering against the critical-time estimate") {
    CHECK(oatbell::tau_s(1000) == doctest::Approx(1e-2).epsilon(1e-12));
    CHECK(oatbell::tau_s(8) == doctest::Approx(0.25).epsilon(1e-12));
    // tau_s > tau_crit_approx exactly when N^{1/3} > 2 sqrt(pi^2/(8 ln 2) - 1),
    // i.e. from N = 6 upward; at N = 4 the order is reversed
    CHECK(oatbell::tau_s(4) < oatbell::tau_crit_approx(4));
    for (int n : {6, 8, 100, 1000})
        CHECK(oatbell::tau_s(n) > oatbell::tau_crit_approx(n));
}

TEST_CASE("revival coefficients at q = 2 and their general phase relation to the exact sums") {
    // q = 2: c- = 1/sqrt(2), c+ = i^N * i / sqrt(2)
    auto r4 = oatbell::revival_coeffs(4, 2);
    CHECK(std::abs(r4.c_minus - cplx{std::sqrt(0.5), 0.0}) < 1e-12);
    CHECK(std::abs(r4.c_plus - cplx{0.0, std::sqrt(0.5)}) < 1e-12);
    auto r6 = oatbell::revival_coeffs(6, 2);
    CHECK(std::abs(r6.c_plus - cplx{0.0, -std::sqrt(0.5)}) < 1e-12);

    // the closed-form revival state is the exact tau = pi/q state times a
    // uniform global phase e^{i pi / 4}
    const cplx gauge = std::polar(1.0, 0.25 * pi);
    for (int n : {8, 16, 64}) {
        for (int q : {2, 4, 8}) {
            auto rv = oatbell::revival_coeffs(n, q);
            auto ex = oatbell::extreme_coeffs_exact(n, pi / q);
            CHECK(std::abs(rv.c_minus - gauge * ex.c_minus) < 1e-10);
            CHECK(std::abs(rv.c_plus - gauge * ex.c_plus) < 1e-10);
        }
    }
}

TEST_CASE("revival correlator prediction 1/q^2 and its convergence with N") {
    CHECK(oatbell::revival_correlator(2) == 0.25);
    CHECK(oatbell::revival_correlator(4) == 0.0625);

    // |c- c+|^2 from the closed-form coefficients approaches 1/q^2 from below as N grows
    auto rel_err = [](int n, int q) {
        auto rv = oatbell::revival_coeffs(n, q);
        const double e = std::norm(rv.c_minus * rv.c_plus);
        return std::abs(e - 1.0 / (q * q)) * (q * q);
    };
    CHECK(rel_err(100, 4) < 0.01);
    // q = 6: the deviation collapses with N until it saturates at the
    // double-precision floor
    const double e64 = rel_err(64, 6);
    const double e128 = rel_err(128, 6);
    const double e256 = rel_err(256, 6);
    CHECK(e64 < 1e-7);
    CHECK(e128 < 1e-4 * e64);
    CHECK(e256 < 1e-14);
}

TEST_CASE("revival construction rejects invalid orders") {
    CHECK_THROWS_AS(oatbell::revival_coeffs(8, 3), std::invalid_argument);
    CHECK_THROWS_AS(oatbell::revival_coeffs(8, 0), std::invalid_argument);
    CHECK_THROWS_AS(oatbell::revival_coeffs(8, 10), std::invalid_argument);  // q > N
    CHECK_THROWS_AS(oatbell::revival_coeffs(7, 2), std::invalid_argument);
    CHECK_THROWS_AS(oatbell::revival_correlator(3), std::invalid_argument);
    CHECK_THROWS_AS(oatbell::revival_correlator(0), std::invalid_argument);
}

TEST_CASE("revival order recognition from a twisting time") {
    CHECK(oatbell::match_revival_q(100, pi / 2).value() == 2);
    CHECK(oatbell::match_revival_q(100, pi / 6).value() == 6);
    CHECK(!oatbell::match_revival_q(4, pi / 6).has_value());  // q would exceed N
    CHECK(!oatbell::match_revival_q(100, 0.3).has_value());
    CHECK(!oatbell::match_revival_q(100, pi / 2 + 1e-8).has_value());
    CHECK(oatbell::match_revival_q(100, pi / 2 + 1e-10).value() == 2);
}

TEST_CASE("short-time depth estimate switches between regimes") {
    // deep in the gaussian-suppressed region nothing is certified
    CHECK(oatbell::shorttime_depth_estimate(100, 1e-4) == 0);
    // at the q = 2 plateau the estimate saturates at N
    CHECK(oatbell::shorttime_depth_estimate(100, pi / 2) == 100);
    // at q = 4 the prediction 1/16 sits exactly on the k = N - 1 threshold,
    // which is strict, so N - 2 is certified
    CHECK(oatbell::shorttime_depth_estimate(64, pi / 4) == 62);
}
