#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "oatbell/bell.hpp"
#include "oatbell/dicke.hpp"
#include "oatbell/errors.hpp"

using oatbell::cplx;
using std::numbers::pi;

TEST_CASE("extreme coefficients at the plateau and at zero twisting") {
    auto e0 = oatbell::extreme_coeffs_exact(8, 0.0);
    CHECK(std::abs(e0.c_minus - cplx{1.0, 0.0}) < 1e-14);
    CHECK(std::abs(e0.c_plus) < 1e-14);

    for (int n : {2, 4, 8, 200}) {
        auto e = oatbell::extreme_coeffs_exact(n, 0.5 * pi);
        CHECK(std::abs(e.c_minus) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
        CHECK(std::abs(e.c_plus) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    }
}

TEST_CASE("correlator hits 1/4 at the half-pi plateau and 1/16 at the four-fold revival") {
    for (int n : {2, 4, 8, 200})
        CHECK(oatbell::bell_correlator_oat(n, 0.5 * pi) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(oatbell::bell_correlator_oat(200, 0.25 * pi) == doctest::Approx(0.0625).epsilon(1e-13));
}

TEST_CASE("correlator revivals at tau = pi/q approach 1/q^2 for large N") {
    for (int q : {2, 4, 6, 8, 10}) {
        const double e = oatbell::bell_correlator_oat(200, pi / q);
        CHECK(e == doctest::Approx(1.0 / (q * q)).epsilon(1e-7));
    }
}

TEST_CASE("correlator is pi-periodic and reflection-symmetric in tau") {
    for (int n : {4, 10}) {
        for (double tau : {0.3, 0.9, 1.4}) {
            const double e = oatbell::bell_correlator_oat(n, tau);
            CHECK(oatbell::bell_correlator_oat(n, tau + pi) == doctest::Approx(e).epsilon(1e-12));
            CHECK(oatbell::bell_correlator_oat(n, pi - tau) == doctest::Approx(e).epsilon(1e-12));
        }
    }
}

TEST_CASE("ladder-operator correlator agrees with the extreme-product form") {
    for (int n : {4, 8}) {
        for (double tau : {0.3, 0.9, 0.5 * pi}) {
            auto rot = oatbell::rotate_y(oatbell::evolve_oat(oatbell::make_css(n), tau), 0.5 * pi);
            const double via_jplus = oatbell::correlator_from_jplus(rot);
            CHECK(via_jplus == doctest::Approx(oatbell::bell_correlator_oat(n, tau)).epsilon(1e-11));
        }
    }
}

TEST_CASE("high-precision log correlator matches pinned deep-cancellation values at N = 200") {
    struct Pin { double tau, ln_e; };
    const Pin pins[] = {
        {0.0025, -477.152773755779},  {0.005, -340.269920653172},
        {0.008830, -231.384041660379}, {0.0125, -168.887060675028},
        {0.015, -138.442004968298},   {0.02, -95.577706830678},
    };
    for (auto p : pins)
        CHECK(oatbell::log_correlator_oat_highprec(200, p.tau) == doctest::Approx(p.ln_e).epsilon(1e-10));
}

TEST_CASE("high-precision log correlator overlaps the double-precision route at moderate tau") {
    const double taus[] = {0.1, 0.2, 0.25 * pi, 0.5 * pi};
    const double pins[] = {-8.114900813247, -5.661337061820, -2.772588722240, -1.386294361120};
    for (int i = 0; i < 4; ++i) {
        const double hp = oatbell::log_correlator_oat_highprec(200, taus[i]);
        CHECK(hp == doctest::Approx(pins[i]).epsilon(1e-10));
        CHECK(std::log(oatbell::bell_correlator_oat(200, taus[i])) == doctest::Approx(hp).epsilon(6e-10));
    }
}

TEST_CASE("high-precision log correlator domain handling") {
    CHECK(oatbell::log_correlator_oat_highprec(8, 0.0) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(oatbell::log_correlator_oat_highprec(7, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(oatbell::log_correlator_oat_highprec(0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(oatbell::log_correlator_oat_highprec(2050, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(oatbell::log_correlator_oat_highprec(8, std::nan("")), std::invalid_argument);
}

TEST_CASE("violation-depth classifier on worked examples") {
    CHECK(oatbell::bell_depth(4.1e-3, 8) == 3);
    CHECK(oatbell::bell_depth(8e-3, 8) == 4);
    CHECK(oatbell::bell_depth(1e-4, 1000) == 989);
    CHECK(oatbell::bell_depth(0.25, 8) == 8);
    // thresholds are strict: exactly at (1/8) 2^{-(N-k)} does not certify k
    CHECK(oatbell::bell_depth(std::exp2(-7), 8) == 3);
    CHECK(oatbell::bell_depth(std::exp2(-8), 8) == 0);  // exactly at the LHV bound
    CHECK(oatbell::bell_depth(0.0, 8) == 0);
}

TEST_CASE("entanglement-depth classifier on worked examples") {
    CHECK(oatbell::entanglement_depth(1.6e-5, 8) == 2);
    CHECK(oatbell::entanglement_depth(2.5e-4, 8) == 4);
    CHECK(oatbell::entanglement_depth(0.07, 8) == 8);
    CHECK(oatbell::entanglement_depth(0.07, 300) == 300);
    // exactly at the separable bound 4^-N: not entangled
    CHECK(oatbell::entanglement_depth(std::exp2(-16), 8) == 1);
    CHECK(oatbell::entanglement_depth(0.0, 8) == 1);
}

TEST_CASE("classifiers match a literal threshold scan over a dense grid") {
    for (int n : {8, 40, 300}) {
        for (int i = 0; i <= 400; ++i) {
            // log2 E swept well past both bounds on either side
            const double log2_e = -2.2 * n + i * (2.2 * n + 2.0) / 400.0;
            int bell_scan = 0;
            for (int k = 3; k <= n; ++k)
                if (log2_e > -3.0 - (n - k)) bell_scan = k;
            int ent_scan = 1;
            for (int k = 2; k <= n; ++k)
                if (log2_e > -4.0 - 2.0 * (n - k)) ent_scan = k;
            CHECK(oatbell::bell_depth_from_log2(log2_e, n) == bell_scan);
            CHECK(oatbell::entanglement_depth_from_log2(log2_e, n) == ent_scan);
        }
    }
}

TEST_CASE("classifier threshold table for N = 8") {
    struct Row { int k; double threshold; };
    const Row rows[] = {{3, 3.90625e-3}, {4, 7.8125e-3}, {5, 1.5625e-2}, {8, 0.125}};
    for (auto r : rows) {
        CHECK(0.125 * std::exp2(-(8 - r.k)) == r.threshold);
        CHECK(oatbell::bell_depth(r.threshold * (1.0 + 1e-9), 8) == r.k);
        CHECK(oatbell::bell_depth(r.threshold, 8) == (r.k == 3 ? 0 : r.k - 1));
    }
}

TEST_CASE("bell report bundles bounds and depths") {
    auto r = oatbell::make_bell_report(0.25, 8);
    CHECK(r.correlator == 0.25);
    CHECK(r.n_particles == 8);
    CHECK(r.lhv_bound == std::exp2(-8));
    CHECK(r.separable_bound == std::exp2(-16));
    CHECK(r.bell_depth == 8);
    CHECK(r.entanglement_depth == 8);
    CHECK_THROWS_AS(oatbell::make_bell_report(-0.1, 8), std::invalid_argument);
}

TEST_CASE("critical twisting time against pinned roots") {
    struct Pin { int n; double n_tau; };
    const Pin pins[] = {
        {4, 3.05739619},   {6, 2.98180527},  {8, 2.98255248},  {12, 2.98466609},
        {16, 2.98691971},  {20, 2.988607},   {100, 2.995503406568},
        {200, 2.996511465256}, {500, 2.997130769507},
    };
    for (auto p : pins) {
        const double tc = oatbell::tau_crit_exact(p.n);
        CHECK(p.n * tc == doctest::Approx(p.n_tau).epsilon(5e-7));
        // the root really sits on the LHV bound in log2 space
        const double log2_e = oatbell::log_correlator_oat_highprec(p.n, tc) / std::numbers::ln2;
        CHECK(std::abs(log2_e + p.n) < 1e-5 * p.n);
    }
}

TEST_CASE("critical twisting time accepts a bracket hint and rejects bad input") {
    const double plain = oatbell::tau_crit_exact(8);
    CHECK(oatbell::tau_crit_exact(8, 0.35) == doctest::Approx(plain).epsilon(1e-7));
    CHECK(oatbell::tau_crit_exact(8, 0.6) == doctest::Approx(plain).epsilon(1e-7));
    CHECK_THROWS_AS(oatbell::tau_crit_exact(7), std::invalid_argument);
}

TEST_CASE("brute-force local-strategy maximum is exactly 2^-N") {
    for (int n = 1; n <= 6; ++n)
        CHECK(oatbell::lhv_max_bruteforce(n) == std::exp2(-n));
    CHECK_THROWS_AS(oatbell::lhv_max_bruteforce(0), std::invalid_argument);
    CHECK_THROWS_AS(oatbell::lhv_max_bruteforce(9), std::invalid_argument);
}
