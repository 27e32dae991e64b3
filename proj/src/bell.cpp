#include "oatbell/bell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "oatbell/analytic.hpp"
#include "oatbell/errors.hpp"
#include "oatbell/math_util.hpp"
#include "oatbell/tolerances.hpp"

namespace oatbell {

ExtremePair extreme_coeffs_exact(int n_particles, double tau) {
    if (n_particles < 2 || n_particles % 2 != 0)
        throw std::invalid_argument("extreme_coeffs_exact: N must be a positive even integer");
    const int half = n_particles / 2;
    const double n_log2 = n_particles * std::numbers::ln2;
    cplx cm{0.0, 0.0}, cp{0.0, 0.0};
    for (int k = 0; k <= n_particles; ++k) {
        const int n = k - half;
        const double w = std::exp(log_binom(n_particles, k) - n_log2);
        const cplx ph = std::polar(w, -tau * double(n) * double(n));
        cm += ph;
        cp += (n & 1) ? -ph : ph;
    }
    if (half & 1) cp = -cp;  // row sign of the e^{-i(pi/2)J_y} convention
    return {cm, cp};
}

double bell_correlator_oat(int n_particles, double tau) {
    ExtremePair c = extreme_coeffs_exact(n_particles, tau);
    double m = std::abs(c.c_minus) * std::abs(c.c_plus);
    return m * m;
}

double correlator_from_jplus(const DickeState& state) {
    const int n = state.n_particles;
    const double j = 0.5 * n;
    std::vector<cplx> v = state.amplitudes;
    std::vector<cplx> next(v.size());
    for (int step = 1; step <= n; ++step) {
        std::fill(next.begin(), next.end(), cplx{0.0, 0.0});
        for (int k = 0; k + 1 < state.dim(); ++k) {
            double nn = state.n_of(k);
            next[k + 1] = std::sqrt((j - nn) * (j + nn + 1.0)) / double(step) * v[k];
        }
        v.swap(next);
    }
    cplx ip{0.0, 0.0};
    for (int k = 0; k < state.dim(); ++k) ip += std::conj(state.amplitudes[k]) * v[k];
    return std::norm(ip);
}

// Both depth classifiers work on log2(correlator) and decrement once if the
// floor form lands exactly on a threshold: the certifying inequalities are
// strict, and dyadic correlator values do occur (e.g. 2^-(N-1)).
int bell_depth_from_log2(double log2_correlator, int n_particles) {
    const int n = n_particles;
    double excess = log2_correlator + n;  // log2(E / 2^-N)
    if (!(excess > 0.0)) return 0;
    int k = std::min(n, 3 + static_cast<int>(std::floor(excess)));
    while (k > 3 && !(log2_correlator > double(k - n - 3))) --k;
    return k;
}

int entanglement_depth_from_log2(double log2_correlator, int n_particles) {
    const int n = n_particles;
    double excess = log2_correlator + 2.0 * n;  // log2(E / 4^-N)
    if (!(excess > 0.0)) return 1;
    int k = std::min(n, 2 + static_cast<int>(std::floor(0.5 * excess)));
    while (k > 2 && !(log2_correlator > 2.0 * double(k - n - 2))) --k;
    return k;
}

namespace {
double checked_log2(double correlator, const char* who) {
    if (correlator < 0.0) throw std::invalid_argument(std::string(who) + ": negative correlator");
    return correlator == 0.0 ? -std::numeric_limits<double>::infinity() : std::log2(correlator);
}
}  // namespace

int bell_depth(double correlator, int n_particles) {
    return bell_depth_from_log2(checked_log2(correlator, "bell_depth"), n_particles);
}

int entanglement_depth(double correlator, int n_particles) {
    return entanglement_depth_from_log2(checked_log2(correlator, "entanglement_depth"), n_particles);
}

BellReport make_bell_report(double correlator, int n_particles) {
    BellReport r;
    r.correlator = correlator;
    r.n_particles = n_particles;
    r.lhv_bound = std::exp2(-double(n_particles));
    r.separable_bound = std::exp2(-2.0 * n_particles);
    r.bell_depth = bell_depth(correlator, n_particles);
    r.entanglement_depth = entanglement_depth(correlator, n_particles);
    return r;
}

double tau_crit_exact(int n_particles, std::optional<double> bracket_hint) {
    if (n_particles < 4 || n_particles % 2 != 0)
        throw std::invalid_argument("tau_crit_exact: N must be even and >= 4");
    const int n = n_particles;
    // f(tau) = log2 E(tau) + N: negative below the LHV bound, positive above.
    auto f = [n](double tau) {
        return log_correlator_oat_highprec(n, tau) / std::numbers::ln2 + double(n);
    };
    double lo = bracket_hint.value_or(tau_crit_approx(n));
    // walk lo down until f(lo) < 0 (the guess may sit above the crossing)
    double flo = f(lo);
    int guard = 0;
    while (flo >= 0.0) {
        lo *= 0.5;
        flo = f(lo);
        if (++guard > 60) throw numerical_error("tau_crit_exact: no sign change below the hint");
    }
    double hi = lo;
    double fhi = flo;
    const double pi_half = 0.5 * std::numbers::pi;
    while (fhi < 0.0) {
        hi *= 1.5;
        if (hi > pi_half) throw numerical_error("tau_crit_exact: no crossing of the LHV bound in (0, pi/2]");
        fhi = f(hi);
    }
    lo = hi / 1.5;
    const double rel = default_tolerances().root_rel;
    while ((hi - lo) > rel * hi) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double lhv_max_bruteforce(int n_particles) {
    if (n_particles < 1) throw std::invalid_argument("lhv_max_bruteforce: N must be positive");
    if (n_particles > 8) throw std::invalid_argument("lhv_max_bruteforce: N > 8 exceeds the enumeration guard");
    const int n = n_particles;
    const std::uint64_t total = 1ull << (2 * n);  // two sign bits per party
    double best = 0.0;
    for (std::uint64_t s = 0; s < total; ++s) {
        cplx prod{1.0, 0.0};
        for (int p = 0; p < n; ++p) {
            double s1 = (s >> (2 * p)) & 1u ? 1.0 : -1.0;
            double s2 = (s >> (2 * p + 1)) & 1u ? 1.0 : -1.0;
            prod *= cplx{0.5 * s1, 0.5 * s2};
        }
        best = std::max(best, std::norm(prod));
    }
    return best;
}

}  // namespace oatbell
