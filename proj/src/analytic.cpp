#include "oatbell/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oatbell {

double gaussian_log_correlator(int n_particles, double tau) {
    if (n_particles < 2) throw std::invalid_argument("gaussian_log_correlator: N must be >= 2");
    const double kappa = 0.5 * tau * n_particles;
    const double k2 = 1.0 + kappa * kappa;
    return 2.0 * std::numbers::ln2 - 2.0 * std::log(k2) -
           std::numbers::pi * std::numbers::pi * n_particles / (8.0 * k2);
}

double gaussian_correlator(int n_particles, double tau) {
    return std::exp(gaussian_log_correlator(n_particles, tau));
}

double tau_crit_approx(int n_particles) {
    if (n_particles < 4) throw std::invalid_argument("tau_crit_approx: N must be >= 4");
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return 2.0 / n_particles * std::sqrt(pi2 / (8.0 * std::numbers::ln2) - 1.0);
}

double tau_s(int n_particles) {
    if (n_particles < 2) throw std::invalid_argument("tau_s: N must be >= 2");
    return std::pow(double(n_particles), -2.0 / 3.0);
}

ExtremePair revival_coeffs(int n_particles, int q) {
    if (n_particles < 2 || n_particles % 2 != 0)
        throw std::invalid_argument("revival_coeffs: N must be a positive even integer");
    if (q % 2 != 0 || q < 2 || q > n_particles)
        throw std::invalid_argument("revival_coeffs: q must be even with 2 <= q <= N");
    const double tau_q = std::numbers::pi / q;
    const double inv_sqrt_q = 1.0 / std::sqrt(double(q));
    cplx cm{0.0, 0.0}, cp{0.0, 0.0};
    for (int l = 0; l < q; ++l) {
        const cplx ph = std::polar(inv_sqrt_q, tau_q * double(l) * double(l));
        cm += ph * std::pow(std::cos(tau_q * l), double(n_particles));
        cp += ph * std::pow(std::sin(tau_q * l), double(n_particles));
    }
    // i^N for even N is (-1)^{N/2}
    if ((n_particles / 2) % 2 != 0) cp = -cp;
    return {cm, cp};
}

double revival_correlator(int q) {
    if (q % 2 != 0 || q < 2) throw std::invalid_argument("revival_correlator: q must be even and >= 2");
    return 1.0 / (double(q) * double(q));
}

std::optional<int> match_revival_q(int n_particles, double tau) {
    if (!(tau > 0.0)) return std::nullopt;
    const double ratio = std::numbers::pi / tau;
    // test the two even integers bracketing pi/tau
    const int base = 2 * static_cast<int>(std::floor(0.5 * ratio));
    for (int q : {base, base + 2}) {
        if (q < 2 || q > n_particles) continue;
        if (std::abs(tau - std::numbers::pi / q) <= 1e-9) return q;
    }
    return std::nullopt;
}

int shorttime_depth_estimate(int n_particles, double tau) {
    if (auto q = match_revival_q(n_particles, tau))
        return bell_depth(revival_correlator(*q), n_particles);
    return bell_depth(gaussian_correlator(n_particles, tau), n_particles);
}

}  // namespace oatbell
