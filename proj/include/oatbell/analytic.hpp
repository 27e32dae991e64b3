#pragma once

#include <optional>

#include "oatbell/bell.hpp"

namespace oatbell {

// Short-time Gaussian-envelope approximation of the correlator,
//   E_g(tau) = 4 (1 + kappa^2)^-2 exp(-pi^2 N / (8 (1 + kappa^2))),
// kappa = tau N / 2.  Kept in the exact form above on purpose; the acceptance
// suite measures its agreement with the exact correlator as a criterion (and
// that criterion fails), so treat it as a qualitative envelope, not a fit.
double gaussian_correlator(int n_particles, double tau);
double gaussian_log_correlator(int n_particles, double tau);  // natural log, underflow-free

// Closed-form critical-time estimate (2/N) sqrt(pi^2/(8 ln 2) - 1) ~ 1.766/N.
double tau_crit_approx(int n_particles);

// Optimal-squeezing time scale N^{-2/3}.
double tau_s(int n_particles);

// Fractional-revival coefficients at tau_q = pi/q (even q):
//   c- = q^{-1/2} sum_{l=0}^{q-1} e^{i pi l^2 / q} cos^N(pi l / q)
//   c+ = i^N q^{-1/2} sum_{l=0}^{q-1} e^{i pi l^2 / q} sin^N(pi l / q)
// These carry a uniform global phase e^{i pi/4} relative to the exact
// extreme coefficients; magnitudes agree to rounding.
ExtremePair revival_coeffs(int n_particles, int q);

// Plateau law E(pi/q) -> 1/q^2.
double revival_correlator(int q);

// Nearest even q with pi/q within 1e-9 of tau, if any (and 2 <= q <= N).
std::optional<int> match_revival_q(int n_particles, double tau);

// Convenience composition: Bell depth of the analytic correlator estimate,
// using the plateau law when tau sits on a revival time and the Gaussian
// envelope otherwise.
int shorttime_depth_estimate(int n_particles, double tau);

}  // namespace oatbell
