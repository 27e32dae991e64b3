#pragma once

#include <complex>
#include <optional>

#include "oatbell/dicke.hpp"

namespace oatbell {

// Extreme-row coefficients of the rotated OAT state: c_minus multiplies
// |n = -N/2>, c_plus multiplies |n = +N/2>.
struct ExtremePair {
    cplx c_minus;
    cplx c_plus;
};

struct BellReport {
    double correlator = 0.0;
    int n_particles = 0;
    double lhv_bound = 0.0;        // 2^-N
    double separable_bound = 0.0;  // 4^-N
    int bell_depth = 0;            // 0, or in [3, N]
    int entanglement_depth = 1;    // 1, or in [2, N]
};

// Binomial-weighted phase sums for the two extreme coefficients,
//   c-  = 2^-N sum_n binom(N, n+N/2) e^{-i tau n^2}
//   c+  = (-1)^{N/2} 2^-N sum_n binom(N, n+N/2) (-1)^n e^{-i tau n^2},
// evaluated in log-space-stabilized arithmetic. The (-1)^{N/2} on c+ is the
// row sign produced by the e^{-i(pi/2)J_y} convention (verified against the
// full rotation pipeline); it drops out of |c- * c+|^2.
ExtremePair extreme_coeffs_exact(int n_particles, double tau);

// The Bell correlator E = |c- * c+|^2 of the rotated OAT state.
double bell_correlator_oat(int n_particles, double tau);

// Generic correlator |<J_+^N>/N!|^2 for any Dicke state (state already in the
// measurement frame). J_+ is applied N times with incremental division by the
// step index, so N! never materializes.
double correlator_from_jplus(const DickeState& state);

// ln E computed with MPFR arbitrary-precision arithmetic and exact integer
// binomials. Needed below tau ~ O(1/sqrt(N)) where the alternating c+ sum
// cancels far beneath the double-precision noise floor. Returns natural log;
// -inf at tau = 0. Supported for even N up to 2048.
double log_correlator_oat_highprec(int n_particles, double tau);

// Depth classifiers (log2-domain versions are the primitives; the plain
// versions take a correlator value directly). bell_depth: 0 below the LHV
// bound 2^-N, else the largest k in [3, N] with E > (1/8) 2^{-(N-k)}.
// entanglement_depth: 1 below the separable bound 4^-N, else the largest
// k in [2, N] with E > (1/16) 4^{-(N-k)}.
int bell_depth(double correlator, int n_particles);
int entanglement_depth(double correlator, int n_particles);
int bell_depth_from_log2(double log2_correlator, int n_particles);
int entanglement_depth_from_log2(double log2_correlator, int n_particles);

BellReport make_bell_report(double correlator, int n_particles);

// Smallest tau > 0 where the correlator meets the LHV bound 2^-N, located by
// geometric bracket expansion from the short-time analytic guess followed by
// bisection on log2 E + N, to relative tolerance default_tolerances().root_rel.
double tau_crit_exact(int n_particles, std::optional<double> bracket_hint = std::nullopt);

// Maximum of |sigma+^(1) ... sigma+^(N)|^2 over all 4^N deterministic local
// strategies, sigma+ = (sigma1 + i sigma2)/2 with sigma1, sigma2 in {+-1}.
// Every factor has modulus 1/sqrt(2), so the result is exactly 2^-N.
double lhv_max_bruteforce(int n_particles);

}  // namespace oatbell
