#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oatbell {

using cplx = std::complex<double>;

// Collective-spin state of N qubits in the symmetric (j = N/2) sector,
// expanded over J_z eigenstates |n>, n = -N/2..N/2. Storage slot k holds the
// amplitude of n = k - N/2 (round-tripped by slot_of/n_of below).
struct DickeState {
    int n_particles = 0;
    std::vector<cplx> amplitudes;  // length N + 1

    int dim() const { return n_particles + 1; }
    double n_of(int slot) const { return slot - 0.5 * n_particles; }
    int slot_of(double n) const { return static_cast<int>(std::lround(n + 0.5 * n_particles)); }
    double norm2() const;
};

// Wigner rotation matrix d^j(theta) about y, real (N+1)x(N+1) in the same
// slot ordering as DickeState. j = twice_j/2.
struct WignerMatrix {
    int twice_j = 0;
    double theta = 0.0;
    Eigen::MatrixXd entries;
};

struct SpinSummary {
    Eigen::Vector3d mean_spin;   // <Jx>, <Jy>, <Jz>
    Eigen::Matrix3d covariance;  // <JaJb + JbJa>/2 - <Ja><Jb>
};

// Coherent spin state along +x (phi rotates the relative mode phase):
// c_n = e^{i phi (n + N/2)} 2^{-N/2} sqrt(binom(N, N/2 + n)). Even N >= 2.
// The mean spin sits at (N/2)(cos phi, -sin phi, 0): a positive phi on the
// upper mode advances the azimuth clockwise.
DickeState make_css(int n_particles, double phi = 0.0);

// One-axis twisting: multiply each amplitude by e^{-i n^2 tau}.
DickeState evolve_oat(const DickeState& state, double tau);

// d^j(theta), computed from the tridiagonal eigendecomposition of J_y in the
// i^k gauge (see dicke.cpp); exactly real, d(0) = identity, finite to N = 2048.
WignerMatrix wigner_d(int twice_j, double theta);

// Apply e^{-i theta J_y}. Convention fixed by j = 1/2: d_{-1/2,+1/2} = sin(theta/2),
// so the +x CSS maps onto the n = -N/2 extreme at theta = pi/2.
DickeState rotate_y(const DickeState& state, double theta);

SpinSummary spin_summary(const DickeState& state);

// Squeezing parameter: N * (smallest variance in the plane orthogonal to the
// mean spin) / |<J>|^2, by closed-form 2x2 eigendecomposition of the projected
// covariance. Throws when the mean-spin direction is degenerate.
double squeezing_xi2(const DickeState& state);
double squeezing_xi2_from_summary(const SpinSummary& summary, int n_particles);

}  // namespace oatbell
