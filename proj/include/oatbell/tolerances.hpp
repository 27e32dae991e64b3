#pragma once

namespace oatbell {

// Central tolerance record. Every default numerical threshold used by the
// library lives here so tests and callers share one source of truth.
struct Tolerances {
    double norm = 1e-10;            // unit-norm drift allowed per state operation
    double orthogonality = 1e-9;    // Wigner-matrix orthogonality defect
    double degeneracy_scale = 1e-8; // |<J>| < degeneracy_scale*N means "no mean-spin direction"
    double root_rel = 1e-8;         // relative tolerance of the critical-time root finder
    double krylov_residual = 1e-10; // per-step Krylov residual estimate triggering rejection
    double krylov_norm_drift = 1e-9;// per-step norm drift allowed by the propagator
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

}  // namespace oatbell
