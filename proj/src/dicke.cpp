#include "oatbell/dicke.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "oatbell/errors.hpp"
#include "oatbell/math_util.hpp"
#include "oatbell/tolerances.hpp"

namespace oatbell {

double DickeState::norm2() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s;
}

DickeState make_css(int n_particles, double phi) {
    if (n_particles < 2 || n_particles % 2 != 0)
        throw std::invalid_argument("make_css: N must be a positive even integer");
    DickeState st;
    st.n_particles = n_particles;
    st.amplitudes.resize(n_particles + 1);
    const double half_n_log2 = 0.5 * n_particles * std::numbers::ln2;
    for (int k = 0; k <= n_particles; ++k) {
        double mag = std::exp(0.5 * log_binom(n_particles, k) - half_n_log2);
        st.amplitudes[k] = std::polar(mag, phi * k);
    }
    return st;
}

DickeState evolve_oat(const DickeState& state, double tau) {
    DickeState out = state;
    for (int k = 0; k < out.dim(); ++k) {
        double n = out.n_of(k);
        out.amplitudes[k] *= std::polar(1.0, -n * n * tau);
    }
    return out;
}

// J_y in the Dicke slot basis is antisymmetric imaginary tridiagonal. The
// gauge T = diag(i^k) maps it to the real symmetric tridiagonal with
// off-diagonals beta_k = (1/2) sqrt((2j - k)(k + 1)), so
//   d(theta) = e^{-i theta J_y} = T [V cos(theta L) V^T - i V sin(theta L) V^T] T^dagger
// and the entry (r, c) picks A, B, -A or -B according to (c - r) mod 4 —
// which also proves d is exactly real. Two real GEMMs; no recurrences.
WignerMatrix wigner_d(int twice_j, double theta) {
    if (twice_j < 1) throw std::invalid_argument("wigner_d: 2j must be a positive integer");
    const int n = twice_j;
    WignerMatrix w;
    w.twice_j = twice_j;
    w.theta = theta;
    if (theta == 0.0) {
        w.entries = Eigen::MatrixXd::Identity(n + 1, n + 1);
        return w;
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n + 1);
    Eigen::VectorXd beta(n);
    for (int k = 0; k < n; ++k) beta[k] = 0.5 * std::sqrt(double(n - k) * double(k + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, beta);
    if (es.info() != Eigen::Success)
        throw numerical_error("wigner_d: tridiagonal eigendecomposition failed");
    const Eigen::MatrixXd& v = es.eigenvectors();
    Eigen::ArrayXd lam = es.eigenvalues().array() * theta;
    Eigen::MatrixXd a = v * lam.cos().matrix().asDiagonal() * v.transpose();
    Eigen::MatrixXd b = v * lam.sin().matrix().asDiagonal() * v.transpose();
    w.entries.resize(n + 1, n + 1);
    for (int r = 0; r <= n; ++r) {
        for (int c = 0; c <= n; ++c) {
            switch (((c - r) % 4 + 4) % 4) {
                case 0: w.entries(r, c) = a(r, c); break;
                case 1: w.entries(r, c) = b(r, c); break;
                case 2: w.entries(r, c) = -a(r, c); break;
                default: w.entries(r, c) = -b(r, c); break;
            }
        }
    }
    if (!w.entries.allFinite()) throw numerical_error("wigner_d: non-finite entries");
    return w;
}

DickeState rotate_y(const DickeState& state, double theta) {
    WignerMatrix d = wigner_d(state.n_particles, theta);
    const int dim = state.dim();
    Eigen::VectorXd re(dim), im(dim);
    for (int k = 0; k < dim; ++k) {
        re[k] = state.amplitudes[k].real();
        im[k] = state.amplitudes[k].imag();
    }
    Eigen::VectorXd rre = d.entries * re;
    Eigen::VectorXd rim = d.entries * im;
    DickeState out;
    out.n_particles = state.n_particles;
    out.amplitudes.resize(dim);
    for (int k = 0; k < dim; ++k) out.amplitudes[k] = {rre[k], rim[k]};
    return out;
}

namespace {

// Ladder actions on a Dicke vector; j = N/2, slot k holds n = k - j.
std::vector<cplx> apply_jplus(const DickeState& s) {
    const double j = 0.5 * s.n_particles;
    std::vector<cplx> out(s.dim(), cplx{0.0, 0.0});
    for (int k = 0; k + 1 < s.dim(); ++k) {
        double n = s.n_of(k);
        out[k + 1] += std::sqrt((j - n) * (j + n + 1.0)) * s.amplitudes[k];
    }
    return out;
}

std::vector<cplx> apply_jminus(const DickeState& s) {
    const double j = 0.5 * s.n_particles;
    std::vector<cplx> out(s.dim(), cplx{0.0, 0.0});
    for (int k = 1; k < s.dim(); ++k) {
        double n = s.n_of(k);
        out[k - 1] += std::sqrt((j + n) * (j - n + 1.0)) * s.amplitudes[k];
    }
    return out;
}

cplx inner(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
    return s;
}

}  // namespace

SpinSummary spin_summary(const DickeState& state) {
    const int dim = state.dim();
    std::vector<cplx> vp = apply_jplus(state);
    std::vector<cplx> vm = apply_jminus(state);
    std::vector<cplx> vx(dim), vy(dim), vz(dim);
    for (int k = 0; k < dim; ++k) {
        vx[k] = 0.5 * (vp[k] + vm[k]);
        vy[k] = cplx{0.0, -0.5} * (vp[k] - vm[k]);
        vz[k] = state.n_of(k) * state.amplitudes[k];
    }
    SpinSummary out;
    const std::vector<cplx>* v[3] = {&vx, &vy, &vz};
    for (int a = 0; a < 3; ++a) out.mean_spin[a] = inner(state.amplitudes, *v[a]).real();
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            // <Ja Jb + Jb Ja>/2 = Re <Ja psi | Jb psi> for Hermitian Ja, Jb
            double sym = inner(*v[a], *v[b]).real();
            double c = sym - out.mean_spin[a] * out.mean_spin[b];
            out.covariance(a, b) = c;
            out.covariance(b, a) = c;
        }
    }
    return out;
}

double squeezing_xi2_from_summary(const SpinSummary& s, int n_particles) {
    const double jnorm = s.mean_spin.norm();
    if (jnorm < default_tolerances().degeneracy_scale * n_particles)
        throw numerical_error("squeezing_xi2: mean spin too short to define an orthogonal plane");
    Eigen::Vector3d nhat = s.mean_spin / jnorm;
    Eigen::Vector3d seed = std::abs(nhat.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitY();
    Eigen::Vector3d e1 = nhat.cross(seed).normalized();
    Eigen::Vector3d e2 = nhat.cross(e1);
    double va = e1.dot(s.covariance * e1);
    double vb = e1.dot(s.covariance * e2);
    double vc = e2.dot(s.covariance * e2);
    // smaller eigenvalue of [[va, vb], [vb, vc]] in closed form
    double half_tr = 0.5 * (va + vc);
    double disc = std::sqrt(0.25 * (va - vc) * (va - vc) + vb * vb);
    double var_min = half_tr - disc;
    return n_particles * var_min / (jnorm * jnorm);
}

double squeezing_xi2(const DickeState& state) {
    return squeezing_xi2_from_summary(spin_summary(state), state.n_particles);
}

}  // namespace oatbell
