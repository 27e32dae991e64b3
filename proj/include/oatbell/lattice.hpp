#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oatbell/dicke.hpp"  // cplx, SpinSummary
#include "oatbell/tolerances.hpp"

namespace oatbell {

enum class Boundary { open, periodic };

const char* boundary_name(Boundary b);
Boundary boundary_from_name(const std::string& name);  // accepts "open" | "periodic"

// Two-species Bose-Hubbard couplings, in recoil-energy units. When built from
// a lattice depth v0 the closed forms apply:
//   J = (4/sqrt(pi)) v0^{3/4} e^{-2 sqrt(v0)},  U_ss' = sqrt(8/pi) a_ss' v0^{1/4}.
struct BHParams {
    int n_sites = 0;
    int n_atoms = 0;
    double v0 = 0.0;  // 0 means "not constructed from a depth"
    double j_hop = 0.0;
    double u_aa = 0.0;
    double u_bb = 0.0;
    double u_ab = 0.0;
    Boundary boundary = Boundary::open;
};

BHParams lattice_params(double v0, double a_aa, double a_ab_ratio);

// OAT mapping chi = (u_aa - u_ab)/M: the twisting rate of the collective spin
// in the hopping-dominated (superfluid) regime.
double effective_chi(const BHParams& params);

// Occupation basis of N bosons over 2M modes (a_1..a_M then b_1..b_M),
// enumerated with the leftmost mode count descending (lexicographic on the
// vector, largest first). index_of ranks by the combinatorial number system.
class FockBasis {
  public:
    FockBasis(int n_atoms, int n_sites, std::size_t dim_cap = 2'000'000);

    int n_atoms() const { return n_; }
    int n_sites() const { return m_; }
    int n_modes() const { return 2 * m_; }
    std::size_t dimension() const { return dim_; }
    const std::vector<std::uint8_t>& occupations() const { return occ_; }  // dim x 2M, row-major
    const std::uint8_t* occupation(std::size_t idx) const { return occ_.data() + idx * n_modes(); }
    std::size_t index_of(const std::uint8_t* occ) const;
    std::uint64_t content_hash() const;  // FNV-1a of the enumerated table

  private:
    int n_, m_;
    std::size_t dim_;
    std::vector<std::uint8_t> occ_;
    std::vector<std::uint64_t> count_;  // count_[n*stride + m]: states of n bosons in m modes
    std::size_t stride_;
};

struct LatticeState {
    const FockBasis* basis = nullptr;
    std::vector<cplx> amplitudes;

    double norm2() const;
};

// Real sparse matrix in compressed-row form. apply() is the parallel hot
// path: rows are partitioned across threads with no shared mutable state.
struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;

    void apply(const cplx* x, cplx* y, int threads = 0) const;
    void apply(const std::vector<cplx>& x, std::vector<cplx>& y, int threads = 0) const;
};

// H = -J sum_<ij>,species (hop + h.c.) + (U_aa/2) sum n_a(n_a-1)
//   + (U_bb/2) sum n_b(n_b-1) + U_ab sum n_a n_b; real symmetric.
CsrMatrix build_hamiltonian(const BHParams& params, const FockBasis& basis);

// Collective pseudo-spin operators: J+ = sum_j a_j^dag b_j (and transpose),
// Jz = (N_a - N_b)/2 as a diagonal.
struct CollectiveOps {
    CsrMatrix jp;               // J+
    CsrMatrix jm;               // J-
    std::vector<double> jz;     // diagonal of Jz
    int n_atoms = 0;

    void apply_jy(const std::vector<cplx>& x, std::vector<cplx>& y, int threads = 0) const;
};

CollectiveOps build_collective(const FockBasis& basis);

// Ground state of the single-species (all atoms in a) Hamiltonian by Lanczos,
// embedded in the two-species basis and rotated by e^{-i(pi/2)Jy} into the
// +x coherent spin state (<Jx> = N/2, <Jz> = 0).
LatticeState prepare_initial(const BHParams& params, const FockBasis& basis, int threads = 0);

// One Krylov (Lanczos) step of e^{-i op dt}. Returns false when the residual
// estimate exceeds tol.krylov_residual (state untouched); the caller halves dt.
using LinearOp = std::function<void(const std::vector<cplx>&, std::vector<cplx>&)>;
bool krylov_step(std::vector<cplx>& psi, const LinearOp& op, double dt, int m,
                 const Tolerances& tol = default_tolerances());

// Propagate to t_final in steps of dt (halving on rejection, at most 20 times),
// invoking sample(t, state) at t = 0, dt_sample, 2 dt_sample, ..., t_final.
struct KrylovOptions {
    double dt = 0.0;       // 0: choose from a Gershgorin bound of the operator
    int m = 30;            // Krylov subspace dimension
    int threads = 0;       // 0: hardware concurrency
};
void evolve_krylov(LatticeState& state, const CsrMatrix& h, double t_final, double dt_sample,
                   const std::function<void(double, const LatticeState&)>& sample,
                   const KrylovOptions& opts = {});

// |<J_+^N>/N!|^2 after the collective y pi/2 pulse, by N successive sparse
// applications of J+ with incremental division by the step counter.
double lattice_bell_correlator(const LatticeState& state, const CollectiveOps& ops, int threads = 0);

SpinSummary lattice_spin_summary(const LatticeState& state, const CollectiveOps& ops, int threads = 0);
double lattice_squeezing_xi2(const LatticeState& state, const CollectiveOps& ops, int threads = 0);

// Checkpoint container: one JSON document with schema version, params, basis
// fingerprint, step index, time, and base64-encoded little-endian complex128
// amplitudes (bit-exact round trip).
struct Checkpoint {
    BHParams params;
    std::uint64_t basis_hash = 0;
    std::size_t dimension = 0;
    std::int64_t step = 0;
    double time = 0.0;
    std::vector<cplx> amplitudes;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace oatbell
