#include "oatbell/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>

#include <Eigen/Dense>

#include "oatbell/errors.hpp"
#include "oatbell/math_util.hpp"
#include "oatbell/sweep.hpp"

namespace oatbell {

const char* boundary_name(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Boundary boundary_from_name(const std::string& name) {
    if (name == "open") return Boundary::open;
    if (name == "periodic") return Boundary::periodic;
    throw std::invalid_argument("boundary must be 'open' or 'periodic', got '" + name + "'");
}

BHParams lattice_params(double v0, double a_aa, double a_ab_ratio) {
    if (!(v0 > 0.0)) throw std::invalid_argument("lattice_params: v0 must be positive");
    BHParams p;
    p.v0 = v0;
    p.j_hop = 4.0 / std::sqrt(std::numbers::pi) * std::pow(v0, 0.75) * std::exp(-2.0 * std::sqrt(v0));
    const double u_unit = std::sqrt(8.0 / std::numbers::pi) * std::pow(v0, 0.25);
    p.u_aa = u_unit * a_aa;
    p.u_bb = p.u_aa;
    p.u_ab = u_unit * a_aa * a_ab_ratio;
    return p;
}

double effective_chi(const BHParams& params) {
    if (params.n_sites < 1) throw std::invalid_argument("effective_chi: params.n_sites must be set");
    return (params.u_aa - params.u_ab) / params.n_sites;
}

namespace {

// ways(n, m) = binom(n + m - 1, n), tabulated by the Pascal-style recurrence
// ways(n, m) = ways(n-1, m) + ways(n, m-1). Safe in 64 bits because every
// entry is bounded by the final (capped) dimension.
std::vector<std::uint64_t> count_table(int n_max, int m_max) {
    std::vector<std::uint64_t> c(std::size_t(n_max + 1) * (m_max + 1), 0);
    for (int m = 0; m <= m_max; ++m) c[m] = 1;
    for (int n = 1; n <= n_max; ++n)
        for (int m = 1; m <= m_max; ++m)
            c[std::size_t(n) * (m_max + 1) + m] =
                c[std::size_t(n - 1) * (m_max + 1) + m] + c[std::size_t(n) * (m_max + 1) + m - 1];
    return c;
}

// All compositions of n into k parts, flattened row-major, ordered with the
// leftmost part descending: from (n,0,...,0) step by moving one boson off the
// rightmost nonzero interior mode and flushing everything past it.
std::vector<std::uint8_t> enumerate_compositions(int n, int k, std::size_t dim) {
    std::vector<std::uint8_t> occ;
    occ.reserve(dim * std::size_t(k));
    std::vector<int> v(std::size_t(k), 0);
    v[0] = n;
    while (true) {
        for (int i = 0; i < k; ++i) occ.push_back(static_cast<std::uint8_t>(v[std::size_t(i)]));
        if (k == 1 || v[std::size_t(k) - 1] == n) break;
        int i = k - 2;
        while (v[std::size_t(i)] == 0) --i;
        int tail = 0;
        for (int j = i + 1; j < k; ++j) {
            tail += v[std::size_t(j)];
            v[std::size_t(j)] = 0;
        }
        --v[std::size_t(i)];
        v[std::size_t(i) + 1] = tail + 1;
    }
    return occ;
}

double vec_norm2(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return s;
}

cplx vec_dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

void vec_axpy(std::vector<cplx>& y, const cplx& a, const std::vector<cplx>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

FockBasis::FockBasis(int n_atoms, int n_sites, std::size_t dim_cap) : n_(n_atoms), m_(n_sites) {
    if (n_atoms < 1 || n_sites < 1)
        throw std::invalid_argument("FockBasis: need n_atoms >= 1 and n_sites >= 1");
    if (n_atoms > 255) throw std::invalid_argument("FockBasis: n_atoms exceeds the occupation byte range");
    const int k = n_modes();
    stride_ = std::size_t(k) + 1;
    count_ = count_table(n_, k);
    const std::uint64_t d = count_[std::size_t(n_) * stride_ + std::size_t(k)];
    if (d > dim_cap)
        throw std::invalid_argument("FockBasis: dimension " + std::to_string(d) + " exceeds the cap " +
                                    std::to_string(dim_cap));
    dim_ = static_cast<std::size_t>(d);
    occ_ = enumerate_compositions(n_, k, dim_);
}

std::size_t FockBasis::index_of(const std::uint8_t* occ) const {
    const int k = n_modes();
    // rank in descending-lex order: states preceding this one carry a larger
    // count at the first differing mode; the hockey-stick identity collapses
    // each position's tally to a single table entry.
    std::uint64_t rank = 0;
    int rem = n_;
    for (int p = 0; p < k - 1 && rem > 0; ++p) {
        const int v = occ[p];
        if (rem - v - 1 >= 0) rank += count_[std::size_t(rem - v - 1) * stride_ + std::size_t(k - p)];
        rem -= v;
    }
    return static_cast<std::size_t>(rank);
}

std::uint64_t FockBasis::content_hash() const {
    const std::int32_t hdr[2] = {n_, m_};
    return fnv1a(occ_.data(), occ_.size(), fnv1a(hdr, sizeof hdr));
}

double LatticeState::norm2() const { return vec_norm2(amplitudes); }

void CsrMatrix::apply(const cplx* x, cplx* y, int threads) const {
    auto run = [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            cplx acc{0.0, 0.0};
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += val[k] * x[col[k]];
            y[r] = acc;
        }
    };
    const int t = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), rows ? rows : 1));
    if (t <= 1) {
        run(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(t));
    const std::size_t block = (rows + std::size_t(t) - 1) / std::size_t(t);
    for (int w = 0; w < t; ++w) {
        const std::size_t r0 = std::min(rows, std::size_t(w) * block);
        const std::size_t r1 = std::min(rows, r0 + block);
        pool.emplace_back(run, r0, r1);
    }
    for (auto& th : pool) th.join();
}

void CsrMatrix::apply(const std::vector<cplx>& x, std::vector<cplx>& y, int threads) const {
    y.resize(x.size());
    apply(x.data(), y.data(), threads);
}

namespace {

// Shared two-pass CSR builder: emit(row, push) must call push(col, val) for
// every off-diagonal entry of that row, in a fixed deterministic order.
template <typename Emit>
CsrMatrix build_csr(std::size_t rows, bool with_diagonal, const Emit& emit) {
    CsrMatrix m;
    m.rows = rows;
    m.row_ptr.assign(rows + 1, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t cnt = with_diagonal ? 1 : 0;
        emit(r, [&](std::size_t, double) { ++cnt; });
        m.row_ptr[r + 1] = m.row_ptr[r] + cnt;
    }
    m.col.resize(m.row_ptr[rows]);
    m.val.resize(m.row_ptr[rows]);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t k = m.row_ptr[r];
        if (with_diagonal) {
            m.col[k] = static_cast<std::int32_t>(r);
            m.val[k] = 0.0;
            ++k;
        }
        emit(r, [&](std::size_t c, double v) {
            m.col[k] = static_cast<std::int32_t>(c);
            m.val[k] = v;
            ++k;
        });
    }
    return m;
}

std::vector<std::pair<int, int>> bond_list(int m_sites, Boundary boundary) {
    std::vector<std::pair<int, int>> bonds;
    for (int i = 0; i + 1 < m_sites; ++i) bonds.emplace_back(i, i + 1);
    // the wrap bond on a 2-site ring would duplicate the open bond
    if (boundary == Boundary::periodic && m_sites > 2) bonds.emplace_back(m_sites - 1, 0);
    return bonds;
}

}  // namespace

CsrMatrix build_hamiltonian(const BHParams& params, const FockBasis& basis) {
    if (params.n_atoms != basis.n_atoms() || params.n_sites != basis.n_sites())
        throw std::invalid_argument("build_hamiltonian: params and basis disagree on N or M");
    const int m_sites = basis.n_sites();
    const int k = basis.n_modes();
    const auto bonds = bond_list(m_sites, params.boundary);
    std::vector<std::uint8_t> tmp(static_cast<std::size_t>(k));

    auto emit = [&](std::size_t r, auto push) {
        const std::uint8_t* occ = basis.occupation(r);
        for (int species = 0; species < 2; ++species) {
            const int off = species * m_sites;
            for (const auto& [s, d] : bonds) {
                for (const auto& [src, dst] : {std::pair{off + s, off + d}, std::pair{off + d, off + s}}) {
                    if (occ[src] == 0) continue;
                    std::memcpy(tmp.data(), occ, std::size_t(k));
                    --tmp[std::size_t(src)];
                    ++tmp[std::size_t(dst)];
                    const double amp = std::sqrt(double(occ[src]) * double(occ[dst] + 1));
                    push(basis.index_of(tmp.data()), -params.j_hop * amp);
                }
            }
        }
    };

    CsrMatrix h = build_csr(basis.dimension(), true, emit);
    for (std::size_t r = 0; r < basis.dimension(); ++r) {
        const std::uint8_t* occ = basis.occupation(r);
        double diag = 0.0;
        for (int j = 0; j < m_sites; ++j) {
            const double na = occ[j], nb = occ[j + m_sites];
            diag += 0.5 * params.u_aa * na * (na - 1.0) + 0.5 * params.u_bb * nb * (nb - 1.0) +
                    params.u_ab * na * nb;
        }
        h.val[h.row_ptr[r]] = diag;
    }
    return h;
}

CollectiveOps build_collective(const FockBasis& basis) {
    const int m_sites = basis.n_sites();
    std::vector<std::uint8_t> tmp(std::size_t(basis.n_modes()));

    // one-boson transfer between the paired modes of every site
    auto transfer = [&](std::size_t r, int from_off, int to_off, auto push) {
        const std::uint8_t* occ = basis.occupation(r);
        for (int j = 0; j < m_sites; ++j) {
            const int src = from_off + j, dst = to_off + j;
            if (occ[src] == 0) continue;
            std::memcpy(tmp.data(), occ, std::size_t(basis.n_modes()));
            --tmp[std::size_t(src)];
            ++tmp[std::size_t(dst)];
            push(basis.index_of(tmp.data()), std::sqrt(double(occ[src]) * double(occ[dst] + 1)));
        }
    };

    // transfer() fills row r with the states reachable by moving one boson
    // src -> dst in |r>, which are the columns c with <r| dst^dag src |c> != 0.
    // J+ = sum_j a_j^dag b_j therefore uses the a -> b move on the row state.
    CollectiveOps ops;
    ops.n_atoms = basis.n_atoms();
    ops.jp = build_csr(basis.dimension(), false,
                       [&](std::size_t r, auto push) { transfer(r, 0, m_sites, push); });
    ops.jm = build_csr(basis.dimension(), false,
                       [&](std::size_t r, auto push) { transfer(r, m_sites, 0, push); });
    ops.jz.resize(basis.dimension());
    for (std::size_t r = 0; r < basis.dimension(); ++r) {
        const std::uint8_t* occ = basis.occupation(r);
        int na = 0;
        for (int j = 0; j < m_sites; ++j) na += occ[j];
        ops.jz[r] = 0.5 * (2 * na - basis.n_atoms());
    }
    return ops;
}

void CollectiveOps::apply_jy(const std::vector<cplx>& x, std::vector<cplx>& y, int threads) const {
    std::vector<cplx> tp, tm;
    jp.apply(x, tp, threads);
    jm.apply(x, tm, threads);
    y.resize(x.size());
    const cplx minus_half_i{0.0, -0.5};
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = minus_half_i * (tp[i] - tm[i]);
}

bool krylov_step(std::vector<cplx>& psi, const LinearOp& op, double dt, int m, const Tolerances& tol) {
    if (m < 2) throw std::invalid_argument("krylov_step: subspace dimension must be >= 2");
    const std::size_t d = psi.size();
    const double beta0 = std::sqrt(vec_norm2(psi));
    if (!(beta0 > 0.0) || !std::isfinite(beta0))
        throw numerical_error("krylov_step: state norm is zero or not finite");

    std::vector<std::vector<cplx>> v;
    v.reserve(std::size_t(m) + 1);
    v.push_back(psi);
    for (cplx& z : v[0]) z /= beta0;

    std::vector<double> alpha, beta;
    std::vector<cplx> w(d);
    int k = m;
    bool invariant = false;
    for (int j = 0; j < m; ++j) {
        op(v[std::size_t(j)], w);
        if (j > 0) vec_axpy(w, cplx{-beta[std::size_t(j) - 1], 0.0}, v[std::size_t(j) - 1]);
        const double a = vec_dot(v[std::size_t(j)], w).real();
        alpha.push_back(a);
        vec_axpy(w, cplx{-a, 0.0}, v[std::size_t(j)]);
        // no re-orthogonalization: at short steps the basis stays numerically
        // orthogonal, and the norm-drift check below rejects any step where
        // orthogonality loss starts to matter
        const double b = std::sqrt(vec_norm2(w));
        if (b <= 1e-14) {  // invariant subspace: the exponential is exact in it
            k = j + 1;
            invariant = true;
            break;
        }
        beta.push_back(b);
        v.push_back(w);
        for (cplx& z : v.back()) z /= b;
    }

    Eigen::VectorXd dia(k), off(std::max(k - 1, 0));
    for (int j = 0; j < k; ++j) dia[j] = alpha[std::size_t(j)];
    for (int j = 0; j + 1 < k; ++j) off[j] = beta[std::size_t(j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(dia, off);
    if (es.info() != Eigen::Success) throw numerical_error("krylov_step: tridiagonal eigensolver failed");

    // u = exp(-i T dt) e1 in the Krylov basis
    const Eigen::MatrixXd& s = es.eigenvectors();
    std::vector<cplx> u(std::size_t(k), cplx{0.0, 0.0});
    for (int l = 0; l < k; ++l) {
        const cplx ph = std::polar(s(0, l), -es.eigenvalues()[l] * dt);
        for (int j = 0; j < k; ++j) u[std::size_t(j)] += s(j, l) * ph;
    }

    // comparisons are inverted so that NaN (an operator producing non-finite
    // values) counts as a rejection rather than slipping through
    const double residual = invariant ? 0.0 : beta[std::size_t(k) - 1] * std::abs(u[std::size_t(k) - 1]);
    if (!(residual <= tol.krylov_residual)) return false;

    std::vector<cplx> out(d, cplx{0.0, 0.0});
    for (int j = 0; j < k; ++j) vec_axpy(out, beta0 * u[std::size_t(j)], v[std::size_t(j)]);
    const double drift = std::abs(std::sqrt(vec_norm2(out)) - beta0);
    if (!(drift <= tol.krylov_norm_drift * beta0)) return false;
    psi.swap(out);
    return true;
}

namespace {

double gershgorin_bound(const CsrMatrix& h) {
    double g = 0.0;
    for (std::size_t r = 0; r < h.rows; ++r) {
        double s = 0.0;
        for (std::size_t k = h.row_ptr[r]; k < h.row_ptr[r + 1]; ++k) s += std::abs(h.val[k]);
        g = std::max(g, s);
    }
    return g;
}

// e^{-i angle Jy} on a raw amplitude vector, Krylov-stepped with halving.
void collective_y_pulse(std::vector<cplx>& amps, const CollectiveOps& ops, double angle, int threads) {
    if (angle == 0.0) return;
    LinearOp op = [&](const std::vector<cplx>& x, std::vector<cplx>& y) { ops.apply_jy(x, y, threads); };
    double remaining = angle;
    double dt = angle;
    int halvings = 0;
    while (remaining > 1e-14 * std::abs(angle)) {
        const double step = std::min(dt, remaining);
        if (krylov_step(amps, op, step, 30, default_tolerances())) {
            remaining -= step;
        } else {
            dt = 0.5 * step;
            if (++halvings > 40) throw numerical_error("collective rotation: Krylov step kept being rejected");
        }
    }
}

}  // namespace

LatticeState prepare_initial(const BHParams& params, const FockBasis& basis, int threads) {
    if (params.n_atoms != basis.n_atoms() || params.n_sites != basis.n_sites())
        throw std::invalid_argument("prepare_initial: params and basis disagree on N or M");
    const int n = basis.n_atoms();
    const int m_sites = basis.n_sites();

    // single-species sector: N bosons over the a modes only
    const auto counts = count_table(n, m_sites);
    const std::size_t dim_a = counts[std::size_t(n) * std::size_t(m_sites + 1) + std::size_t(m_sites)];
    const auto occ_a = enumerate_compositions(n, m_sites, dim_a);
    std::unordered_map<std::string, std::size_t> rank_a;
    rank_a.reserve(dim_a);
    for (std::size_t r = 0; r < dim_a; ++r)
        rank_a.emplace(std::string(reinterpret_cast<const char*>(occ_a.data() + r * std::size_t(m_sites)),
                                   std::size_t(m_sites)),
                       r);

    const auto bonds = bond_list(m_sites, params.boundary);
    std::vector<std::uint8_t> tmp(static_cast<std::size_t>(m_sites));
    auto emit = [&](std::size_t r, auto push) {
        const std::uint8_t* occ = occ_a.data() + r * std::size_t(m_sites);
        for (const auto& [s, d] : bonds) {
            for (const auto& [src, dst] : {std::pair{s, d}, std::pair{d, s}}) {
                if (occ[src] == 0) continue;
                std::memcpy(tmp.data(), occ, std::size_t(m_sites));
                --tmp[std::size_t(src)];
                ++tmp[std::size_t(dst)];
                const auto it = rank_a.find(
                    std::string(reinterpret_cast<const char*>(tmp.data()), std::size_t(m_sites)));
                const double amp = std::sqrt(double(occ[src]) * double(occ[dst] + 1));
                push(it->second, -params.j_hop * amp);
            }
        }
    };
    CsrMatrix h_a = build_csr(dim_a, true, emit);
    for (std::size_t r = 0; r < dim_a; ++r) {
        const std::uint8_t* occ = occ_a.data() + r * std::size_t(m_sites);
        double diag = 0.0;
        for (int j = 0; j < m_sites; ++j) diag += 0.5 * params.u_aa * double(occ[j]) * (double(occ[j]) - 1.0);
        h_a.val[h_a.row_ptr[r]] = diag;
    }

    // ground state of h_a: Lanczos with full re-orthogonalization; the basis
    // vector (N,0,...,0) has nonzero overlap with the nodeless ground state
    std::vector<double> ground(dim_a, 0.0);
    if (h_a.col.size() == h_a.rows) {  // diagonal matrix (j_hop = 0): pick the lowest entry
        std::size_t best = 0;
        for (std::size_t r = 1; r < dim_a; ++r)
            if (h_a.val[h_a.row_ptr[r]] < h_a.val[h_a.row_ptr[best]]) best = r;
        ground[best] = 1.0;
    } else if (dim_a == 1) {
        ground[0] = 1.0;
    } else {
        const int max_iter = static_cast<int>(std::min<std::size_t>(dim_a, 300));
        std::vector<std::vector<double>> v;
        v.reserve(std::size_t(max_iter) + 1);
        v.emplace_back(dim_a, 0.0);
        v[0][0] = 1.0;
        std::vector<double> alpha, beta;
        std::vector<double> w(dim_a);
        std::vector<cplx> xc(dim_a), yc(dim_a);
        bool done = false;
        for (int j = 0; j < max_iter && !done; ++j) {
            for (std::size_t i = 0; i < dim_a; ++i) xc[i] = v[std::size_t(j)][i];
            h_a.apply(xc.data(), yc.data(), 1);
            for (std::size_t i = 0; i < dim_a; ++i) w[i] = yc[i].real();
            if (j > 0)
                for (std::size_t i = 0; i < dim_a; ++i) w[i] -= beta[std::size_t(j) - 1] * v[std::size_t(j) - 1][i];
            double a = 0.0;
            for (std::size_t i = 0; i < dim_a; ++i) a += v[std::size_t(j)][i] * w[i];
            alpha.push_back(a);
            for (std::size_t i = 0; i < dim_a; ++i) w[i] -= a * v[std::size_t(j)][i];
            for (int p = 0; p <= j; ++p) {
                double c = 0.0;
                for (std::size_t i = 0; i < dim_a; ++i) c += v[std::size_t(p)][i] * w[i];
                for (std::size_t i = 0; i < dim_a; ++i) w[i] -= c * v[std::size_t(p)][i];
            }
            double b = 0.0;
            for (std::size_t i = 0; i < dim_a; ++i) b += w[i] * w[i];
            b = std::sqrt(b);

            const int k = j + 1;
            Eigen::VectorXd dia(k), off(std::max(k - 1, 0));
            for (int i = 0; i < k; ++i) dia[i] = alpha[std::size_t(i)];
            for (int i = 0; i + 1 < k; ++i) off[i] = beta[std::size_t(i)];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
            es.computeFromTridiagonal(dia, off);
            const double scale = std::max(1.0, std::abs(es.eigenvalues()[0]));
            if (b * std::abs(es.eigenvectors()(k - 1, 0)) <= 1e-11 * scale || b <= 1e-14 || k == max_iter) {
                if (k == max_iter && b * std::abs(es.eigenvectors()(k - 1, 0)) > 1e-11 * scale)
                    throw numerical_error("prepare_initial: ground-state Lanczos did not converge");
                for (int p = 0; p < k; ++p)
                    for (std::size_t i = 0; i < dim_a; ++i)
                        ground[i] += es.eigenvectors()(p, 0) * v[std::size_t(p)][i];
                done = true;
            } else {
                beta.push_back(b);
                v.emplace_back(dim_a);
                for (std::size_t i = 0; i < dim_a; ++i) v.back()[i] = w[i] / b;
            }
        }
        double g2 = 0.0;
        for (double x : ground) g2 += x * x;
        const double inv = 1.0 / std::sqrt(g2);
        for (double& x : ground) x *= inv;
    }

    // embed into the two-species basis (all b modes empty) and rotate to +x
    LatticeState state;
    state.basis = &basis;
    state.amplitudes.assign(basis.dimension(), cplx{0.0, 0.0});
    std::vector<std::uint8_t> full(std::size_t(basis.n_modes()), 0);
    for (std::size_t r = 0; r < dim_a; ++r) {
        std::memcpy(full.data(), occ_a.data() + r * std::size_t(m_sites), std::size_t(m_sites));
        state.amplitudes[basis.index_of(full.data())] = ground[r];
    }
    const CollectiveOps ops = build_collective(basis);
    collective_y_pulse(state.amplitudes, ops, 0.5 * std::numbers::pi, threads);
    return state;
}

void evolve_krylov(LatticeState& state, const CsrMatrix& h, double t_final, double dt_sample,
                   const std::function<void(double, const LatticeState&)>& sample,
                   const KrylovOptions& opts) {
    if (!(t_final >= 0.0)) throw std::invalid_argument("evolve_krylov: t_final must be >= 0");
    if (!(dt_sample > 0.0)) throw std::invalid_argument("evolve_krylov: dt_sample must be > 0");
    if (state.amplitudes.size() != h.rows) throw std::invalid_argument("evolve_krylov: state/operator size mismatch");

    LinearOp op = [&](const std::vector<cplx>& x, std::vector<cplx>& y) { h.apply(x, y, opts.threads); };
    double dt = opts.dt;
    if (dt <= 0.0) {
        const double g = gershgorin_bound(h);
        // keep ||H|| dt small enough that the m-dimensional subspace resolves
        // the exponential to below the residual tolerance
        dt = g > 0.0 ? (opts.m / 6.0) / g : dt_sample;
    }

    sample(0.0, state);
    double t = 0.0;
    long next = 1;
    int rejections = 0;
    while (t < t_final * (1.0 - 1e-15)) {
        const double target = std::min(double(next) * dt_sample, t_final);
        const double step = std::min(dt, target - t);
        if (krylov_step(state.amplitudes, op, step, opts.m, default_tolerances())) {
            t += step;
            rejections = 0;
            if (t >= target - 1e-12 * std::max(1.0, target)) {
                t = target;
                sample(t, state);
                ++next;
            }
        } else {
            dt = 0.5 * step;
            if (++rejections > 20) throw numerical_error("evolve_krylov: step rejected after 20 halvings");
        }
    }
}

double lattice_bell_correlator(const LatticeState& state, const CollectiveOps& ops, int threads) {
    const int n = ops.n_atoms;
    std::vector<cplx> rot = state.amplitudes;
    collective_y_pulse(rot, ops, 0.5 * std::numbers::pi, threads);
    std::vector<cplx> v = rot, next(rot.size());
    for (int step = 1; step <= n; ++step) {
        ops.jp.apply(v, next, threads);
        const double inv = 1.0 / double(step);
        for (cplx& z : next) z *= inv;
        v.swap(next);
    }
    return std::norm(vec_dot(rot, v));
}

SpinSummary lattice_spin_summary(const LatticeState& state, const CollectiveOps& ops, int threads) {
    const auto& psi = state.amplitudes;
    const std::size_t d = psi.size();
    std::vector<cplx> vp, vm;
    ops.jp.apply(psi, vp, threads);
    ops.jm.apply(psi, vm, threads);
    std::vector<std::vector<cplx>> comp(3, std::vector<cplx>(d));
    const cplx minus_half_i{0.0, -0.5};
    for (std::size_t i = 0; i < d; ++i) {
        comp[0][i] = 0.5 * (vp[i] + vm[i]);
        comp[1][i] = minus_half_i * (vp[i] - vm[i]);
        comp[2][i] = ops.jz[i] * psi[i];
    }
    SpinSummary s;
    for (int a = 0; a < 3; ++a) s.mean_spin[a] = vec_dot(psi, comp[std::size_t(a)]).real();
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            const double c =
                0.5 * (vec_dot(comp[std::size_t(a)], comp[std::size_t(b)]) +
                       vec_dot(comp[std::size_t(b)], comp[std::size_t(a)]))
                          .real() -
                s.mean_spin[a] * s.mean_spin[b];
            s.covariance(a, b) = c;
            s.covariance(b, a) = c;
        }
    return s;
}

double lattice_squeezing_xi2(const LatticeState& state, const CollectiveOps& ops, int threads) {
    return squeezing_xi2_from_summary(lattice_spin_summary(state, ops, threads), ops.n_atoms);
}

}  // namespace oatbell
