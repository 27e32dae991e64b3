// oatbell: sweeps, classification reports, and cross-model comparison for
// collective-spin Bell correlators. Subcommands:
//   oat       exact twisted-state correlator sweep over tau
//   lattice   two-species Bose-Hubbard trajectory with collective observables
//   compare   lattice sweep plus a summary block scoring it against the
//             twisting model
//   classify  depth report for a given correlator value
//   lhv       brute-force local-hidden-variable maximum (small N)
// Exit codes: 0 success, 2 usage/domain error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oatbell/analytic.hpp"
#include "oatbell/bell.hpp"
#include "oatbell/dicke.hpp"
#include "oatbell/errors.hpp"
#include "oatbell/lattice.hpp"
#include "oatbell/math_util.hpp"
#include "oatbell/sweep.hpp"
#include "oatbell/version.hpp"

namespace {

using oatbell::cplx;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct GridFlags {
    double start = 0.0;
    double stop = 0.5 * std::numbers::pi;
    int points = 0;  // per-command default applied later
    std::vector<double> list;
};

std::vector<double> build_grid(const GridFlags& g, int default_points, bool allow_list) {
    if (!g.list.empty()) {
        if (!allow_list)
            throw std::invalid_argument("this command samples a uniform grid; use --tau-start/stop/points");
        for (std::size_t i = 0; i + 1 < g.list.size(); ++i)
            if (!(g.list[i] < g.list[i + 1]))
                throw std::invalid_argument("--tau-list must be strictly increasing");
        for (double v : g.list)
            if (!std::isfinite(v)) throw std::invalid_argument("--tau-list entries must be finite");
        return g.list;
    }
    const int points = g.points > 0 ? g.points : default_points;
    if (points < 2) throw std::invalid_argument("--tau-points must be at least 2");
    if (!(g.stop > g.start)) throw std::invalid_argument("--tau-stop must exceed --tau-start");
    if (!std::isfinite(g.start) || !std::isfinite(g.stop))
        throw std::invalid_argument("grid bounds must be finite");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double h = (g.stop - g.start) / (points - 1);
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = g.start + i * h;
    grid.back() = g.stop;
    return grid;
}

void write_text(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot open output file '" + out_path + "'");
    f << text;
    if (!f) throw oatbell::numerical_error("short write to '" + out_path + "'");
}

void write_plot_script(const std::string& out_path, const std::string& body) {
    if (out_path.empty()) return;
    std::ofstream f(out_path + ".gnuplot", std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot open plot script '" + out_path + ".gnuplot'");
    f << "# gnuplot companion for " << out_path << "\n"
      << "set datafile separator ','\n"
      << "set datafile commentschars '#'\n"
      << body;
}

// ---------------------------------------------------------------- oat sweep

struct OatOpts {
    int n = 0;
    GridFlags grid;
    int threads = 0;
    std::string out, format = "csv";
};

struct OatRow {
    double tau, correlator, log2_correlator, gaussian, revival, xi2;
    int bell_depth, ent_depth;
};

int run_oat(const OatOpts& o) {
    const auto grid = build_grid(o.grid, 201, true);
    const std::function<OatRow(std::size_t)> eval = [&](std::size_t i) {
        OatRow r{};
        r.tau = grid[i];
        const double ln_e = oatbell::log_correlator_oat_highprec(o.n, r.tau);
        r.log2_correlator = ln_e / std::numbers::ln2;
        r.correlator = std::exp(ln_e);
        r.gaussian = oatbell::gaussian_correlator(o.n, r.tau);
        const auto q = oatbell::match_revival_q(o.n, r.tau);
        r.revival = q ? oatbell::revival_correlator(*q) : kNaN;
        try {
            r.xi2 = oatbell::squeezing_xi2(oatbell::evolve_oat(oatbell::make_css(o.n), r.tau));
        } catch (const oatbell::numerical_error&) {
            r.xi2 = kNaN;  // mean spin degenerate (deep over-twisting): no squeezing axis
        }
        r.bell_depth = oatbell::bell_depth_from_log2(r.log2_correlator, o.n);
        r.ent_depth = oatbell::entanglement_depth_from_log2(r.log2_correlator, o.n);
        return r;
    };
    const auto rows = oatbell::ordered_parallel_map<OatRow>(grid.size(), o.threads, eval);

    static const char* cols =
        "tau,correlator,log2_correlator,gaussian,revival_prediction,xi2,bell_depth,entanglement_depth";
    if (o.format == "json") {
        json j{{"schema", oatbell::csv_schema_version},
               {"tool", "oatbell"},
               {"version", oatbell::version_string},
               {"command", "oat"},
               {"n", o.n}};
        j["columns"] = {"tau", "correlator", "log2_correlator", "gaussian", "revival_prediction",
                        "xi2",  "bell_depth", "entanglement_depth"};
        auto& out = j["rows"] = json::array();
        for (const auto& r : rows)
            out.push_back({r.tau, r.correlator, r.log2_correlator, r.gaussian, r.revival, r.xi2,
                           r.bell_depth, r.ent_depth});
        write_text(o.out, j.dump(1) + "\n");
        return 0;
    }
    std::ostringstream s;
    s << "# oatbell csv schema " << oatbell::csv_schema_version << " version " << oatbell::version_string
      << " command oat n " << o.n << "\n# columns: " << cols << "\n";
    for (const auto& r : rows)
        s << g17(r.tau) << ',' << g17(r.correlator) << ',' << g17(r.log2_correlator) << ','
          << g17(r.gaussian) << ',' << g17(r.revival) << ',' << g17(r.xi2) << ',' << r.bell_depth << ','
          << r.ent_depth << '\n';
    write_text(o.out, s.str());
    write_plot_script(o.out, "set logscale y\nset xlabel 'tau'\nset ylabel 'correlator'\n"
                             "plot '" + o.out + "' using 1:2 with lines title 'exact', \\\n"
                             "     '" + o.out + "' using 1:4 with lines title 'gaussian', \\\n"
                             "     '" + o.out + "' using 1:5 with points pointtype 7 title 'revival'\n");
    return 0;
}

// ------------------------------------------------------- lattice / compare

struct LatticeOpts {
    int n = 4, m_sites = 4;
    double v0 = 4.0, a_aa = 0.03, uab_ratio = 0.95;
    std::string boundary = "open";
    GridFlags grid;
    double dt = 0.0;
    int krylov_dim = 30;
    int threads = 0;
    int checkpoint_every = 0;
    std::string resume;
    std::string out, format = "csv";
    bool with_summary = false;  // compare adds the cross-model block
};

struct LatticeRow {
    double t, tau_eff, corr_lattice, corr_oat, xi2_lattice, xi2_oat;
    int bell_depth, ent_depth;
};

double oat_reference(int n, double tau) {
    if (tau == 0.0) return 0.0;
    return std::exp(oatbell::log_correlator_oat_highprec(n, tau));
}

int run_lattice(const LatticeOpts& o) {
    if (o.grid.start != 0.0)
        throw std::invalid_argument("lattice sweeps start at 0; --tau-start must be 0");
    const auto grid = build_grid(o.grid, 33, false);
    if (o.checkpoint_every > 0 && o.out.empty())
        throw std::invalid_argument("--checkpoint-every needs --out to derive the checkpoint path");

    oatbell::BHParams params = oatbell::lattice_params(o.v0, o.a_aa, o.uab_ratio);
    params.n_sites = o.m_sites;
    params.n_atoms = o.n;
    params.boundary = oatbell::boundary_from_name(o.boundary);
    const double chi = oatbell::effective_chi(params);
    // chi maps twisting angle to physical time; with chi = 0 the grid is read
    // directly as physical time (tau_eff stays 0: no twisting happens)
    const double t_scale = chi > 0.0 ? 1.0 / chi : 1.0;

    const oatbell::FockBasis basis(o.n, o.m_sites);
    const oatbell::CsrMatrix h = oatbell::build_hamiltonian(params, basis);
    const oatbell::CollectiveOps ops = oatbell::build_collective(basis);

    const double dt_sample = (grid[1] - grid[0]) * t_scale;
    const double t_final = grid.back() * t_scale;
    const std::string ck_path = o.out.empty() ? "" : o.out + ".ck.json";

    oatbell::LatticeState state;
    std::size_t first_row = 0;
    if (!o.resume.empty()) {
        const oatbell::Checkpoint ck = oatbell::load_checkpoint(o.resume);
        if (ck.params.n_atoms != params.n_atoms || ck.params.n_sites != params.n_sites ||
            ck.params.j_hop != params.j_hop || ck.params.u_aa != params.u_aa ||
            ck.params.u_bb != params.u_bb || ck.params.u_ab != params.u_ab ||
            ck.params.boundary != params.boundary)
            throw std::invalid_argument("--resume: checkpoint parameters do not match this run");
        if (ck.basis_hash != basis.content_hash() || ck.dimension != basis.dimension())
            throw std::invalid_argument("--resume: checkpoint basis does not match this run");
        if (ck.step < 0 || static_cast<std::size_t>(ck.step) >= grid.size())
            throw std::invalid_argument("--resume: checkpoint step outside the requested grid");
        first_row = static_cast<std::size_t>(ck.step);
        state.basis = &basis;
        state.amplitudes = ck.amplitudes;
    } else {
        state = oatbell::prepare_initial(params, basis, o.threads);
    }

    std::vector<LatticeRow> rows;
    rows.reserve(grid.size() - first_row);
    const double t_offset = double(first_row) * dt_sample;
    auto sample = [&](double t_rel, const oatbell::LatticeState& st) {
        const std::size_t k = first_row + rows.size();
        const double t = t_offset + t_rel;
        LatticeRow r{};
        r.t = t;
        r.tau_eff = t * chi;
        r.corr_lattice = oatbell::lattice_bell_correlator(st, ops, o.threads);
        r.corr_oat = oat_reference(o.n, r.tau_eff);
        try {
            r.xi2_lattice = oatbell::lattice_squeezing_xi2(st, ops, o.threads);
        } catch (const oatbell::numerical_error&) {
            r.xi2_lattice = kNaN;
        }
        try {
            r.xi2_oat = oatbell::squeezing_xi2(
                oatbell::evolve_oat(oatbell::make_css(o.n), r.tau_eff));
        } catch (const oatbell::numerical_error&) {
            r.xi2_oat = kNaN;
        }
        r.bell_depth = oatbell::bell_depth(r.corr_lattice, o.n);
        r.ent_depth = oatbell::entanglement_depth(r.corr_lattice, o.n);
        rows.push_back(r);
        if (!ck_path.empty() && o.checkpoint_every > 0 &&
            (k == grid.size() - 1 || (k > first_row && (k - first_row) % std::size_t(o.checkpoint_every) == 0))) {
            oatbell::Checkpoint ck;
            ck.params = params;
            ck.basis_hash = basis.content_hash();
            ck.dimension = basis.dimension();
            ck.step = static_cast<std::int64_t>(k);
            ck.time = t;
            ck.amplitudes = st.amplitudes;
            oatbell::save_checkpoint(ck_path, ck);
        }
    };

    oatbell::KrylovOptions kopts;
    kopts.dt = o.dt;
    kopts.m = o.krylov_dim;
    kopts.threads = o.threads;
    oatbell::evolve_krylov(state, h, t_final - t_offset, dt_sample, sample, kopts);

    // cross-model summary: where each model crosses the 2^-N certification
    // bound, and how far apart the two correlators sit past that point
    json summary;
    if (o.with_summary) {
        const double bound_log2 = -double(o.n);
        double crossing = kNaN;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double a = rows[i - 1].corr_lattice, b = rows[i].corr_lattice;
            if (std::log2(b) >= bound_log2 && std::log2(a) < bound_log2) {
                const double la = std::log2(a), lb = std::log2(b);
                if (std::isfinite(la)) {
                    const double f = (bound_log2 - la) / (lb - la);
                    crossing = rows[i - 1].tau_eff + f * (rows[i].tau_eff - rows[i - 1].tau_eff);
                } else {
                    crossing = rows[i].tau_eff;
                }
                break;
            }
        }
        double tau_c_oat = kNaN;
        try {
            tau_c_oat = oatbell::tau_crit_exact(o.n);
        } catch (const std::exception&) {
        }
        double max_abs_lnratio = 0.0;
        bool any = false;
        for (const auto& r : rows) {
            if (!(r.tau_eff > tau_c_oat) || !(r.corr_lattice > 0.0) || !(r.corr_oat > 0.0)) continue;
            max_abs_lnratio = std::max(max_abs_lnratio, std::abs(std::log(r.corr_lattice / r.corr_oat)));
            any = true;
        }
        summary = {{"chi", chi},
                   {"j_hop", params.j_hop},
                   {"u_aa", params.u_aa},
                   {"u_ab", params.u_ab},
                   {"crossing_tau_lattice", crossing},
                   {"crossing_tau_oat", tau_c_oat},
                   {"crossing_rel_dev",
                    std::isfinite(crossing) && std::isfinite(tau_c_oat)
                        ? std::abs(crossing - tau_c_oat) / tau_c_oat
                        : kNaN},
                   {"max_abs_ln_ratio_past_crossing", any ? max_abs_lnratio : kNaN}};
    }

    static const char* cols =
        "t,tau_eff,correlator_lattice,correlator_oat,xi2_lattice,xi2_oat,bell_depth,entanglement_depth";
    const char* cmd = o.with_summary ? "compare" : "lattice";
    if (o.format == "json") {
        json j{{"schema", oatbell::csv_schema_version},
               {"tool", "oatbell"},
               {"version", oatbell::version_string},
               {"command", cmd},
               {"n", o.n},
               {"m_sites", o.m_sites},
               {"params",
                {{"v0", params.v0},
                 {"j_hop", params.j_hop},
                 {"u_aa", params.u_aa},
                 {"u_bb", params.u_bb},
                 {"u_ab", params.u_ab},
                 {"chi", chi},
                 {"boundary", oatbell::boundary_name(params.boundary)}}}};
        j["columns"] = {"t", "tau_eff", "correlator_lattice", "correlator_oat",
                        "xi2_lattice", "xi2_oat", "bell_depth", "entanglement_depth"};
        auto& out = j["rows"] = json::array();
        for (const auto& r : rows)
            out.push_back({r.t, r.tau_eff, r.corr_lattice, r.corr_oat, r.xi2_lattice, r.xi2_oat,
                           r.bell_depth, r.ent_depth});
        if (o.with_summary) j["summary"] = summary;
        write_text(o.out, j.dump(1) + "\n");
        return 0;
    }
    std::ostringstream s;
    s << "# oatbell csv schema " << oatbell::csv_schema_version << " version " << oatbell::version_string
      << " command " << cmd << " n " << o.n << " m " << o.m_sites << "\n"
      << "# params v0 " << g17(params.v0) << " j_hop " << g17(params.j_hop) << " u_aa "
      << g17(params.u_aa) << " u_ab " << g17(params.u_ab) << " chi " << g17(chi) << " boundary "
      << oatbell::boundary_name(params.boundary) << "\n# columns: " << cols << "\n";
    for (const auto& r : rows)
        s << g17(r.t) << ',' << g17(r.tau_eff) << ',' << g17(r.corr_lattice) << ',' << g17(r.corr_oat)
          << ',' << g17(r.xi2_lattice) << ',' << g17(r.xi2_oat) << ',' << r.bell_depth << ','
          << r.ent_depth << '\n';
    if (o.with_summary)
        for (const auto& [key, value] : summary.items())
            s << "# summary " << key << ' '
              << (value.is_number() ? g17(value.get<double>()) : value.dump()) << '\n';
    write_text(o.out, s.str());
    write_plot_script(o.out, "set logscale y\nset xlabel 'tau_eff'\nset ylabel 'correlator'\n"
                             "plot '" + o.out + "' using 2:3 with linespoints title 'lattice', \\\n"
                             "     '" + o.out + "' using 2:4 with lines title 'twisting model'\n");
    return 0;
}

// ------------------------------------------------------------ classify/lhv

int run_classify(double e_value, int n, const std::string& format, const std::string& out) {
    if (!(e_value >= 0.0) || e_value > 0.25 + 1e-9)
        throw std::invalid_argument("classify: E must lie in [0, 0.25]");
    const oatbell::BellReport rep = oatbell::make_bell_report(e_value, n);
    const int bk = rep.bell_depth, ek = rep.entanglement_depth;
    const double bell_thr = bk >= 3 ? 0.125 * std::exp2(-double(n - bk)) : kNaN;
    const double ent_thr = ek >= 2 ? 0.0625 * std::exp2(-2.0 * (n - ek)) : kNaN;

    if (format == "json") {
        json j{{"schema", oatbell::csv_schema_version},
               {"tool", "oatbell"},
               {"version", oatbell::version_string},
               {"command", "classify"},
               {"n", n},
               {"correlator", e_value},
               {"lhv_bound", rep.lhv_bound},
               {"separable_bound", rep.separable_bound},
               {"bell_depth", bk},
               {"bell_depth_threshold", bell_thr},
               {"entanglement_depth", ek},
               {"entanglement_depth_threshold", ent_thr}};
        write_text(out, j.dump(1) + "\n");
        return 0;
    }
    std::ostringstream s;
    s << "correlator E = " << g17(e_value) << " for N = " << n << "\n"
      << "bounds:\n"
      << "  lhv bound        2^-N = " << g17(rep.lhv_bound) << "   "
      << (e_value > rep.lhv_bound ? "exceeded: no local hidden-variable model reproduces E"
                                  : "not exceeded: E is consistent with local models")
      << "\n"
      << "  separable bound  4^-N = " << g17(rep.separable_bound) << "   "
      << (e_value > rep.separable_bound ? "exceeded: the state is entangled"
                                        : "not exceeded: E is consistent with separable states")
      << "\n";
    if (bk >= 3)
        s << "  bell threshold   (1/8) 2^-(N-k)  at k = " << bk << " is " << g17(bell_thr) << "\n";
    if (ek >= 2)
        s << "  depth threshold  (1/16) 4^-(N-k) at k = " << ek << " is " << g17(ent_thr) << "\n";
    s << "conclusions:\n";
    if (bk >= 3)
        s << "  bell_depth = " << bk << ": E > (1/8) 2^-(N-k) holds up to k = " << bk
          << ", so at least " << bk << " of the " << n << " particles are Bell correlated"
          << (bk == n ? " (all of them)" : "") << "\n";
    else
        s << "  bell_depth = 0: E <= 2^-N certifies no Bell correlation\n";
    if (ek >= 2)
        s << "  entanglement_depth = " << ek << ": E > (1/16) 4^-(N-k) holds up to k = " << ek
          << ", so the state carries at least " << ek << "-particle entanglement"
          << (ek == n ? " (genuinely N-particle)" : "") << "\n";
    else
        s << "  entanglement_depth = 1: E <= 4^-N is consistent with a fully separable state\n";
    write_text(out, s.str());
    return 0;
}

int run_lhv(int n, const std::string& format, const std::string& out) {
    const double maximum = oatbell::lhv_max_bruteforce(n);
    const double bound = std::exp2(-double(n));
    const bool equal = maximum == bound;
    if (format == "json") {
        json j{{"schema", oatbell::csv_schema_version},
               {"tool", "oatbell"},
               {"version", oatbell::version_string},
               {"command", "lhv"},
               {"n", n},
               {"strategies", std::uint64_t(1) << (2 * n)},
               {"maximum", maximum},
               {"bound", bound},
               {"equal", equal}};
        write_text(out, j.dump(1) + "\n");
    } else {
        std::ostringstream s;
        s << "deterministic local strategies: " << (std::uint64_t(1) << (2 * n)) << "\n"
          << "brute-force maximum of |<s+_1 ... s+_N>|^2 = " << g17(maximum) << "\n"
          << "certification bound 2^-N               = " << g17(bound) << "\n"
          << (equal ? "maximum equals the bound exactly\n" : "MISMATCH against the bound\n");
        write_text(out, s.str());
    }
    if (!equal) throw oatbell::numerical_error("lhv maximum does not equal 2^-N");
    return 0;
}

void add_common(CLI::App* sub, std::string& out, std::string& format, int& threads) {
    sub->add_option("--out", out, "output file (default: stdout)");
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();
    sub->add_option("--config", "flat key=value config file (flags win)");
}

// CLI11 only reads config files attached to the top-level app, never ones attached to a
// subcommand, so "--config" is expanded by hand before parsing: each key=value line whose
// flag is absent from the command line is appended as "--key=value".  Appending (instead of
// overriding) keeps CLI11's duplicate-flag detection intact and gives explicit flags
// priority.  Returns an error message, or nullopt on success.
std::optional<std::string> expand_config_args(const CLI::App& app, std::vector<std::string>& args) {
    if (args.empty()) return std::nullopt;
    const CLI::App* sub = app.get_subcommand_no_throw(args.front());
    if (sub == nullptr) return std::nullopt;  // parse() reports the bad subcommand itself

    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return std::nullopt;

    std::ifstream file(path);
    if (!file) return "cannot open config file: " + path;

    const auto given = [&args](const std::string& flag) {
        for (std::size_t i = 1; i < args.size(); ++i)
            if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
        return false;
    };

    std::string line;
    for (int lineno = 1; std::getline(file, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = CLI::detail::trim_copy(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            return path + ":" + std::to_string(lineno) + ": expected key=value";
        const std::string key = CLI::detail::trim_copy(line.substr(0, eq));
        const std::string value = CLI::detail::trim_copy(line.substr(eq + 1));
        const std::string flag = "--" + key;
        if (sub->get_option_no_throw(flag) == nullptr)
            return path + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for '"
                   + args.front() + "'";
        if (!given(flag)) args.push_back(flag + "=" + value);
    }
    return std::nullopt;
}

void add_grid(CLI::App* sub, GridFlags& g, bool with_list) {
    auto* a = sub->add_option("--tau-start", g.start, "grid start")->capture_default_str();
    auto* b = sub->add_option("--tau-stop", g.stop, "grid stop")->capture_default_str();
    auto* c = sub->add_option("--tau-points", g.points, "grid point count");
    if (with_list) {
        auto* l = sub->add_option("--tau-list", g.list, "explicit grid values")->delimiter(',');
        l->excludes(a)->excludes(b)->excludes(c);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collective-spin Bell correlator toolkit"};
    app.require_subcommand(1);

    OatOpts oat;
    auto* sub_oat = app.add_subcommand("oat", "exact twisted-state correlator sweep");
    sub_oat->add_option("--n", oat.n, "particle number (even)")->required();
    add_grid(sub_oat, oat.grid, true);
    add_common(sub_oat, oat.out, oat.format, oat.threads);

    LatticeOpts lat;
    auto* sub_lat = app.add_subcommand("lattice", "two-species Bose-Hubbard trajectory");
    LatticeOpts cmp;
    cmp.with_summary = true;
    auto* sub_cmp = app.add_subcommand("compare", "lattice trajectory scored against the twisting model");
    for (auto [sub, o] : {std::pair{sub_lat, &lat}, std::pair{sub_cmp, &cmp}}) {
        sub->add_option("--n", o->n, "atom number")->capture_default_str();
        sub->add_option("--m-sites", o->m_sites, "lattice sites")->capture_default_str();
        sub->add_option("--v0", o->v0, "lattice depth (recoil units)")->capture_default_str();
        sub->add_option("--a-aa", o->a_aa, "intra-species scattering length")->capture_default_str();
        sub->add_option("--uab-ratio", o->uab_ratio, "u_ab / u_aa")->capture_default_str();
        sub->add_option("--boundary", o->boundary, "open | periodic")
            ->check(CLI::IsMember({"open", "periodic"}))
            ->capture_default_str();
        add_grid(sub, o->grid, false);
        sub->add_option("--dt", o->dt, "propagator step (0 = auto)")->capture_default_str();
        sub->add_option("--krylov-dim", o->krylov_dim, "Krylov subspace dimension")->capture_default_str();
        sub->add_option("--checkpoint-every", o->checkpoint_every,
                        "write <out>.ck.json every K samples (0 = off)");
        sub->add_option("--resume", o->resume, "resume from a checkpoint file");
        add_common(sub, o->out, o->format, o->threads);
    }

    double classify_e = 0.0;
    int classify_n = 0;
    std::string classify_fmt = "csv", classify_out;
    int classify_threads = 0;
    auto* sub_cls = app.add_subcommand("classify", "depth report for a correlator value");
    sub_cls->add_option("--e", classify_e, "correlator value")->required();
    sub_cls->add_option("--n", classify_n, "particle number")->required();
    add_common(sub_cls, classify_out, classify_fmt, classify_threads);

    int lhv_n = 0;
    std::string lhv_fmt = "csv", lhv_out;
    int lhv_threads = 0;
    auto* sub_lhv = app.add_subcommand("lhv", "brute-force local-model maximum (N <= 8)");
    sub_lhv->add_option("--n", lhv_n, "particle number")->required();
    add_common(sub_lhv, lhv_out, lhv_fmt, lhv_threads);

    app.name("oatbell");
    std::vector<std::string> args(argv + 1, argv + argc);
    if (const auto err = expand_config_args(app, args)) {
        std::cerr << "error: " << *err << "\n";
        return 2;
    }
    std::reverse(args.begin(), args.end());  // parse(vector) consumes back-to-front

    try {
        app.parse(args);
        if (sub_oat->parsed()) return run_oat(oat);
        if (sub_lat->parsed()) return run_lattice(lat);
        if (sub_cmp->parsed()) return run_lattice(cmp);
        if (sub_cls->parsed()) return run_classify(classify_e, classify_n, classify_fmt, classify_out);
        if (sub_lhv->parsed()) return run_lhv(lhv_n, lhv_fmt, lhv_out);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const oatbell::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
}
