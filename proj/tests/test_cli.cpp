// End-to-end tests of the command-line tool. The binary path arrives in the
// OATBELL_CLI_PATH environment variable (set by the build); every invocation
// goes through std::system with output redirected into a scratch directory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    if (const char* p = std::getenv("OATBELL_CLI_PATH")) return p;
#ifdef OATBELL_CLI_PATH
    return OATBELL_CLI_PATH;
#else
    FAIL("OATBELL_CLI_PATH must name the oatbell binary (env var or compile definition)");
    return "";
#endif
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "oatbell_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& stdout_file = "") {
    std::string cmd = cli_path() + " " + args;
    cmd += " > " + (stdout_file.empty() ? "/dev/null" : stdout_file);
    cmd += " 2> " + (scratch_dir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE_MESSAGE(f.good(), "missing file: " << p.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& p) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TEST_CASE("usage errors exit with code 2 and leave no output behind") {
    CHECK(run("") == 2);                                // missing subcommand
    CHECK(run("frobnicate") == 2);                      // unknown subcommand
    CHECK(run("oat") == 2);                             // missing required --n
    CHECK(run("oat --n 8 --bogus 1") == 2);             // unknown flag
    const auto out = (scratch_dir() / "never.csv").string();
    CHECK(run("oat --n 8 --tau-points 1 --out " + out) == 2);
    CHECK(!fs::exists(out));
    CHECK(run("oat --n 8 --tau-list 0.5,0.2 --out " + out) == 2);  // not increasing
    CHECK(run("lattice --tau-start 0.5 --tau-points 3") == 2);
    CHECK(run("lattice --tau-list 0.1,0.2") == 2);      // lattice has no list grid
    CHECK(run("classify --e 0.3 --n 8") == 2);          // above the attainable 1/4
    CHECK(run("classify --e -0.1 --n 8") == 2);
    CHECK(run("lhv --n 12") == 2);                      // brute force capped at N = 8
    CHECK(run("--help") == 0);
}

TEST_CASE("twisting sweep output is deterministic and self-describing") {
    const auto f1 = scratch_dir() / "oat1.csv";
    const auto f2 = scratch_dir() / "oat2.csv";
    const auto f3 = scratch_dir() / "oat3.csv";
    const std::string args = "oat --n 8 --tau-points 9 --tau-stop 1.5707963267948966 --out ";
    REQUIRE(run(args + f1.string()) == 0);
    REQUIRE(run(args + f2.string()) == 0);
    REQUIRE(run(args + f3.string() + " --threads 2") == 0);
    const auto text = slurp(f1);
    CHECK(text == slurp(f2));
    CHECK(text == slurp(f3));  // thread count must not affect the bytes

    CHECK(text.find("# oatbell csv schema 1") == 0);
    CHECK(text.find("# columns: tau,correlator,log2_correlator,gaussian,revival_prediction,"
                    "xi2,bell_depth,entanglement_depth") != std::string::npos);
    const auto rows = csv_rows(f1);
    REQUIRE(rows.size() == 9);
    REQUIRE(rows[0].size() == 8);
    CHECK(rows[0][0] == 0.0);
    CHECK(rows[8][0] == doctest::Approx(1.5707963267948966).epsilon(1e-15));
    // plateau values at tau = pi/2: E = 1/4, depth 8/8
    CHECK(rows[8][1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(rows[8][6] == 8.0);
    CHECK(rows[8][7] == 8.0);
    // companion plot script appears next to the table
    CHECK(fs::exists(f1.string() + ".gnuplot"));
    CHECK(slurp(f1.string() + ".gnuplot").find("plot") != std::string::npos);
}

TEST_CASE("twisting sweep json mirrors the csv columns") {
    const auto f = scratch_dir() / "oat.json";
    REQUIRE(run("oat --n 8 --tau-list 0.1,0.7853981633974483,1.5707963267948966 --format json --out "
                + f.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(f));
    CHECK(j.at("schema").get<std::string>() == "1");
    CHECK(j.at("command").get<std::string>() == "oat");
    CHECK(j.at("n").get<int>() == 8);
    REQUIRE(j.at("columns").size() == 8);
    CHECK(j.at("columns")[0].get<std::string>() == "tau");
    REQUIRE(j.at("rows").size() == 3);
    // tau = pi/4 is the q = 4 revival: prediction column holds 1/16
    CHECK(j.at("rows")[1][4].get<double>() == doctest::Approx(0.0625).epsilon(1e-12));
    // tau = 0.1 is no revival: NaN serializes as null
    CHECK(j.at("rows")[0][4].is_null());
}

TEST_CASE("classification report states the bounds and the certified depths") {
    const auto f = scratch_dir() / "cls.txt";
    REQUIRE(run("classify --e 0.25 --n 8 --out " + f.string()) == 0);
    const auto text = slurp(f);
    CHECK(text.find("exceeded: no local hidden-variable model") != std::string::npos);
    CHECK(text.find("exceeded: the state is entangled") != std::string::npos);
    CHECK(text.find("bell_depth = 8") != std::string::npos);
    CHECK(text.find("(all of them)") != std::string::npos);
    CHECK(text.find("entanglement_depth = 8") != std::string::npos);

    REQUIRE(run("classify --e 1e-4 --n 1000 --out " + f.string()) == 0);
    CHECK(slurp(f).find("bell_depth = 989") != std::string::npos);

    REQUIRE(run("classify --e 1e-10 --n 8 --out " + f.string()) == 0);
    const auto low = slurp(f);
    CHECK(low.find("bell_depth = 0") != std::string::npos);
    CHECK(low.find("consistent with local models") != std::string::npos);

    const auto fj = scratch_dir() / "cls.json";
    REQUIRE(run("classify --e 8e-3 --n 8 --format json --out " + fj.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(fj));
    CHECK(j.at("bell_depth").get<int>() == 4);
    CHECK(j.at("bell_depth_threshold").get<double>() == doctest::Approx(7.8125e-3).epsilon(1e-15));
}

TEST_CASE("local-model brute force reports exact agreement with the bound") {
    const auto f = scratch_dir() / "lhv.txt";
    REQUIRE(run("lhv --n 4 --out " + f.string()) == 0);
    const auto text = slurp(f);
    CHECK(text.find("deterministic local strategies: 256") != std::string::npos);
    CHECK(text.find("maximum equals the bound exactly") != std::string::npos);

    const auto fj = scratch_dir() / "lhv.json";
    REQUIRE(run("lhv --n 6 --format json --out " + fj.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(fj));
    CHECK(j.at("strategies").get<std::uint64_t>() == 4096);
    CHECK(j.at("equal").get<bool>());
    CHECK(j.at("maximum").get<double>() == j.at("bound").get<double>());
}

TEST_CASE("lattice sweep resumes from a checkpoint onto the same trajectory") {
    const auto a = scratch_dir() / "lat_a.csv";
    const auto b = scratch_dir() / "lat_b.csv";
    const auto c = scratch_dir() / "lat_c.csv";
    const std::string base = "lattice --n 2 --m-sites 2 ";

    // short leg writes its final state as a checkpoint at step 2
    REQUIRE(run(base + "--tau-stop 0.1 --tau-points 3 --checkpoint-every 2 --out " + a.string()) == 0);
    const auto ck = a.string() + ".ck.json";
    REQUIRE(fs::exists(ck));

    // uninterrupted reference over the doubled grid
    REQUIRE(run(base + "--tau-stop 0.2 --tau-points 5 --out " + c.string()) == 0);
    // resumed run continues the same grid from the checkpoint
    REQUIRE(run(base + "--tau-stop 0.2 --tau-points 5 --resume " + ck + " --out " + b.string()) == 0);

    const auto full = csv_rows(c);
    const auto tail = csv_rows(b);
    REQUIRE(full.size() == 5);
    REQUIRE(tail.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t col = 0; col < full[i + 2].size(); ++col) {
            const double want = full[i + 2][col];
            const double got = tail[i][col];
            if (std::isnan(want) && std::isnan(got)) continue;
            CHECK(got == doctest::Approx(want).epsilon(1e-9).scale(1e-12));
        }
    }

    // a checkpoint from different physics is refused
    CHECK(run("lattice --n 2 --m-sites 2 --uab-ratio 0.5 --tau-stop 0.2 --tau-points 5 --resume "
              + ck) == 2);
    CHECK(run("lattice --n 2 --m-sites 3 --tau-stop 0.2 --tau-points 5 --resume " + ck) == 2);
}

TEST_CASE("comparison run emits the cross-model summary block") {
    const auto f = scratch_dir() / "cmp.json";
    REQUIRE(run("compare --n 2 --m-sites 2 --tau-stop 0.05 --tau-points 3 --format json --out "
                + f.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(f));
    CHECK(j.at("command").get<std::string>() == "compare");
    CHECK(j.at("params").at("chi").get<double>() > 0.0);
    const auto& s = j.at("summary");
    CHECK(s.contains("crossing_tau_lattice"));
    CHECK(s.contains("crossing_rel_dev"));
    CHECK(s.contains("max_abs_ln_ratio_past_crossing"));
    // nothing crosses the bound this early; the fields hold null (NaN)
    CHECK(s.at("crossing_tau_lattice").is_null());

    const auto fc = scratch_dir() / "cmp.csv";
    REQUIRE(run("compare --n 2 --m-sites 2 --tau-stop 0.05 --tau-points 3 --out " + fc.string()) == 0);
    const auto text = slurp(fc);
    CHECK(text.find("# summary chi ") != std::string::npos);
    CHECK(text.find("# summary crossing_tau_oat ") != std::string::npos);
}

TEST_CASE("config files supply defaults and explicit flags win") {
    const auto cfg = scratch_dir() / "oat.cfg";
    {
        std::ofstream f(cfg);
        f << "n=8\n"
          << "tau-points=5\n"
          << "tau-stop=2.0\n";
    }
    const auto f1 = scratch_dir() / "cfg1.csv";
    REQUIRE(run("oat --config " + cfg.string() + " --out " + f1.string()) == 0);
    auto rows = csv_rows(f1);
    REQUIRE(rows.size() == 5);
    CHECK(rows.back()[0] == doctest::Approx(2.0).epsilon(1e-15));

    const auto f2 = scratch_dir() / "cfg2.csv";
    REQUIRE(run("oat --config " + cfg.string() + " --tau-stop 1.0 --out " + f2.string()) == 0);
    rows = csv_rows(f2);
    REQUIRE(rows.size() == 5);
    CHECK(rows.back()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("default output goes to stdout") {
    const auto f = scratch_dir() / "stdout.csv";
    REQUIRE(run("oat --n 4 --tau-points 3", f.string()) == 0);
    const auto rows = csv_rows(f);
    CHECK(rows.size() == 3);
    CHECK(!fs::exists(scratch_dir() / "stdout.csv.gnuplot"));
}
