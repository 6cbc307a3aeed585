// End-to-end checks of the qkr binary named by the QKR_BIN environment
// variable. Each case works in its own directory under /tmp.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkr/config.hpp"
#include "qkr/io.hpp"
#include "qkr/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin() {
    const char* p = std::getenv("QKR_BIN");
    REQUIRE_MESSAGE(p != nullptr, "QKR_BIN must point at the qkr executable");
    return p;
}

struct TempDir {
    fs::path path;
    TempDir() {
        char tmpl[] = "/tmp/qkr_cli_XXXXXX";
        REQUIRE(mkdtemp(tmpl) != nullptr);
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path operator/(const std::string& s) const { return path / s; }
};

int run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    REQUIRE(f.good());
    f << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE_MESSAGE(f.good(), ("missing file " + p.string()));
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

const char* kSmallConfig =
    "# reference run, small enough for tests\n"
    "[simulation]\n"
    "K = 5\n"
    "kbar = 2.9\n"
    "pi = 0.02\n"
    "delta = 0.04\n"
    "n_kicks = 30\n"
    "n_traj = 48\n"
    "n_max = 64\n"
    "seed = 3\n"
    "checkpoints = 15, 30\n";

}  // namespace

TEST_CASE("simulate writes the documented artifact set") {
    TempDir d;
    write_file(d / "run.cfg", kSmallConfig);
    const int rc = run(bin() + " simulate --config " + (d / "run.cfg").string() +
                       " --out " + (d / "out").string() + " > /dev/null");
    REQUIRE(rc == 0);

    const qkr::io::Table e = qkr::io::read_table((d / "out" / "energy.csv").string());
    REQUIRE(e.rows() == 31);
    for (const char* name :
         {"t", "E_unfiltered", "E_filtered", "F0", "FDelta", "detected"})
        CHECK(e.column(name) >= 0);
    const auto& eu = e.cols[static_cast<std::size_t>(e.column("E_unfiltered"))];
    const auto& det = e.cols[static_cast<std::size_t>(e.column("detected"))];
    for (std::size_t i = 1; i < eu.size(); ++i) CHECK(eu[i] > 0.0);
    for (double f : det) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }

    for (const char* name : {"dist_t15.csv", "dist_t30.csv"}) {
        const qkr::io::Table t = qkr::io::read_table((d / "out" / name).string());
        for (const char* c : {"P_over_kbar", "f_unfiltered", "f_filtered"})
            CHECK(t.column(c) >= 0);
        CHECK(t.rows() > 5);
    }

    const json man = slurp_json(d / "out" / "manifest.json");
    CHECK(man.at("version") == "1.0.0");
    CHECK(man.at("params").at("K") == 5.0);
    CHECK(man.at("params").at("pi") == 0.02);
    CHECK(man.at("params").at("seed") == 3);
    bool saw_energy = false;
    for (const auto& [name, hex] : man.at("outputs").items()) {
        const std::uint64_t h = std::stoull(hex.get<std::string>(), nullptr, 16);
        CHECK(h == qkr::io::fnv1a_file((d / "out" / name).string()));
        if (name == "energy.csv") saw_energy = true;
    }
    CHECK(saw_energy);
    CHECK(man.contains("combined_hash"));
}

TEST_CASE("reruns and thread counts reproduce byte-identical tables") {
    TempDir d;
    write_file(d / "run.cfg", kSmallConfig);
    for (const char* sub : {"a", "b"}) {
        const int rc = run(bin() + " simulate --config " + (d / "run.cfg").string() +
                           " --out " + (d / sub).string() + " > /dev/null");
        REQUIRE(rc == 0);
    }
    const int rc = run(bin() + " simulate --config " + (d / "run.cfg").string() +
                       " --out " + (d / "c").string() + " --threads 2 > /dev/null");
    REQUIRE(rc == 0);

    for (const char* name : {"energy.csv", "dist_t15.csv", "dist_t30.csv"}) {
        const std::string a = slurp(d / "a" / name);
        CHECK(a == slurp(d / "b" / name));
        CHECK(a == slurp(d / "c" / name));
    }
}

TEST_CASE("seed override changes the realization") {
    TempDir d;
    write_file(d / "run.cfg", kSmallConfig);
    REQUIRE(run(bin() + " simulate --config " + (d / "run.cfg").string() + " --out " +
                (d / "a").string() + " > /dev/null") == 0);
    REQUIRE(run(bin() + " simulate --config " + (d / "run.cfg").string() + " --out " +
                (d / "b").string() + " --seed 9 > /dev/null") == 0);
    CHECK(slurp(d / "a" / "energy.csv") != slurp(d / "b" / "energy.csv"));
    const json man = slurp_json(d / "b" / "manifest.json");
    CHECK(man.at("params").at("seed") == 9);
}

TEST_CASE("SE-free runs filter nothing away") {
    TempDir d;
    std::string cfg = kSmallConfig;
    const auto pos = cfg.find("pi = 0.02");
    REQUIRE(pos != std::string::npos);
    cfg.replace(pos, std::strlen("pi = 0.02"), "pi = 0");
    write_file(d / "run.cfg", cfg);
    REQUIRE(run(bin() + " simulate --config " + (d / "run.cfg").string() + " --out " +
                (d / "out").string() + " > /dev/null") == 0);
    const qkr::io::Table e = qkr::io::read_table((d / "out" / "energy.csv").string());
    const auto& eu = e.cols[static_cast<std::size_t>(e.column("E_unfiltered"))];
    const auto& ef = e.cols[static_cast<std::size_t>(e.column("E_filtered"))];
    const auto& f0 = e.cols[static_cast<std::size_t>(e.column("F0"))];
    for (std::size_t i = 0; i < eu.size(); ++i) {
        CHECK(eu[i] == ef[i]);
        CHECK(f0[i] == 1.0);
    }
}

TEST_CASE("config mistakes are reported with their line and exit code 2") {
    TempDir d;
    write_file(d / "bad.cfg",
               "[simulation]\n"
               "K = 5\n"
               "flux_capacitance = 3\n");
    const int rc = run(bin() + " simulate --config " + (d / "bad.cfg").string() +
                       " --out " + (d / "out").string() + " 2> " +
                       (d / "err.txt").string());
    CHECK(rc == 2);
    const std::string err = slurp(d / "err.txt");
    CHECK(err.find(":3:") != std::string::npos);
    CHECK(err.find("flux_capacitance") != std::string::npos);
}

TEST_CASE("an undersized basis aborts with exit code 3") {
    TempDir d;
    write_file(d / "leak.cfg",
               "[simulation]\n"
               "K = 10\n"
               "kbar = 2.9\n"
               "n_kicks = 60\n"
               "n_traj = 2\n"
               "n_max = 16\n"
               "seed = 1\n");
    const int rc = run(bin() + " simulate --config " + (d / "leak.cfg").string() +
                       " --out " + (d / "out").string() + " 2> " +
                       (d / "err.txt").string());
    CHECK(rc == 3);
    CHECK(slurp(d / "err.txt").find("n_max") != std::string::npos);
}

TEST_CASE("model command reports the derived timescales") {
    TempDir d;
    REQUIRE(run(bin() +
                " model --dq 30.7 --ts 41.3 --pi 0.01 --delta 0.04 --horizon 60 "
                "--out " +
                (d / "m").string() + " > /dev/null") == 0);
    const json s = slurp_json(d / "m" / "summary.json");
    CHECK(std::fabs(s.at("t1").get<double>() - 50.80) < 0.01);
    CHECK(std::fabs(s.at("t2_approx").get<double>() - 321.888) < 0.01);
    CHECK(std::fabs(s.at("t2_exact").get<double>() - 325.81) < 0.01);
    CHECK(s.at("tau_s").get<double>() == doctest::Approx(0.413).epsilon(1e-12));

    const qkr::io::Table t = qkr::io::read_table((d / "m" / "model.csv").string());
    REQUIRE(t.rows() == 61);
    for (const char* c : {"t", "D0", "F0", "FDelta", "detected", "E0", "EDelta",
                          "Ebar", "Ebar_approx"})
        CHECK(t.column(c) >= 0);
    const qkr::ModelParams mp{30.7, 41.3, 0.01, 0.04};
    const auto& tb = t.cols[static_cast<std::size_t>(t.column("Ebar"))];
    CHECK(tb[10] == qkr::model::ebar(10.0, mp));  // lossless round trip
}

TEST_CASE("fit command recovers model parameters from a trace file") {
    TempDir d;
    REQUIRE(run(bin() +
                " model --dq 30.7 --ts 41.3 --pi 0.01 --delta 0.04 --horizon 400 "
                "--out " +
                (d / "m").string() + " > /dev/null") == 0);
    const int rc = run(bin() + " fit --input " + (d / "m" / "model.csv").string() +
                       " --column Ebar --pi 0.01 --delta 0.04 > " +
                       (d / "fit.json").string());
    REQUIRE(rc == 0);
    const json f = slurp_json(d / "fit.json");
    CHECK(f.at("converged") == true);
    CHECK(std::fabs(f.at("d_q").get<double>() - 30.7) < 0.05);
    CHECK(std::fabs(f.at("t_s").get<double>() - 41.3) < 0.05);
}

TEST_CASE("classify command reads a distribution table") {
    TempDir d;
    qkr::io::Table t;
    t.header = {"P_over_kbar", "f_unfiltered", "f_filtered"};
    t.cols.resize(3);
    for (int c = -40; c <= 40; ++c) {
        const double f = std::exp(-std::fabs(static_cast<double>(c)) / 12.0);
        t.cols[0].push_back(static_cast<double>(c));
        t.cols[1].push_back(f);
        t.cols[2].push_back(0.5 * f);
    }
    qkr::io::write_table((d / "dist.csv").string(), t);
    const int rc = run(bin() + " classify --input " + (d / "dist.csv").string() +
                       " > " + (d / "v.json").string());
    REQUIRE(rc == 0);
    const json v = slurp_json(d / "v.json");
    CHECK(v.at("verdict") == "exponential");
    CHECK(std::fabs(v.at("p_loc").get<double>() - 12.0) < 0.3);
}

TEST_CASE("classical command prints the reference diffusion summary") {
    TempDir d;
    const int rc = run(bin() +
                       " classical --K 10 --steps 40 --particles 2000 --seed 5 "
                       "--out " +
                       (d / "cl").string() + " > " + (d / "cl.json").string());
    REQUIRE(rc == 0);
    const json j = slurp_json(d / "cl.json");
    CHECK(j.at("slope").get<double>() > 5.0);
    CHECK(j.at("final_energy").get<double>() > 100.0);
    const qkr::io::Table t = qkr::io::read_table((d / "cl" / "classical.csv").string());
    CHECK(t.rows() == 41);
    CHECK(t.column("E") >= 0);
}

TEST_CASE("sweep fans out over the configured SE probabilities") {
    TempDir d;
    std::string cfg = kSmallConfig;
    cfg += "\n[sweep]\npi_values = 0, 0.02\n";
    write_file(d / "run.cfg", cfg);
    REQUIRE(run(bin() + " sweep --config " + (d / "run.cfg").string() + " --out " +
                (d / "sw").string() + " > /dev/null") == 0);
    for (const char* sub : {"pi_0", "pi_0.02"}) {
        CHECK(fs::exists(d / "sw" / sub / "energy.csv"));
        CHECK(fs::exists(d / "sw" / sub / "manifest.json"));
    }
    CHECK(slurp(d / "sw" / "pi_0" / "energy.csv") !=
          slurp(d / "sw" / "pi_0.02" / "energy.csv"));

    // the sweep subcommand demands a [sweep] section
    write_file(d / "nosweep.cfg", kSmallConfig);
    CHECK(run(bin() + " sweep --config " + (d / "nosweep.cfg").string() + " --out " +
              (d / "x").string() + " 2> /dev/null") == 2);
}

TEST_CASE("json format replaces the csv tables") {
    TempDir d;
    write_file(d / "run.cfg", kSmallConfig);
    REQUIRE(run(bin() + " simulate --config " + (d / "run.cfg").string() + " --out " +
                (d / "out").string() + " --format json > /dev/null") == 0);
    CHECK_FALSE(fs::exists(d / "out" / "energy.csv"));
    const json e = slurp_json(d / "out" / "energy.json");
    CHECK(e.at("columns").size() == 6);
    CHECK(e.at("data").at("t").size() == 31);
}

TEST_CASE("table writer round trips doubles losslessly") {
    TempDir d;
    qkr::io::Table t;
    t.header = {"a", "b"};
    t.cols = {{0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -0.0},
              {std::nan(""), 2.0, -1e308, 4.9406564584124654e-324, 0.25}};
    qkr::io::write_table((d / "t.csv").string(), t);
    const qkr::io::Table r = qkr::io::read_table((d / "t.csv").string());
    REQUIRE(r.header == t.header);
    REQUIRE(r.rows() == t.rows());
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < t.cols[c].size(); ++i) {
            const double x = t.cols[c][i], y = r.cols[c][i];
            if (std::isnan(x))
                CHECK(std::isnan(y));
            else
                CHECK(std::memcmp(&x, &y, sizeof(double)) == 0);
        }
}
