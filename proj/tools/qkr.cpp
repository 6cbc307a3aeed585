#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkr/analysis.hpp"
#include "qkr/config.hpp"
#include "qkr/ensemble.hpp"
#include "qkr/io.hpp"
#include "qkr/model.hpp"

namespace fs = std::filesystem;
using namespace qkr;

namespace {

// Exit codes: 0 ok, 2 config/input error, 3 boundary-leak abort,
// 4 fit did not converge.
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kLeakError = 3;
constexpr int kNoConvergence = 4;

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct OutputSet {
    fs::path dir;
    bool json = false;
    std::vector<std::pair<std::string, std::uint64_t>> written;

    std::string put(const std::string& stem, const io::Table& t) {
        const std::string name = stem + (json ? ".json" : ".csv");
        const fs::path p = dir / name;
        if (json)
            io::write_table_json(p.string(), t);
        else
            io::write_table(p.string(), t);
        written.emplace_back(name, io::fnv1a_file(p.string()));
        return name;
    }
};

int run_one_simulation(const SimParams& params, const fs::path& out_dir, int threads,
                       bool json) {
    fs::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    EnsembleResult res = run_ensemble(params, threads);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    OutputSet out{out_dir, json, {}};
    out.put("energy", io::energy_table(res));
    for (const auto& cd : res.distributions)
        out.put("dist_t" + std::to_string(cd.kick), io::dist_table(cd));

    io::RunManifest man;
    man.version = io::kArtifactVersion;
    man.params = params;
    man.threads = threads;
    man.duration_seconds = secs;
    man.created_utc = utc_now();
    man.outputs = out.written;
    io::write_manifest((out_dir / "manifest.json").string(), man);

    std::printf("wrote %s (%d trajectories, %d kicks, %.1fs, %lld SE events)\n",
                out_dir.string().c_str(), params.n_traj, params.n_kicks, secs,
                res.total_se);
    return kOk;
}

std::string pi_dir_name(double pi) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "pi_%g", pi);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum kicked rotor: simulation, closed-form model, fitting"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", input_path, column, format = "csv";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;

    auto add_common = [&](CLI::App* cmd, bool with_config) {
        if (with_config)
            cmd->add_option("--config", config_path, "configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--threads", threads, "worker threads, 0 = auto");
        cmd->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* c_sim = app.add_subcommand("simulate", "run one ensemble from a config file");
    add_common(c_sim, true);

    auto* c_sweep = app.add_subcommand("sweep", "run the config's [sweep] pi values");
    add_common(c_sweep, true);

    auto* c_model = app.add_subcommand("model", "evaluate the closed-form model curves");
    ModelParams mp;
    int horizon = 500;
    c_model->add_option("--dq", mp.d_q, "initial diffusion coefficient");
    c_model->add_option("--ts", mp.t_s, "localization decay time");
    c_model->add_option("--pi", mp.se_prob, "SE probability per kick");
    c_model->add_option("--delta", mp.delta, "filter width");
    c_model->add_option("--horizon", horizon, "last kick on the time grid");
    c_model->add_option("--out", out_dir, "output directory");
    c_model->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* c_fit = app.add_subcommand("fit", "fit (D_q, t_s) to an energy trace");
    double fit_pi = 0.0, fit_delta = 0.04;
    analysis::FitOptions fopt;
    c_fit->add_option("--input", input_path, "energy table (csv)")->required();
    c_fit->add_option("--pi", fit_pi, "SE probability used in the run")->required();
    c_fit->add_option("--delta", fit_delta, "filter width used in the run");
    c_fit->add_option("--column", column, "data column (default E_filtered)");
    c_fit->add_option("--dq-init", fopt.d_q_init, "initial D_q");
    c_fit->add_option("--ts-init", fopt.t_s_init, "initial t_s");

    auto* c_cls = app.add_subcommand("classify", "classify a momentum distribution");
    c_cls->add_option("--input", input_path, "distribution table (csv)")->required();
    c_cls->add_option("--column", column, "data column (default f_filtered)");

    auto* c_classical = app.add_subcommand("classical", "standard-map diffusion reference");
    double cl_K = 10.0;
    int cl_steps = 500, cl_particles = 100000;
    std::uint64_t cl_seed = 1;
    c_classical->add_option("--K", cl_K, "kick strength");
    c_classical->add_option("--steps", cl_steps, "map iterations");
    c_classical->add_option("--particles", cl_particles, "ensemble size");
    c_classical->add_option("--seed", cl_seed, "RNG seed");
    c_classical->add_option("--threads", threads, "worker threads, 0 = auto");
    c_classical->add_option("--out", out_dir, "output directory (omit to skip the trace)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_sim->parsed() || c_sweep->parsed()) {
            RunConfig cfg = parse_config(config_path);
            if (seed_set) cfg.sim.seed = seed;
            const bool json = format == "json";
            if (c_sim->parsed())
                return run_one_simulation(cfg.sim, out_dir, threads, json);
            if (cfg.sweep_pi.empty())
                throw ConfigError(config_path + ": sweep requires [sweep] pi_values");
            for (double pi : cfg.sweep_pi) {
                SimParams p = cfg.sim;
                p.se_prob = pi;
                run_one_simulation(p, fs::path(out_dir) / pi_dir_name(pi), threads, json);
            }
            return kOk;
        }

        if (c_model->parsed()) {
            mp.validate();
            fs::create_directories(out_dir);
            OutputSet out{out_dir, format == "json", {}};
            out.put("model", io::model_table(mp, horizon));
            const nlohmann::json summary = io::model_summary_json(mp);
            std::ofstream((fs::path(out_dir) / "summary.json").string())
                << summary.dump(2) << '\n';
            std::cout << summary.dump(2) << '\n';
            return kOk;
        }

        if (c_fit->parsed()) {
            const io::Table t = io::read_table(input_path);
            const int tc = t.column("t");
            const int vc = t.column(column.empty() ? "E_filtered" : column);
            if (tc < 0 || vc < 0)
                throw ConfigError(input_path + ": need columns 't' and '" +
                                  (column.empty() ? "E_filtered" : column) + "'");
            const auto fit = analysis::fit_energy_curve(
                t.cols[static_cast<std::size_t>(tc)],
                t.cols[static_cast<std::size_t>(vc)], fit_pi, fit_delta, fopt);
            std::cout << io::fit_to_json(fit).dump(2) << '\n';
            return fit.converged ? kOk : kNoConvergence;
        }

        if (c_cls->parsed()) {
            const io::Table t = io::read_table(input_path);
            const int pc = t.column("P_over_kbar");
            const int vc = t.column(column.empty() ? "f_filtered" : column);
            if (pc < 0 || vc < 0)
                throw ConfigError(input_path + ": need columns 'P_over_kbar' and '" +
                                  (column.empty() ? "f_filtered" : column) + "'");
            MomentumDistribution d;
            d.center = t.cols[static_cast<std::size_t>(pc)];
            d.prob = t.cols[static_cast<std::size_t>(vc)];
            d.bin_width = d.center.size() >= 2 ? d.center[1] - d.center[0] : 1.0;
            std::cout << io::verdict_to_json(analysis::classify_distribution(d)).dump(2)
                      << '\n';
            return kOk;
        }

        if (c_classical->parsed()) {
            const auto res =
                analysis::classical_diffusion(cl_K, cl_steps, cl_particles, cl_seed, threads);
            if (c_classical->count("--out") > 0) {
                fs::create_directories(out_dir);
                OutputSet out{out_dir, false, {}};
                out.put("classical", io::classical_table(res));
            }
            nlohmann::json j{{"K", cl_K},
                             {"n_steps", cl_steps},
                             {"n_particles", cl_particles},
                             {"slope", res.slope},
                             {"final_energy", res.energy.back()}};
            std::cout << j.dump(2) << '\n';
            return kOk;
        }
    } catch (const BoundaryLeakError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kLeakError;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}
