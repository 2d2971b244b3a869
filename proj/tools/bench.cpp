// Command-line front end: bench run | mpqp | validate | report.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "yannrl/bench/experiment.hpp"
#include "yannrl/envs/process_env.hpp"
#include "yannrl/explicit_mpc/condense.hpp"
#include "yannrl/explicit_mpc/pwa_law.hpp"
#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"

using namespace yannrl;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> episodes;
    std::string out;
    bool quiet = false;
};

int cmd_run(const RunArgs& a) {
    auto cfg = bench::load_experiment(a.config);
    if (a.seed) {
        cfg.seeds = {*a.seed};
    }
    if (a.episodes) {
        for (auto& c : cfg.controllers) {
            if (c.kind == bench::ControllerKind::YannDdpg || c.kind == bench::ControllerKind::VanillaDdpg) {
                c.train_episodes = *a.episodes;
            }
        }
    }
    if (!a.out.empty()) {
        cfg.output_dir = a.out;
    }
    if (cfg.output_dir.empty()) {
        cfg.output_dir = "runs/" + cfg.name;
    }
    cfg.validate();
    const auto report = bench::run_experiment(cfg, [&](const std::string& line) {
        if (!a.quiet) {
            std::cerr << line << '\n';
        }
    });
    std::cout << bench::format_summary(report.summary);
    std::cout << "outputs in " << cfg.output_dir << '\n';
    return kOk;
}

int cmd_mpqp(const std::string& env_path, const std::string& out) {
    const auto j = read_json_file(env_path);
    const auto env = envs::make_env(j);
    const auto f = explicit_mpc::formulation_from_env(env, require(j, "control"));
    const auto law = explicit_mpc::solve_formulation(f);
    explicit_mpc::save_law(out, law);
    std::printf("%s: %zu regions (%ld candidate active sets, %ld degenerate, %ld empty) -> %s\n",
                env.spec().name.c_str(), law.regions.size(), law.diagnostics.candidates, law.diagnostics.degenerate,
                law.diagnostics.empty, out.c_str());
    return kOk;
}

int cmd_validate(const std::string& law_path, const std::string& env_path, int samples, std::uint64_t seed) {
    const auto law = explicit_mpc::load_law(law_path);
    const auto j = read_json_file(env_path);
    const auto env = envs::make_env(j);
    const auto f = explicit_mpc::formulation_from_env(env, require(j, "control"));
    if (law.formulation_hash != explicit_mpc::formulation_hash(f)) {
        std::fprintf(stderr, "law %s was not solved for the formulation in %s\n", law_path.c_str(), env_path.c_str());
        return kRuntimeError;
    }
    const auto v = explicit_mpc::validate_law(law, explicit_mpc::condense(f), f.domain, samples, seed);
    std::printf("%d samples, %d infeasible, max |u_law - u_qp| = %.3g\n", v.samples, v.infeasible,
                v.max_deviation);
    if (!(v.max_deviation <= 1e-6)) {
        std::fprintf(stderr, "deviation above 1e-6\n");
        return kRuntimeError;
    }
    return kOk;
}

int cmd_report(const std::string& dir) {
    namespace fs = std::filesystem;
    const auto rows = bench::read_report_csv((fs::path(dir) / "report.csv").string());
    const auto summary = bench::aggregate(rows);
    bench::write_summary_csv((fs::path(dir) / "summary.csv").string(), summary);
    std::cout << bench::format_summary(summary);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"YANN-RL experiments: explicit MPC, YANN-DDPG, vanilla DDPG and an NMPC oracle"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "train and evaluate the controllers of an experiment config");
    run->add_option("config", run_args.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", run_args.seed, "evaluate a single seed instead of the config's list");
    run->add_option("--episodes", run_args.episodes, "training episodes for every DDPG controller")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--out", run_args.out, "output directory (default: config 'output' or runs/<name>)");
    run->add_flag("--quiet", run_args.quiet, "no per-run progress on stderr");

    std::string mpqp_env;
    std::string mpqp_out = "law.json";
    auto* mpqp = app.add_subcommand("mpqp", "solve the explicit MPC law of an environment config");
    mpqp->add_option("env", mpqp_env, "environment config (JSON)")->required()->check(CLI::ExistingFile);
    mpqp->add_option("-o,--out", mpqp_out, "law file to write");

    std::string val_law;
    std::string val_env;
    int val_samples = 10000;
    std::uint64_t val_seed = 0;
    auto* validate = app.add_subcommand("validate", "compare a law with the online QP on sampled states");
    validate->add_option("law", val_law, "law file")->required()->check(CLI::ExistingFile);
    validate->add_option("env", val_env, "environment config (JSON)")->required()->check(CLI::ExistingFile);
    validate->add_option("--samples", val_samples, "number of sampled states");
    validate->add_option("--seed", val_seed, "sampling seed");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "re-aggregate report.csv of a run directory");
    report->add_option("dir", report_dir, "run directory")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            return cmd_run(run_args);
        }
        if (*mpqp) {
            return cmd_mpqp(mpqp_env, mpqp_out);
        }
        if (*validate) {
            return cmd_validate(val_law, val_env, val_samples, val_seed);
        }
        return cmd_report(report_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
