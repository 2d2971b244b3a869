#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "yannrl/bench/metrics.hpp"
#include "yannrl/nets/mlp.hpp"

namespace yannrl::bench {

enum class ControllerKind { YannDdpg, VanillaDdpg, NmpcOracle, ExplicitMpc };

[[nodiscard]] std::string controller_kind_name(ControllerKind k);
[[nodiscard]] ControllerKind controller_kind_from_name(const std::string& name);

struct ControllerSpec {
    std::string name;  // row label in the reports; defaults to the kind name
    ControllerKind kind = ControllerKind::ExplicitMpc;
    int train_episodes = 0;
    nlohmann::json training = nlohmann::json::object();  // overrides of the shared training block
};

/// Experiment description. The environment is an inline environment config
/// (the "env" key may also name a file, resolved relative to the experiment
/// file) with "env_overrides" merged on top as a JSON merge patch.
struct ExperimentConfig {
    std::string name;
    nlohmann::json env;
    std::vector<ControllerSpec> controllers;
    std::vector<std::uint64_t> seeds;
    int evaluation_steps = 0;  // 0: the environment's episode length
    nlohmann::json training = nlohmann::json::object();
    std::vector<int> hidden{64, 64};
    nets::Activation activation = nets::Activation::Tanh;
    bool record_wall_time = false;
    bool write_trajectories = true;
    bool write_plots = true;
    bool write_models = true;
    std::string output_dir;

    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Throws ConfigError on unknown controllers, duplicate seeds, or missing keys.
[[nodiscard]] ExperimentConfig parse_experiment(const nlohmann::json& j, const std::string& base_dir = ".");
[[nodiscard]] ExperimentConfig load_experiment(const std::string& path);

struct ReportRow {
    std::string env;
    std::string controller;
    std::uint64_t seed = 0;
    Metrics metrics;
    int train_episodes = 0;
    double wall_ms = 0.0;
};

struct SummaryRow {
    std::string env;
    std::string controller;
    std::size_t seeds = 0;
    Metrics mean;
    int train_episodes = 0;
};

/// Per-run facts that do not belong in report.csv.
struct RunRecord {
    std::string controller;
    std::uint64_t seed = 0;
    int train_episodes = 0;
    int training_infeasible = 0;  // episodes ended by an infeasibility event
    bool evaluation_infeasible = false;
    int evaluation_steps = 0;
    double train_ms = 0.0;
    double eval_ms = 0.0;
};

struct Report {
    std::vector<ReportRow> rows;
    std::vector<SummaryRow> summary;
    std::vector<RunRecord> runs;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Trains and evaluates every controller on every seed. Seed s trains with
/// seed s and evaluates from env.reset(s), so run k of every controller
/// starts from the same state. With a nonempty output_dir the run writes
/// config.json, report.csv, summary.csv, runs.csv, timing.csv, law.json and,
/// per run, trajectories/, plots/, logs/ and models/ entries.
[[nodiscard]] Report run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Means over seeds, one row per (env, controller) in first-appearance order.
[[nodiscard]] std::vector<SummaryRow> aggregate(const std::vector<ReportRow>& rows);

/// Columns env,controller,seed,ise,itae,ess,cum_cost,train_episodes,wall_ms; %.17g.
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);
[[nodiscard]] std::vector<ReportRow> read_report_csv(const std::string& path);
/// Columns env,controller,seeds,ise,itae,ess,cum_cost,train_episodes.
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
/// Fixed-width table of the summary, controllers as rows.
[[nodiscard]] std::string format_summary(const std::vector<SummaryRow>& rows);

}  // namespace yannrl::bench
