#include "yannrl/bench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "yannrl/bench/svg.hpp"
#include "yannrl/envs/process_env.hpp"
#include "yannrl/explicit_mpc/pwa_law.hpp"
#include "yannrl/nmpc/nmpc.hpp"
#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"
#include "yannrl/numerics/random.hpp"
#include "yannrl/rl/ddpg.hpp"
#include "yannrl/yann/yann.hpp"

namespace fs = std::filesystem;

namespace yannrl::bench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt(double v) { return envs::format_double(v); }

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    return out;
}

rl::TrainConfig training_config(const ExperimentConfig& cfg, const ControllerSpec& c, double gamma,
                                std::uint64_t seed) {
    nlohmann::json t = cfg.training;
    t.merge_patch(c.training);
    rl::TrainConfig tc;
    tc.mode = c.kind == ControllerKind::YannDdpg ? rl::Mode::Yann : rl::Mode::Vanilla;
    tc.gamma = t.value("gamma", gamma);
    if (tc.mode == rl::Mode::Yann && tc.gamma != gamma) {
        throw ConfigError("yann_ddpg: the training discount must equal the MPC discount the critic is built from");
    }
    tc.tau = t.value("tau", tc.tau);
    tc.actor_lr = t.value("actor_lr", tc.actor_lr);
    tc.critic_lr = t.value("critic_lr", tc.critic_lr);
    tc.batch_size = t.value("batch_size", tc.batch_size);
    tc.buffer_capacity = t.value("buffer_capacity", tc.buffer_capacity);
    tc.exploration_sigma = t.value("exploration_sigma", tc.exploration_sigma);
    tc.updates_per_step = t.value("updates_per_step", tc.updates_per_step);
    tc.termination_cost = t.value("termination_cost", tc.termination_cost);
    tc.episodes = c.train_episodes;
    tc.seed = seed;
    tc.record_wall_time = cfg.record_wall_time;
    tc.validate();
    return tc;
}

nets::MlpSpec network_spec(const ExperimentConfig& cfg, std::uint64_t seed) {
    nets::MlpSpec spec;
    spec.hidden.assign(cfg.hidden.begin(), cfg.hidden.end());
    spec.hidden_activation = cfg.activation;
    spec.seed = seed;
    return spec;
}

std::string run_id(const ControllerSpec& c, std::uint64_t seed) { return c.name + "_seed" + std::to_string(seed); }

}  // namespace

std::string controller_kind_name(ControllerKind k) {
    switch (k) {
        case ControllerKind::YannDdpg: return "yann_ddpg";
        case ControllerKind::VanillaDdpg: return "vanilla_ddpg";
        case ControllerKind::NmpcOracle: return "nmpc_oracle";
        case ControllerKind::ExplicitMpc: return "explicit_mpc";
    }
    return "unknown";
}

ControllerKind controller_kind_from_name(const std::string& name) {
    for (auto k : {ControllerKind::YannDdpg, ControllerKind::VanillaDdpg, ControllerKind::NmpcOracle,
                   ControllerKind::ExplicitMpc}) {
        if (controller_kind_name(k) == name) {
            return k;
        }
    }
    throw ConfigError("unknown controller '" + name + "' (yann_ddpg, vanilla_ddpg, nmpc_oracle, explicit_mpc)");
}

void ExperimentConfig::validate() const {
    if (controllers.empty()) {
        throw ConfigError("experiment needs at least one controller");
    }
    if (seeds.empty()) {
        throw ConfigError("experiment needs at least one seed");
    }
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw ConfigError("experiment seeds must be distinct");
    }
    std::set<std::string> names;
    for (const auto& c : controllers) {
        if (!names.insert(c.name).second) {
            throw ConfigError("duplicate controller name '" + c.name + "'");
        }
        if (c.name.empty() || c.name.find_first_of(",/\\ ") != std::string::npos) {
            throw ConfigError("controller names must be nonempty without commas, slashes or spaces");
        }
        if (c.train_episodes < 0) {
            throw ConfigError("train_episodes must be nonnegative");
        }
    }
    if (evaluation_steps < 0) {
        throw ConfigError("evaluation_steps must be nonnegative");
    }
    if (!env.is_object()) {
        throw ConfigError("experiment env must be an environment config object");
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["env"] = env;
    j["controllers"] = nlohmann::json::array();
    for (const auto& c : controllers) {
        j["controllers"].push_back({{"name", c.name},
                                    {"type", controller_kind_name(c.kind)},
                                    {"train_episodes", c.train_episodes},
                                    {"training", c.training}});
    }
    j["seeds"] = seeds;
    j["evaluation_steps"] = evaluation_steps;
    j["training"] = training;
    j["network"] = {{"hidden", hidden}, {"activation", nets::activation_name(activation)}};
    j["record_wall_time"] = record_wall_time;
    j["write_trajectories"] = write_trajectories;
    j["write_plots"] = write_plots;
    j["write_models"] = write_models;
    j["output"] = output_dir;
    return j;
}

ExperimentConfig parse_experiment(const nlohmann::json& j, const std::string& base_dir) {
    if (!j.is_object()) {
        throw ConfigError("experiment config must be a JSON object");
    }
    ExperimentConfig cfg;
    try {
        const auto& env = require(j, "env");
        if (env.is_string()) {
            fs::path p(env.get<std::string>());
            if (p.is_relative()) {
                p = fs::path(base_dir) / p;
            }
            cfg.env = read_json_file(p.string());
        } else {
            cfg.env = env;
        }
        if (j.contains("env_overrides")) {
            cfg.env.merge_patch(j.at("env_overrides"));
        }
        cfg.name = j.value("name", cfg.env.value("name", std::string("experiment")));
        for (const auto& c : require(j, "controllers")) {
            ControllerSpec spec;
            if (c.is_string()) {
                spec.kind = controller_kind_from_name(c.get<std::string>());
            } else {
                spec.kind = controller_kind_from_name(require(c, "type").get<std::string>());
                spec.name = c.value("name", std::string());
                spec.train_episodes = c.value("train_episodes", 0);
                spec.training = c.value("training", nlohmann::json::object());
            }
            if (spec.name.empty()) {
                spec.name = controller_kind_name(spec.kind);
            }
            cfg.controllers.push_back(std::move(spec));
        }
        cfg.seeds = require(j, "seeds").get<std::vector<std::uint64_t>>();
        cfg.evaluation_steps = j.value("evaluation_steps", 0);
        cfg.training = j.value("training", nlohmann::json::object());
        if (j.contains("network")) {
            const auto& net = j.at("network");
            cfg.hidden = net.value("hidden", cfg.hidden);
            cfg.activation = nets::activation_from_name(net.value("activation", std::string("tanh")));
        }
        cfg.record_wall_time = j.value("record_wall_time", false);
        cfg.write_trajectories = j.value("write_trajectories", true);
        cfg.write_plots = j.value("write_plots", true);
        cfg.write_models = j.value("write_models", true);
        cfg.output_dir = j.value("output", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
    return parse_experiment(read_json_file(path), fs::path(path).parent_path().string());
}

Report run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
    config.validate();
    const auto say = [&](const std::string& s) {
        if (progress) {
            progress(s);
        }
    };
    const envs::ProcessEnv env = envs::make_env(config.env);
    const std::string env_name = env.spec().name;
    const nlohmann::json control = require(config.env, "control");
    const auto formulation = explicit_mpc::formulation_from_env(env, control);
    const auto law = explicit_mpc::solve_formulation(formulation);
    const auto nmpc_cfg = nmpc::config_from_formulation(formulation, control.value("nmpc", nlohmann::json::object()));
    const int steps = config.evaluation_steps > 0 ? config.evaluation_steps : env.spec().num_steps();
    say(env_name + ": explicit MPC law with " + std::to_string(law.regions.size()) + " regions");

    const bool write = !config.output_dir.empty();
    const fs::path out(config.output_dir);
    if (write) {
        for (const char* sub : {"trajectories", "plots", "logs", "models"}) {
            fs::create_directories(out / sub);
        }
        write_json_file((out / "config.json").string(), config.to_json());
        explicit_mpc::save_law((out / "law.json").string(), law);
    }

    SvgLabels labels;
    labels.states = env.spec().state_names;
    labels.inputs = env.spec().input_names;

    Report report;
    for (const auto& c : config.controllers) {
        for (const auto seed : config.seeds) {
            RunRecord rec;
            rec.controller = c.name;
            rec.seed = seed;
            const Vector x0 = env.reset(seed);
            const std::string id = run_id(c, seed);
            Rollout rollout;
            const auto t_train = Clock::now();
            std::unique_ptr<nets::ActorModel> actor;
            if (c.kind == ControllerKind::YannDdpg || c.kind == ControllerKind::VanillaDdpg) {
                const auto tc = training_config(config, c, formulation.gamma, seed);
                std::unique_ptr<nets::CriticModel> critic;
                const auto actor_spec = network_spec(config, derive_seed(seed, 10));
                const auto critic_spec = network_spec(config, derive_seed(seed, 11));
                if (c.kind == ControllerKind::YannDdpg) {
                    actor = std::make_unique<yann::YannActor>(
                        yann::build_yann_actor(law, actor_spec, formulation.input_box));
                    critic = std::make_unique<yann::YannCritic>(yann::build_yann_critic(formulation, critic_spec));
                } else {
                    actor = std::make_unique<nets::VanillaActor>(env.n_states(), env.normalized_input_box(),
                                                                 actor_spec);
                    critic = std::make_unique<nets::VanillaCritic>(env.n_states(), env.n_inputs(), critic_spec);
                }
                auto trained = rl::train_ddpg(env, std::move(actor), std::move(critic), tc);
                rec.train_episodes = c.train_episodes;
                for (const auto& e : trained.log) {
                    rec.training_infeasible += e.infeasible ? 1 : 0;
                }
                actor = std::move(trained.actor);
                if (write) {
                    rl::write_episode_log((out / "logs" / (id + "_episodes.csv")).string(), trained.log);
                    if (config.write_models) {
                        yann::save_model((out / "models" / (id + "_actor.json")).string(), actor->to_json());
                        yann::save_model((out / "models" / (id + "_critic.json")).string(),
                                         trained.critic->to_json());
                    }
                }
            }
            rec.train_ms = elapsed_ms(t_train);

            const auto t_eval = Clock::now();
            switch (c.kind) {
                case ControllerKind::YannDdpg:
                case ControllerKind::VanillaDdpg:
                    rollout = rl::evaluate_policy(env, *actor, x0, steps).rollout;
                    break;
                case ControllerKind::ExplicitMpc: {
                    const yann::ExplicitMpcPolicy policy(law, formulation.input_box);
                    rollout = rl::evaluate_policy(env, policy, x0, steps).rollout;
                    break;
                }
                case ControllerKind::NmpcOracle: {
                    auto r = nmpc::nmpc_rollout(env, nmpc_cfg, x0, steps);
                    rollout = std::move(r.rollout);
                    if (write) {
                        auto f = open_out((out / "logs" / (id + "_sqp.csv")).string());
                        f << "step,iterations,converged,stalled,cost\n";
                        for (const auto& l : r.log) {
                            f << l.step << ',' << l.iterations << ',' << (l.converged ? 1 : 0) << ','
                              << (l.stalled ? 1 : 0) << ',' << fmt(l.cost) << '\n';
                        }
                    }
                    break;
                }
            }
            rec.eval_ms = elapsed_ms(t_eval);
            rec.evaluation_infeasible = rollout.infeasible;
            rec.evaluation_steps = static_cast<int>(rollout.trajectory.size());

            ReportRow row;
            row.env = env_name;
            row.controller = c.name;
            row.seed = seed;
            row.metrics = rollout_metrics(env, rollout);
            row.train_episodes = rec.train_episodes;
            row.wall_ms = config.record_wall_time ? rec.train_ms + rec.eval_ms : 0.0;
            if (write) {
                if (config.write_trajectories) {
                    envs::write_trajectory_csv((out / "trajectories" / (id + ".csv")).string(), rollout.trajectory);
                }
                if (config.write_plots) {
                    labels.title = env_name + " / " + c.name + " / seed " + std::to_string(seed);
                    emit_svg_timeseries(rollout.trajectory, env.spec().setpoint, env.spec().input_box,
                                        (out / "plots" / (id + ".svg")).string(), labels);
                }
            }
            char line[256];
            std::snprintf(line, sizeof line, "%s seed %llu: ISE %.6g  ITAE %.6g  e_SS %.6g  cost %.6g%s%s",
                          c.name.c_str(), static_cast<unsigned long long>(seed), row.metrics.ise, row.metrics.itae,
                          row.metrics.ess, row.metrics.cum_cost,
                          rec.training_infeasible > 0
                              ? (" (" + std::to_string(rec.training_infeasible) + " infeasible training episodes)")
                                    .c_str()
                              : "",
                          rollout.infeasible ? " [evaluation infeasible]" : "");
            say(line);
            report.rows.push_back(std::move(row));
            report.runs.push_back(rec);
        }
    }
    report.summary = aggregate(report.rows);

    if (write) {
        write_report_csv((out / "report.csv").string(), report.rows);
        write_summary_csv((out / "summary.csv").string(), report.summary);
        auto runs = open_out((out / "runs.csv").string());
        runs << "env,controller,seed,train_episodes,training_infeasible,evaluation_infeasible,evaluation_steps\n";
        auto timing = open_out((out / "timing.csv").string());
        timing << "env,controller,seed,train_ms,eval_ms\n";
        for (const auto& r : report.runs) {
            runs << env_name << ',' << r.controller << ',' << r.seed << ',' << r.train_episodes << ','
                 << r.training_infeasible << ',' << (r.evaluation_infeasible ? 1 : 0) << ',' << r.evaluation_steps
                 << '\n';
            timing << env_name << ',' << r.controller << ',' << r.seed << ',' << fmt(r.train_ms) << ','
                   << fmt(r.eval_ms) << '\n';
        }
    }
    return report;
}

std::vector<SummaryRow> aggregate(const std::vector<ReportRow>& rows) {
    std::vector<SummaryRow> out;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const SummaryRow& s) { return s.env == r.env && s.controller == r.controller; });
        if (it == out.end()) {
            out.push_back({r.env, r.controller, 0, Metrics{}, r.train_episodes});
            it = out.end() - 1;
        }
        it->seeds += 1;
        it->mean.ise += r.metrics.ise;
        it->mean.itae += r.metrics.itae;
        it->mean.ess += r.metrics.ess;
        it->mean.cum_cost += r.metrics.cum_cost;
    }
    for (auto& s : out) {
        const auto k = static_cast<double>(s.seeds);
        s.mean.ise /= k;
        s.mean.itae /= k;
        s.mean.ess /= k;
        s.mean.cum_cost /= k;
    }
    return out;
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
    auto out = open_out(path);
    out << "env,controller,seed,ise,itae,ess,cum_cost,train_episodes,wall_ms\n";
    for (const auto& r : rows) {
        out << r.env << ',' << r.controller << ',' << r.seed << ',' << fmt(r.metrics.ise) << ','
            << fmt(r.metrics.itae) << ',' << fmt(r.metrics.ess) << ',' << fmt(r.metrics.cum_cost) << ','
            << r.train_episodes << ',' << fmt(r.wall_ms) << '\n';
    }
}

std::vector<ReportRow> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read " + path);
    }
    std::string line;
    std::getline(in, line);
    if (line != "env,controller,seed,ise,itae,ess,cum_cost,train_episodes,wall_ms") {
        throw ConfigError(path + ": unexpected report header");
    }
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 9) {
            throw ConfigError(path + ": malformed row '" + line + "'");
        }
        ReportRow r;
        r.env = cells[0];
        r.controller = cells[1];
        r.seed = std::stoull(cells[2]);
        r.metrics.ise = std::stod(cells[3]);
        r.metrics.itae = std::stod(cells[4]);
        r.metrics.ess = std::stod(cells[5]);
        r.metrics.cum_cost = std::stod(cells[6]);
        r.train_episodes = std::stoi(cells[7]);
        r.wall_ms = std::stod(cells[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    auto out = open_out(path);
    out << "env,controller,seeds,ise,itae,ess,cum_cost,train_episodes\n";
    for (const auto& s : rows) {
        out << s.env << ',' << s.controller << ',' << s.seeds << ',' << fmt(s.mean.ise) << ',' << fmt(s.mean.itae)
            << ',' << fmt(s.mean.ess) << ',' << fmt(s.mean.cum_cost) << ',' << s.train_episodes << '\n';
    }
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %-16s %5s %12s %12s %12s %12s %8s\n", "env", "controller", "seeds", "ISE",
                  "ITAE", "e_SS", "cost", "episodes");
    out += line;
    for (const auto& s : rows) {
        std::snprintf(line, sizeof line, "%-16s %-16s %5zu %12.5g %12.5g %12.5g %12.5g %8d\n", s.env.c_str(),
                      s.controller.c_str(), s.seeds, s.mean.ise, s.mean.itae, s.mean.ess, s.mean.cum_cost,
                      s.train_episodes);
        out += line;
    }
    return out;
}

}  // namespace yannrl::bench
