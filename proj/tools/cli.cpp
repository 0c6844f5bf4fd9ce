// Copyright 2026 The rlqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <atomic>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "rlqc/checkpoint.hpp"
#include "rlqc/config.hpp"
#include "rlqc/dqn.hpp"
#include "rlqc/errors.hpp"
#include "rlqc/eval.hpp"
#include "rlqc/io.hpp"
#include "rlqc/oracle.hpp"
#include "rlqc/ppo.hpp"
#include "rlqc/unitary.hpp"

namespace rlqc::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) {
    g_stop.store(true);
}

namespace fs = std::filesystem;

struct Seed {
    std::uint64_t value;
    std::string source;
};

// --seed, then RLQC_SEED, then the fallback.
Seed resolve_seed(const std::optional<std::uint64_t> &flag, std::uint64_t fallback) {
    if (flag) {
        return {*flag, "command line"};
    }
    if (const char *env = std::getenv("RLQC_SEED"); env != nullptr && *env != '\0') {
        std::uint64_t v = 0;
        const std::string s(env);
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
            throw ValidationError("RLQC_SEED must be a non-negative integer, got '" + s + "'");
        }
        return {v, "RLQC_SEED"};
    }
    return {fallback, "default"};
}

struct TargetSource {
    std::string matrix;
    std::string file;
    std::string sequence;
    bool haar = false;
};

void add_target_options(CLI::App *cmd, TargetSource &t, bool with_sequence) {
    cmd->add_option("--matrix", t.matrix, "Target as 8 floats: re00 im00 re01 im01 re10 im10 re11 im11");
    cmd->add_option("--target-file", t.file, "File holding the target in the same format");
    cmd->add_flag("--haar", t.haar, "Draw a Haar-random target from --seed");
    if (with_sequence) {
        cmd->add_option("--target-from", t.sequence, "Target built from a space-separated gate sequence");
    }
}

UnitaryMatrix read_target(const TargetSource &t, const GateSet *gates, std::uint64_t seed) {
    const int given = !t.matrix.empty() + !t.file.empty() + !t.sequence.empty() + (t.haar ? 1 : 0);
    if (given != 1) {
        throw ValidationError("give exactly one target source (--matrix, --target-file, --haar" +
                              std::string(gates != nullptr ? ", --target-from" : "") + ")");
    }
    if (!t.matrix.empty()) {
        return parse_matrix(t.matrix);
    }
    if (!t.file.empty()) {
        return parse_matrix(read_file(t.file));
    }
    if (!t.sequence.empty()) {
        return gates->product(gates->parse_sequence(t.sequence));
    }
    RngStream rng(seed);
    return haar_sample(rng);
}

std::string join(const std::vector<std::string> &parts) {
    std::string s;
    for (const auto &p : parts) {
        s += (s.empty() ? "" : " ") + p;
    }
    return s;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string config;
    std::string task = "hrc";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> episodes;
    std::string output;
    std::vector<std::string> overrides;
    bool single_thread = false;
    std::optional<int> threads;
    bool quiet = false;
};

int cmd_train(const TrainArgs &a, std::ostream &out, std::ostream &err) {
    RunConfig cfg = a.config.empty() ? RunConfig::preset(a.task) : RunConfig::parse(read_file(a.config));
    for (const std::string &kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("--set expects section.key=value, got '" + kv + "'");
        }
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    const Seed seed = resolve_seed(a.seed, cfg.seed);
    cfg.seed = seed.value;
    if (a.episodes) {
        cfg.episodes = *a.episodes;
    }
    if (!a.output.empty()) {
        cfg.output_dir = a.output;
    }
    if (a.single_thread) {
        cfg.threads = 1;
    } else if (a.threads) {
        cfg.threads = *a.threads;
    }
    cfg.validate();
    const EnvConfig env = cfg.env_config();
    const TargetSpec targets = cfg.target_spec();

    const fs::path dir(cfg.output_dir);
    ensure_directory(dir / "checkpoints");
    write_file_atomic(dir / "config.ini", cfg.to_ini());
    write_file_atomic(dir / "seeds.txt", "seed " + std::to_string(seed.value) + "\nsource " + seed.source +
                                             "\nthreads " + std::to_string(cfg.threads) + "\n");

    int status = kOk;
    auto checkpoint_path = [&](std::int64_t episodes) {
        return dir / "checkpoints" / ("episode_" + std::to_string(episodes) + ".ckpt");
    };

    if (cfg.agent == AgentKind::Dqn) {
        DqnTrainer tr(env, cfg.resolved_dqn(), targets, seed.value);
        CsvWriter log(dir / "train_log.csv", {"episode", "solved", "length", "return", "epsilon", "agf_final"});
        auto save = [&](const fs::path &p) {
            save_checkpoint(make_checkpoint(AgentKind::Dqn, env, tr.online(), tr.adam(), tr.episodes_done(), seed.value), p);
        };
        std::int64_t solved = 0;
        try {
            tr.train(cfg.episodes, [&](const DqnEpisodeLog &l) {
                log.row({std::to_string(l.episode), l.solved ? "1" : "0", std::to_string(l.length), format_double(l.ret),
                         format_double(l.epsilon), format_double(l.agf_final)});
                solved += l.solved ? 1 : 0;
                const std::int64_t done = l.episode + 1;
                if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) {
                    log.flush();
                    save(checkpoint_path(done));
                    if (!a.quiet) {
                        out << "episode " << done << " solved " << solved << " epsilon " << l.epsilon << '\n';
                    }
                }
                if (stop_requested()) {
                    status = kInterrupted;
                    return false;
                }
                return true;
            });
        } catch (const NumericsError &e) {
            err << "numerical failure: " << e.what() << '\n';
            status = kNumerics;
        }
        log.flush();
        save(dir / "final.ckpt");
        if (const auto &best = tr.best(); best && targets.kind == TargetKind::Fixed) {
            std::vector<std::string> labels;
            for (std::size_t act : best->actions) {
                labels.push_back((*env.gateset)[act].label);
            }
            write_file_atomic(dir / "best_solution.txt", "episode " + std::to_string(best->episode) + "\nlength " +
                                                             std::to_string(best->actions.size()) + "\nagf " +
                                                             format_double(best->agf) + "\nsequence " + join(labels) + "\n");
            out << "best solution length " << best->actions.size() << " (episode " << best->episode << ")\n";
        }
        out << "trained " << tr.episodes_done() << " episodes, solved " << solved << "; checkpoint "
            << (dir / "final.ckpt").string() << '\n';
    } else {
        PpoTrainer tr(env, cfg.resolved_ppo(), targets, seed.value);
        CsvWriter log(dir / "train_log.csv", {"update", "env_steps", "episodes", "solved_pct", "mean_len", "policy_loss",
                                              "value_loss", "entropy"});
        auto save = [&](const fs::path &p) {
            save_checkpoint(make_checkpoint(AgentKind::Ppo, env, tr.policy(), tr.adam(), tr.episodes_done(), seed.value), p);
        };
        std::int64_t next_ckpt = cfg.checkpoint_every;
        try {
            tr.train(cfg.episodes, [&](const PpoUpdateLog &l) {
                log.row({std::to_string(l.update), std::to_string(l.env_steps), std::to_string(l.episodes),
                         format_double(l.solved_pct), format_double(l.mean_len), format_double(l.stats.policy_loss),
                         format_double(l.stats.value_loss), format_double(l.stats.entropy)});
                if (cfg.checkpoint_every > 0 && l.episodes >= next_ckpt) {
                    log.flush();
                    save(checkpoint_path(l.episodes));
                    while (next_ckpt <= l.episodes) {
                        next_ckpt += cfg.checkpoint_every;
                    }
                    if (!a.quiet) {
                        out << "update " << l.update << " episodes " << l.episodes << " solved " << l.solved_pct
                            << "%\n";
                    }
                }
                if (stop_requested()) {
                    status = kInterrupted;
                    return false;
                }
                return true;
            });
        } catch (const NumericsError &e) {
            err << "numerical failure: " << e.what() << '\n';
            status = kNumerics;
        }
        log.flush();
        save(dir / "final.ckpt");
        out << "trained " << tr.updates_done() << " updates, " << tr.episodes_done() << " episodes; checkpoint "
            << (dir / "final.ckpt").string() << '\n';
    }
    if (status == kInterrupted) {
        err << "interrupted; checkpoint written to " << (dir / "final.ckpt").string() << '\n';
    }
    return status;
}

// ------------------------------------------------------- checkpoint-based

struct PolicyArgs {
    std::string checkpoint;
    std::string gateset;
    std::optional<double> tolerance;
    std::optional<int> max_steps;
    bool stochastic = false;
};

void add_policy_options(CLI::App *cmd, PolicyArgs &p) {
    cmd->add_option("--checkpoint", p.checkpoint, "Trained checkpoint")->required();
    cmd->add_option("--gateset", p.gateset, "Gate set name or file (default: the one recorded in the checkpoint)");
    cmd->add_option("--tolerance", p.tolerance, "Solved threshold on AGF (default: checkpoint value)");
    cmd->add_option("--max-steps", p.max_steps, "Episode length cap (default: checkpoint value)");
    cmd->add_flag("--stochastic", p.stochastic, "Sample actions instead of acting greedily");
}

struct LoadedPolicy {
    Checkpoint ckpt;
    EnvConfig env;
};

LoadedPolicy load_policy(const PolicyArgs &p) {
    LoadedPolicy lp{load_checkpoint(p.checkpoint), {}};
    auto gates = std::make_shared<const GateSet>(resolve_gateset(p.gateset.empty() ? lp.ckpt.gateset_name : p.gateset));
    lp.ckpt.check_gateset(*gates);
    lp.env = EnvConfig{gates, p.tolerance.value_or(lp.ckpt.tolerance_agf), p.max_steps.value_or(lp.ckpt.max_steps),
                       lp.ckpt.reward};
    lp.env.validate();
    return lp;
}

struct CompileArgs {
    PolicyArgs policy;
    TargetSource target;
    std::optional<std::uint64_t> seed;
};

int cmd_compile(const CompileArgs &a, std::ostream &out) {
    const LoadedPolicy lp = load_policy(a.policy);
    const Seed seed = resolve_seed(a.seed, 0);
    const UnitaryMatrix target = read_target(a.target, nullptr, seed.value);
    RngStream rng = RngStream(seed.value).split(1);
    const CompilationResult r = compile_with_policy(lp.ckpt.policy(), lp.env, target,
                                                    a.policy.stochastic ? ActionMode::Stochastic : ActionMode::Greedy,
                                                    &rng);
    out << "sequence " << join(r.sequence) << '\n';
    out << "agf " << std::setprecision(17) << r.final_agf << '\n';
    out << "length " << r.length << '\n';
    out << "solved " << (r.solved ? "yes" : "no") << '\n';
    out << "seconds_per_step " << std::setprecision(6) << r.seconds_per_step << '\n';
    out << "wall_time " << r.wall_time << '\n';
    return r.solved ? kOk : kUnsolved;
}

struct EvaluateArgs {
    PolicyArgs policy;
    int n = 1000;
    std::optional<std::uint64_t> seed;
    std::string targets = "haar";
    std::string out_csv;
    int threads = 1;
};

void write_eval_csv(const fs::path &path, const EvalResult &r) {
    std::string text = "target_id,solved,length,final_agf,seed\n";
    for (const TargetOutcome &o : r.targets) {
        text += std::to_string(o.target_id) + ',' + (o.solved ? "1" : "0") + ',' + std::to_string(o.length) + ',' +
                format_double(o.final_agf) + ',' + std::to_string(o.seed) + '\n';
    }
    write_file_atomic(path, text);
}

int cmd_evaluate(const EvaluateArgs &a, std::ostream &out) {
    const LoadedPolicy lp = load_policy(a.policy);
    const Seed seed = resolve_seed(a.seed, 12345);
    const EvalResult r = evaluate(lp.ckpt.policy(), lp.env, TargetSpec::parse(a.targets), a.n, seed.value,
                                  {a.policy.stochastic ? ActionMode::Stochastic : ActionMode::Greedy, a.threads});
    if (!a.out_csv.empty()) {
        write_eval_csv(a.out_csv, r);
    }
    const EvalReport &e = r.report;
    out << "n_targets " << e.n_targets << '\n';
    out << "solved_pct " << e.solved_pct << '\n';
    out << "mean_length " << e.mean_length << '\n';
    out << "p95_length " << e.p95_length << '\n';
    out << "p99_length " << e.p99_length << '\n';
    out << "tolerance " << e.tolerance << '\n';
    out << "seconds_per_step " << e.mean_seconds_per_step << '\n';
    return kOk;
}

struct ScalingArgs {
    PolicyArgs policy;
    std::vector<double> tolerances;
    int n = 100;
    std::optional<std::uint64_t> seed;
    std::string targets = "product:1:300";
    std::string out_csv;
    int threads = 1;
};

int cmd_scaling(const ScalingArgs &a, std::ostream &out) {
    const LoadedPolicy lp = load_policy(a.policy);
    const Seed seed = resolve_seed(a.seed, 12345);
    const ScalingResult r = scaling_study(lp.ckpt.policy(), lp.env, a.tolerances, TargetSpec::parse(a.targets), a.n,
                                          seed.value,
                                          {a.policy.stochastic ? ActionMode::Stochastic : ActionMode::Greedy, a.threads});
    std::string text = "delta,mean_length,n_solved,fit_b,fit_r2,fit_rmse\n";
    for (const ScalingPoint &p : r.points) {
        text += format_double(p.delta) + ',' + format_double(p.mean_length) + ',' + std::to_string(p.n_solved) + ',' +
                format_double(r.fit.b) + ',' + format_double(r.fit.r2) + ',' + format_double(r.fit.rmse) + '\n';
    }
    if (!a.out_csv.empty()) {
        write_file_atomic(a.out_csv, text);
    }
    out << text;
    out << "fit a " << r.fit.a << " b " << r.fit.b << " r2 " << r.fit.r2 << " rmse " << r.fit.rmse
        << (r.fit.degenerate ? " (degenerate)" : "") << '\n';
    return kOk;
}

struct OracleArgs {
    std::string base = "hrc";
    TargetSource target;
    std::optional<std::uint64_t> seed;
    double tolerance = 0.99;
    int max_depth = 12;
};

int cmd_oracle(const OracleArgs &a, std::ostream &out) {
    const GateSet gates = resolve_gateset(a.base);
    const Seed seed = resolve_seed(a.seed, 0);
    const UnitaryMatrix target = read_target(a.target, &gates, seed.value);
    const CompilationResult r = bfs_compile(target, gates, a.tolerance, a.max_depth);
    out << "sequence " << join(r.sequence) << '\n';
    out << "agf " << std::setprecision(17) << r.final_agf << '\n';
    out << "length " << r.length << '\n';
    out << "solved " << (r.solved ? "yes" : "no") << '\n';
    out << "wall_time " << std::setprecision(6) << r.wall_time << '\n';
    return r.solved ? kOk : kUnsolved;
}

int cmd_sample_haar(int n, const std::optional<std::uint64_t> &seed_flag, std::ostream &out) {
    if (n < 0) {
        throw ValidationError("--n must be non-negative");
    }
    RngStream rng(resolve_seed(seed_flag, 0).value);
    for (int i = 0; i < n; ++i) {
        out << format_matrix(haar_sample(rng)) << '\n';
    }
    return kOk;
}

int cmd_inspect(const std::string &path, std::ostream &out) {
    const Checkpoint c = load_checkpoint(path);
    out << describe_checkpoint(c);
    std::size_t params = 0;
    for (const DenseLayer &l : c.params.layers) {
        params += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    }
    out << "parameters " << params << '\n';
    out << "params_checksum " << std::hex << params_checksum(c.params) << std::dec << '\n';
    return kOk;
}

}  // namespace

void install_signal_handlers() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

bool stop_requested() {
    return g_stop.load();
}

void request_stop() {
    g_stop.store(true);
}

void reset_stop_request() {
    g_stop.store(false);
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Reinforcement-learning single-qubit compiler", "rlqc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rlqc 0.1.0");

    TrainArgs train;
    auto *c_train = app.add_subcommand("train", "Train an agent");
    c_train->add_option("--config", train.config, "INI run configuration");
    c_train->add_option("--task", train.task, "Preset used when no --config is given")
        ->check(CLI::IsMember(RunConfig::preset_names()));
    c_train->add_option("--seed", train.seed, "Seed (falls back to RLQC_SEED, then the config)");
    c_train->add_option("--episodes", train.episodes, "Training budget in episodes");
    c_train->add_option("--output", train.output, "Run directory");
    c_train->add_option("--set", train.overrides, "Override a config key: section.key=value");
    c_train->add_flag("--single-thread", train.single_thread, "Force one thread (bit-exact reruns)");
    c_train->add_option("--threads", train.threads, "Rollout threads (PPO)");
    c_train->add_flag("--quiet", train.quiet, "No progress lines");

    CompileArgs compile;
    auto *c_compile = app.add_subcommand("compile", "Compile one target with a trained agent");
    add_policy_options(c_compile, compile.policy);
    add_target_options(c_compile, compile.target, false);
    c_compile->add_option("--seed", compile.seed, "Seed for --haar and stochastic actions");

    EvaluateArgs evaluate_args;
    auto *c_eval = app.add_subcommand("evaluate", "Solved rate and length statistics on fresh targets");
    add_policy_options(c_eval, evaluate_args.policy);
    c_eval->add_option("--n", evaluate_args.n, "Number of targets");
    c_eval->add_option("--seed", evaluate_args.seed, "Target seed");
    c_eval->add_option("--targets", evaluate_args.targets, "Target distribution (haar, product:<min>:<max>, ...)");
    c_eval->add_option("--out", evaluate_args.out_csv, "Per-target CSV");
    c_eval->add_option("--threads", evaluate_args.threads, "Worker threads");

    ScalingArgs scaling;
    auto *c_scaling = app.add_subcommand("scaling", "Mean length against tolerance, with a polylog fit");
    add_policy_options(c_scaling, scaling.policy);
    c_scaling->add_option("--tolerances", scaling.tolerances, "AGF tolerances (at least 3)")
        ->required()
        ->delimiter(',');
    c_scaling->add_option("--n", scaling.n, "Targets per tolerance");
    c_scaling->add_option("--seed", scaling.seed, "Target seed");
    c_scaling->add_option("--targets", scaling.targets, "Target distribution");
    c_scaling->add_option("--out", scaling.out_csv, "Scaling CSV");
    c_scaling->add_option("--threads", scaling.threads, "Worker threads");

    OracleArgs oracle;
    auto *c_oracle = app.add_subcommand("oracle", "Exact breadth-first compilation");
    c_oracle->add_option("--base", oracle.base, "Gate set name or file");
    add_target_options(c_oracle, oracle.target, true);
    c_oracle->add_option("--seed", oracle.seed, "Seed for --haar");
    c_oracle->add_option("--tolerance", oracle.tolerance, "Solved threshold on AGF");
    c_oracle->add_option("--max-depth", oracle.max_depth, "Longest sequence searched");

    int haar_n = 1;
    std::optional<std::uint64_t> haar_seed;
    auto *c_haar = app.add_subcommand("sample-haar", "Print Haar-random unitaries");
    c_haar->add_option("--n", haar_n, "How many");
    c_haar->add_option("--seed", haar_seed, "Seed");

    std::string inspect_path;
    auto *c_inspect = app.add_subcommand("inspect-checkpoint", "Print a checkpoint header");
    c_inspect->add_option("path", inspect_path, "Checkpoint file")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (*c_train) {
            return cmd_train(train, out, err);
        }
        if (*c_compile) {
            return cmd_compile(compile, out);
        }
        if (*c_eval) {
            return cmd_evaluate(evaluate_args, out);
        }
        if (*c_scaling) {
            return cmd_scaling(scaling, out);
        }
        if (*c_oracle) {
            return cmd_oracle(oracle, out);
        }
        if (*c_haar) {
            return cmd_sample_haar(haar_n, haar_seed, out);
        }
        if (*c_inspect) {
            return cmd_inspect(inspect_path, out);
        }
    } catch (const NumericsError &e) {
        err << "error: " << e.what() << '\n';
        return kNumerics;
    } catch (const IoError &e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const IntegrityError &e) {
        err << "error: " << e.what() << '\n';
        return kIntegrity;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const fs::filesystem_error &e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    }
    return kBadInput;
}

}  // namespace rlqc::cli
