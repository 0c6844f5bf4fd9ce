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

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "rlqc/checkpoint.hpp"
#include "rlqc/config.hpp"
#include "rlqc/io.hpp"
#include "test_helpers.hpp"

using namespace rlqc;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "rlqc");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("rlqc_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        fs::remove_all(path);
    }
    std::string operator/(const std::string &name) const {
        return (path / name).string();
    }
};

/// DQN checkpoint whose Q-values are the constant `q`.
void write_constant_checkpoint(const std::string &path, const std::string &gateset, std::vector<double> q,
                               double tol = 0.99, int max_steps = 130) {
    RngStream rng(0);
    NetworkParams p = init_network({8, static_cast<int>(q.size())}, {Activation::Linear}, rng);
    p.layers[0].weights.setZero();
    for (std::size_t i = 0; i < q.size(); ++i) {
        p.layers[0].bias[static_cast<Eigen::Index>(i)] = q[i];
    }
    EnvConfig env{std::make_shared<const GateSet>(builtin_gateset(gateset)), tol, max_steps, RewardKind::Sparse};
    save_checkpoint(make_checkpoint(AgentKind::Dqn, env, p, std::nullopt, 0, 0), path);
}

std::string line_value(const std::string &text, const std::string &key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + " ", 0) == 0) {
            return line.substr(key.size() + 1);
        }
        if (line == key) {
            return "";
        }
    }
    return "<missing>";
}

}  // namespace

TEST_CASE("sample-haar is deterministic") {
    const Result a = run_cli({"sample-haar", "--n", "2", "--seed", "1"});
    const Result b = run_cli({"sample-haar", "--n", "2", "--seed", "1"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    std::istringstream in(a.out);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        CHECK(unitarity_error(parse_matrix(line)) < 1e-12);
        ++n;
    }
    CHECK(n == 2);
    CHECK(run_cli({"sample-haar", "--n", "2", "--seed", "2"}).out != a.out);
}

TEST_CASE("RLQC_SEED fallback") {
    ::setenv("RLQC_SEED", "1", 1);
    const Result env_seed = run_cli({"sample-haar", "--n", "1"});
    ::unsetenv("RLQC_SEED");
    CHECK(env_seed.out == run_cli({"sample-haar", "--n", "1", "--seed", "1"}).out);
}

TEST_CASE("oracle finds the length-2 product") {
    const Result r = run_cli({"oracle", "--base", "hrc", "--target-from", "V1 V3", "--max-depth", "4"});
    CHECK(r.code == 0);
    CHECK(line_value(r.out, "length") == "2");
    CHECK(line_value(r.out, "sequence") == "V1 V3");
    CHECK(run_cli({"oracle", "--base", "hrc", "--target-from", "V1 V9"}).code == cli::kBadInput);
    CHECK(run_cli({"oracle", "--base", "hrc", "--haar", "--max-depth", "20"}).code == cli::kBadInput);
}

TEST_CASE("compile with rigged checkpoints") {
    TempDir tmp;
    write_constant_checkpoint(tmp / "v2.ckpt", "hrc", {0.0, 1.0, 0.0});
    const Result r = run_cli({"compile", "--checkpoint", tmp / "v2.ckpt", "--matrix", format_matrix(rlqc::testing::v2())});
    CHECK(r.code == 0);
    CHECK(line_value(r.out, "sequence") == "V2");
    CHECK(std::stod(line_value(r.out, "agf")) == doctest::Approx(1.0));
    CHECK(line_value(r.out, "solved") == "yes");
    CHECK(line_value(r.out, "length") == "1");
    CHECK(std::stod(line_value(r.out, "seconds_per_step")) >= 0.0);

    write_constant_checkpoint(tmp / "rot.ckpt", "rot-pi-128", {1, 0, 0, 0, 0, 0});
    const Result id = run_cli({"compile", "--checkpoint", tmp / "rot.ckpt", "--matrix", "1 0 0 0 0 0 1 0"});
    CHECK(id.code == 0);
    CHECK(line_value(id.out, "length") == "1");

    const Result unsolved =
        run_cli({"compile", "--checkpoint", tmp / "v2.ckpt", "--matrix", format_matrix(rlqc::testing::v1()), "--max-steps", "3"});
    CHECK(unsolved.code == cli::kUnsolved);
    CHECK(line_value(unsolved.out, "solved") == "no");

    CHECK(run_cli({"compile", "--checkpoint", tmp / "v2.ckpt", "--matrix", "1 0 1 0 0 0 1 0"}).code == cli::kBadInput);
    CHECK(run_cli({"compile", "--checkpoint", tmp / "v2.ckpt", "--matrix", "1 0 0"}).code == cli::kBadInput);
    CHECK(run_cli({"compile", "--checkpoint", tmp / "v2.ckpt", "--haar", "--gateset", "rot-pi-128"}).code ==
          cli::kBadInput);
    CHECK(run_cli({"compile", "--checkpoint", tmp / "missing.ckpt", "--haar"}).code == cli::kIo);

    const std::string bytes = read_file(tmp / "v2.ckpt");
    write_file_atomic(tmp / "trunc.ckpt", bytes.substr(0, bytes.size() - 16));
    CHECK(run_cli({"compile", "--checkpoint", tmp / "trunc.ckpt", "--haar"}).code == cli::kIntegrity);
    CHECK(run_cli({"inspect-checkpoint", tmp / "trunc.ckpt"}).code == cli::kIntegrity);

    write_file_atomic(tmp / "target.txt", format_matrix(rlqc::testing::v2()) + "\n");
    CHECK(run_cli({"compile", "--checkpoint", tmp / "v2.ckpt", "--target-file", tmp / "target.txt"}).code == 0);
}

TEST_CASE("evaluate and scaling") {
    TempDir tmp;
    write_constant_checkpoint(tmp / "v1.ckpt", "hrc", {1.0, 0.0, 0.0});
    const Result r = run_cli({"evaluate", "--checkpoint", tmp / "v1.ckpt", "--n", "20", "--targets",
                              format_matrix(rlqc::testing::v1()), "--out", tmp / "eval.csv"});
    CHECK(r.code == 0);
    CHECK(line_value(r.out, "solved_pct").rfind("100", 0) == 0);
    const std::string csv = read_file(tmp / "eval.csv");
    CHECK(csv.rfind("target_id,solved,length,final_agf,seed\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);

    CHECK(run_cli({"evaluate", "--checkpoint", tmp / "v1.ckpt", "--n", "0"}).code == cli::kBadInput);
    CHECK(run_cli({"evaluate", "--checkpoint", tmp / "v1.ckpt", "--n", "3", "--out", "/proc/rlqc/x.csv"}).code ==
          cli::kIo);

    const Result s = run_cli({"scaling", "--checkpoint", tmp / "v1.ckpt", "--tolerances", "0.9,0.99,0.999", "--n", "5",
                              "--targets", format_matrix(rlqc::testing::v1()), "--out", tmp / "scaling.csv"});
    CHECK(s.code == 0);
    CHECK(read_file(tmp / "scaling.csv").rfind("delta,mean_length,n_solved,fit_b,fit_r2,fit_rmse\n", 0) == 0);
    CHECK(run_cli({"scaling", "--checkpoint", tmp / "v1.ckpt", "--tolerances", "0.9,0.99", "--n", "5"}).code ==
          cli::kBadInput);
}

TEST_CASE("train writes a reproducible run directory") {
    TempDir tmp;
    const std::vector<std::string> base = {"train",  "--task",  "hrc",         "--episodes", "40",
                                           "--seed", "7",       "--quiet",     "--set",      "dqn.batch_size=16",
                                           "--set",  "dqn.memory_size=2000",   "--set",      "run.checkpoint_every=20"};
    auto with_output = [&](const std::string &dir) {
        auto a = base;
        a.push_back("--output");
        a.push_back(dir);
        return a;
    };
    const Result a = run_cli(with_output(tmp / "a"));
    const Result b = run_cli(with_output(tmp / "b"));
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(read_file(tmp / "a/train_log.csv") == read_file(tmp / "b/train_log.csv"));
    CHECK(read_file(tmp / "a/train_log.csv").rfind("episode,solved,length,return,epsilon,agf_final\n", 0) == 0);
    CHECK(fs::exists(tmp / "a/checkpoints/episode_20.ckpt"));
    CHECK(fs::exists(tmp / "a/checkpoints/episode_40.ckpt"));
    CHECK(fs::exists(tmp / "a/final.ckpt"));
    CHECK(read_file(tmp / "a/seeds.txt").find("seed 7") != std::string::npos);
    const RunConfig cfg = RunConfig::parse(read_file(tmp / "a/config.ini"));
    CHECK(cfg.seed == 7);
    CHECK(cfg.dqn.batch_size == 16);

    // The resolved config alone reproduces the run.
    const Result c = run_cli({"train", "--config", tmp / "a/config.ini", "--output", tmp / "c", "--quiet"});
    CHECK(c.code == 0);
    CHECK(read_file(tmp / "c/train_log.csv") == read_file(tmp / "a/train_log.csv"));

    const Result inspect = run_cli({"inspect-checkpoint", tmp / "a/final.ckpt"});
    CHECK(inspect.code == 0);
    CHECK(inspect.out.find("agent dqn") != std::string::npos);
    CHECK(inspect.out.find("episodes 40") != std::string::npos);
}

TEST_CASE("train ppo and fixed target runs") {
    TempDir tmp;
    const Result p = run_cli({"train", "--task", "rotations", "--episodes", "20", "--seed", "3", "--quiet", "--output",
                              tmp / "ppo", "--set", "ppo.n_workers=4", "--set", "ppo.rollout_len=32", "--set",
                              "env.targets=product:1:3", "--set", "env.tolerance_agf=0.95"});
    CHECK(p.code == 0);
    CHECK(read_file(tmp / "ppo/train_log.csv")
              .rfind("update,env_steps,episodes,solved_pct,mean_len,policy_loss,value_loss,entropy\n", 0) == 0);
    const Checkpoint ck = load_checkpoint(tmp / "ppo/final.ckpt");
    CHECK(ck.agent == AgentKind::Ppo);
    CHECK(ck.max_steps == 300);

    const Result f = run_cli({"train", "--task", "fixed-target", "--episodes", "3", "--quiet", "--output",
                              tmp / "fixed", "--set", "env.tolerance_agf=0.5"});
    CHECK(f.code == 0);
    CHECK(fs::exists(tmp / "fixed/best_solution.txt"));
}

TEST_CASE("train input and io errors") {
    TempDir tmp;
    CHECK(run_cli({"train", "--task", "bogus"}).code == cli::kBadInput);
    CHECK(run_cli({"train", "--set", "dqn.nope=1", "--output", tmp / "x"}).code == cli::kBadInput);
    CHECK(run_cli({"train", "--set", "missing_equals", "--output", tmp / "x"}).code == cli::kBadInput);
    CHECK(run_cli({"train", "--config", tmp / "absent.ini"}).code == cli::kIo);
    write_file_atomic(tmp / "bad.ini", "[env]\nunknown_key = 3\n");
    CHECK(run_cli({"train", "--config", tmp / "bad.ini"}).code == cli::kBadInput);
    CHECK(run_cli({"train", "--episodes", "1", "--quiet", "--output", "/proc/rlqc_no_such_dir"}).code == cli::kIo);
    CHECK(run_cli({"no-such-command"}).code == cli::kBadInput);
    CHECK(run_cli({}).code == cli::kBadInput);
}

TEST_CASE("interrupted training checkpoints and exits 130") {
    TempDir tmp;
    cli::request_stop();
    const Result r = run_cli({"train", "--task", "hrc", "--episodes", "1000", "--quiet", "--output", tmp / "run",
                              "--set", "dqn.batch_size=8", "--set", "dqn.memory_size=100"});
    cli::reset_stop_request();
    CHECK(r.code == cli::kInterrupted);
    const Checkpoint ck = load_checkpoint(tmp / "run/final.ckpt");
    CHECK(ck.episodes == 1);
}
