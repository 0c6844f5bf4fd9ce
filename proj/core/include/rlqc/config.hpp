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

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rlqc/dqn.hpp"
#include "rlqc/env.hpp"
#include "rlqc/policy.hpp"
#include "rlqc/ppo.hpp"
#include "rlqc/targets.hpp"

namespace rlqc {

/// Everything a training run needs. Text form is INI:
///
///   [run]  task, agent, seed, episodes, output_dir, checkpoint_every, threads
///   [env]  gateset, tolerance_agf, max_steps, reward, targets
///   [net]  hidden_activation
///   [dqn]  learning_rate, batch_size, memory_size, epsilon_decay, epsilon_min,
///          gamma, target_sync, her, her_k, updates_per_episode, clip_targets,
///          fixed_epsilon
///   [ppo]  n_workers, rollout_len, clip_range, gae_lambda, gamma, epochs,
///          minibatch_size, learning_rate, entropy_coef, value_coef, max_grad_norm
///
/// `run.task` picks the preset every other key defaults to.
struct RunConfig {
    std::string task = "hrc";
    AgentKind agent = AgentKind::Dqn;
    std::uint64_t seed = 1;
    std::int64_t episodes = 200000;
    std::string output_dir = "runs/hrc";
    std::int64_t checkpoint_every = 10000;
    int threads = 1;

    std::string gateset = "hrc";
    double tolerance_agf = 0.99;
    int max_steps = 130;
    RewardKind reward = RewardKind::Sparse;
    std::string targets = "haar";

    Activation hidden_activation = Activation::Selu;
    DqnConfig dqn = DqnConfig::hrc_defaults();
    PpoConfig ppo;

    /// "fixed-target", "hrc" or "rotations". NameError otherwise.
    static RunConfig preset(std::string_view task);
    static std::vector<std::string> preset_names();

    /// ParseError for malformed text (with line), ValidationError for unknown
    /// keys or bad values.
    static RunConfig parse(std::string_view text);

    /// Sets one "section.key" value. ValidationError for unknown keys or bad values.
    void set(const std::string &dotted_key, const std::string &value);

    /// Every key with its resolved value; parse(to_ini()) == *this.
    std::string to_ini() const;

    /// Throws ValidationError on any inconsistent value.
    void validate() const;

    /// Resolves the gate set (built-in name or file path).
    EnvConfig env_config() const;
    TargetSpec target_spec() const;

    /// Copies the net activation and thread count into the agent configs.
    DqnConfig resolved_dqn() const;
    PpoConfig resolved_ppo() const;
};

}  // namespace rlqc
