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

#include "rlqc/env.hpp"
#include "rlqc/mlp.hpp"
#include "rlqc/rng.hpp"
#include "rlqc/unitary.hpp"

namespace rlqc {

enum class AgentKind { Dqn, Ppo };

std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view text);

enum class ActionMode {
    Greedy,      // argmax Q (DQN) or the policy mode (PPO)
    Stochastic,  // sample the policy (PPO) or epsilon-greedy (DQN)
};

/// A trained network together with the rule that turns its outputs into actions.
struct Policy {
    AgentKind kind = AgentKind::Dqn;
    NetworkParams params;
    /// Exploration rate used by stochastic DQN evaluation.
    double epsilon = 0.02;

    /// Throws ValidationError unless the action head has `n_actions` outputs
    /// (DQN: one linear head; PPO: softmax head plus a one-unit value head).
    void check_actions(std::size_t n_actions) const;

    /// `rng` may be null in greedy mode.
    std::size_t act(const Observation &obs, ActionMode mode, RngStream *rng) const;
};

/// Outcome of compiling one target; `solved` results have been re-verified by replay.
struct CompilationResult {
    bool solved = false;
    std::vector<std::size_t> actions;
    std::vector<std::string> sequence;
    int length = 0;
    double final_agf = 0.0;
    double wall_time = 0.0;
    /// Mean wall time of one policy evaluation (seconds); 0 for search-based results.
    double seconds_per_step = 0.0;
};

/// Runs one episode of `policy` against `target`.
CompilationResult compile_with_policy(const Policy &policy, const EnvConfig &env, const UnitaryMatrix &target,
                                      ActionMode mode = ActionMode::Greedy, RngStream *rng = nullptr);

/// Replays `result.actions` and throws StateError if the claimed outcome does not reproduce.
void verify_compilation(const EnvConfig &env, const UnitaryMatrix &target, const CompilationResult &result);

}  // namespace rlqc
