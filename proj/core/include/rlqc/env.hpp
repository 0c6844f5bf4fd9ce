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

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rlqc/gateset.hpp"
#include "rlqc/unitary.hpp"

namespace rlqc {

enum class RewardKind { Dense, Sparse };

std::string_view to_string(RewardKind kind);
RewardKind parse_reward_kind(std::string_view text);

struct EnvConfig {
    std::shared_ptr<const GateSet> gateset;
    double tolerance_agf = 0.99;
    int max_steps = 130;
    RewardKind reward = RewardKind::Dense;

    /// Throws ValidationError unless 1/3 < tolerance < 1 and 1 <= max_steps <= 10000.
    void validate() const;
};

/// Real and imaginary parts of O_n = U_n^dagger * target, row-major, re before im.
using Observation = std::array<double, 8>;

Observation make_observation(const UnitaryMatrix &product, const UnitaryMatrix &target);

struct EnvState {
    UnitaryMatrix target;
    UnitaryMatrix product;
    int step = 0;
    bool done = false;
    bool solved = false;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    bool solved = false;
    /// Episode hit max_steps without solving. Never set together with `solved`.
    bool truncated = false;
    double fidelity = 0.0;
};

/// Reward for the transition that produced a circuit of `gates_used` gates.
///
/// Dense:  solved -> (L - n) + 1, otherwise -d / L.
/// Sparse: solved -> 0,           otherwise -1 / L.
double step_reward(RewardKind kind, bool solved, double dist, int gates_used, int max_steps);

/// Episodic compilation environment. Each gate is appended on the right:
/// U_{n+1} = U_n * A, so target = U_n * O_n holds at every step.
class CompileEnv {
   public:
    explicit CompileEnv(EnvConfig config);

    /// Starts an episode. Throws ValidationError if the target is not unitary.
    /// The solved check is never applied at reset.
    Observation reset(const UnitaryMatrix &target);

    /// Applies gate `action`. StateError after the episode is done; DomainError for a bad index.
    StepResult step(std::size_t action);

    Observation observation() const {
        return make_observation(state_.product, state_.target);
    }
    const EnvState &state() const {
        return state_;
    }
    const EnvConfig &config() const {
        return config_;
    }
    std::size_t num_actions() const {
        return config_.gateset->size();
    }

   private:
    EnvConfig config_;
    EnvState state_;
    bool started_ = false;
};

struct ReplayResult {
    bool solved = false;
    double final_agf = 0.0;
    std::vector<double> rewards;
};

/// Re-executes an action list from a fresh reset. Same errors as step
/// (including StateError if the episode finishes before the list does).
ReplayResult replay(const EnvConfig &config, const UnitaryMatrix &target, const std::vector<std::size_t> &actions);

}  // namespace rlqc
