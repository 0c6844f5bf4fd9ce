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

#include "rlqc/env.hpp"

#include <cmath>

#include "rlqc/errors.hpp"

namespace rlqc {

std::string_view to_string(RewardKind kind) {
    return kind == RewardKind::Dense ? "dense" : "sparse";
}

RewardKind parse_reward_kind(std::string_view text) {
    if (text == "dense") {
        return RewardKind::Dense;
    }
    if (text == "sparse") {
        return RewardKind::Sparse;
    }
    throw ValidationError("reward kind must be 'dense' or 'sparse', got '" + std::string(text) + "'");
}

void EnvConfig::validate() const {
    if (!gateset) {
        throw ValidationError("environment needs a gate set");
    }
    if (!(tolerance_agf > 1.0 / 3.0 && tolerance_agf < 1.0)) {
        throw ValidationError("tolerance_agf must lie in (1/3, 1), got " + std::to_string(tolerance_agf));
    }
    if (max_steps < 1 || max_steps > 10000) {
        throw ValidationError("max_steps must lie in [1, 10000], got " + std::to_string(max_steps));
    }
}

Observation make_observation(const UnitaryMatrix &product, const UnitaryMatrix &target) {
    return compose(dagger(product), target).to_reals();
}

double step_reward(RewardKind kind, bool solved, double dist, int gates_used, int max_steps) {
    const double L = static_cast<double>(max_steps);
    if (kind == RewardKind::Dense) {
        return solved ? static_cast<double>(max_steps - gates_used) + 1.0 : -dist / L;
    }
    return solved ? 0.0 : -1.0 / L;
}

CompileEnv::CompileEnv(EnvConfig config) : config_(std::move(config)) {
    config_.validate();
}

Observation CompileEnv::reset(const UnitaryMatrix &target) {
    state_.target = UnitaryMatrix::checked(target(0, 0), target(0, 1), target(1, 0), target(1, 1));
    state_.product = UnitaryMatrix::identity();
    state_.step = 0;
    state_.done = false;
    state_.solved = false;
    started_ = true;
    return observation();
}

StepResult CompileEnv::step(std::size_t action) {
    if (!started_) {
        throw StateError("step called before reset");
    }
    if (state_.done) {
        throw StateError("step called on a finished episode");
    }
    if (action >= config_.gateset->size()) {
        throw DomainError("action " + std::to_string(action) + " out of range [0, " +
                          std::to_string(config_.gateset->size()) + ")");
    }
    state_.product = compose(state_.product, config_.gateset->matrix(action));
    state_.step += 1;
    const double fid = agf(state_.product, state_.target).value;
    state_.solved = fid >= config_.tolerance_agf;
    state_.done = state_.solved || state_.step == config_.max_steps;

    StepResult r;
    r.observation = observation();
    r.fidelity = fid;
    r.solved = state_.solved;
    r.done = state_.done;
    r.truncated = state_.done && !state_.solved;
    r.reward = step_reward(config_.reward, r.solved, 1.0 - fid, state_.step, config_.max_steps);
    return r;
}

ReplayResult replay(const EnvConfig &config, const UnitaryMatrix &target, const std::vector<std::size_t> &actions) {
    if (actions.size() > static_cast<std::size_t>(config.max_steps)) {
        throw DomainError("action list longer than max_steps");
    }
    CompileEnv env(config);
    env.reset(target);
    ReplayResult out;
    out.final_agf = agf(UnitaryMatrix::identity(), env.state().target).value;
    for (std::size_t a : actions) {
        const StepResult r = env.step(a);
        out.rewards.push_back(r.reward);
        out.final_agf = r.fidelity;
        out.solved = r.solved;
    }
    return out;
}

}  // namespace rlqc
