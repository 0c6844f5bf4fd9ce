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

#include "rlqc/policy.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "rlqc/dqn.hpp"
#include "rlqc/errors.hpp"
#include "rlqc/ppo.hpp"

namespace rlqc {

std::string_view to_string(AgentKind kind) {
    return kind == AgentKind::Dqn ? "dqn" : "ppo";
}

AgentKind parse_agent_kind(std::string_view text) {
    if (text == "dqn") {
        return AgentKind::Dqn;
    }
    if (text == "ppo") {
        return AgentKind::Ppo;
    }
    throw NameError("unknown agent kind '" + std::string(text) + "' (expected dqn or ppo)");
}

void Policy::check_actions(std::size_t n_actions) const {
    params.validate();
    const std::size_t outputs = static_cast<std::size_t>(params.head_dim(0));
    if (kind == AgentKind::Dqn) {
        if (params.num_heads() != 1) {
            throw ValidationError("dqn network must have exactly one head");
        }
    } else if (params.num_heads() != 2 || params.head(0).activation != Activation::Softmax || params.head_dim(1) != 1) {
        throw ValidationError("ppo network must have a softmax policy head and a one-unit value head");
    }
    if (outputs != n_actions) {
        throw ValidationError("network has " + std::to_string(outputs) + " action outputs but the gate set has " +
                              std::to_string(n_actions) + " gates");
    }
    if (params.input_dim() != 8) {
        throw ValidationError("network input must have 8 entries");
    }
}

std::size_t Policy::act(const Observation &obs, ActionMode mode, RngStream *rng) const {
    const Eigen::VectorXd out = forward_one(params, obs, 0);
    const std::span<const double> values{out.data(), static_cast<std::size_t>(out.size())};
    if (mode == ActionMode::Greedy) {
        return argmax_action(values);
    }
    if (rng == nullptr) {
        throw DomainError("stochastic action selection needs an rng");
    }
    if (kind == AgentKind::Ppo) {
        return sample_categorical(values, *rng);
    }
    if (rng->uniform() < epsilon) {
        return static_cast<std::size_t>(rng->uniform_int(values.size()));
    }
    return argmax_action(values);
}

CompilationResult compile_with_policy(const Policy &policy, const EnvConfig &env, const UnitaryMatrix &target,
                                      ActionMode mode, RngStream *rng) {
    policy.check_actions(env.gateset->size());
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    CompileEnv e(env);
    Observation obs = e.reset(target);
    CompilationResult out;
    out.final_agf = agf(UnitaryMatrix::identity(), e.state().target).value;
    double policy_time = 0.0;
    while (!e.state().done) {
        const auto p0 = clock::now();
        const std::size_t a = policy.act(obs, mode, rng);
        policy_time += std::chrono::duration<double>(clock::now() - p0).count();
        const StepResult r = e.step(a);
        out.actions.push_back(a);
        obs = r.observation;
        out.final_agf = r.fidelity;
    }
    out.solved = e.state().solved;
    out.length = static_cast<int>(out.actions.size());
    out.sequence.reserve(out.actions.size());
    for (std::size_t a : out.actions) {
        out.sequence.push_back((*env.gateset)[a].label);
    }
    out.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
    out.seconds_per_step = out.length > 0 ? policy_time / out.length : 0.0;
    if (out.solved) {
        verify_compilation(env, target, out);
    }
    return out;
}

void verify_compilation(const EnvConfig &env, const UnitaryMatrix &target, const CompilationResult &result) {
    if (result.actions.empty()) {
        // Nothing to replay: check the target against the identity directly.
        const double f = agf(UnitaryMatrix::identity(), target).value;
        if (result.solved != (f >= env.tolerance_agf)) {
            throw StateError("empty sequence does not reproduce the claimed outcome");
        }
        return;
    }
    const ReplayResult r = replay(env, target, result.actions);
    if (r.solved != result.solved || std::abs(r.final_agf - result.final_agf) > 1e-12) {
        throw StateError("replay does not reproduce the claimed outcome");
    }
}

}  // namespace rlqc
