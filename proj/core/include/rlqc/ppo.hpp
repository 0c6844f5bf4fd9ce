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
#include <functional>
#include <span>
#include <vector>

#include "rlqc/env.hpp"
#include "rlqc/mlp.hpp"
#include "rlqc/rng.hpp"
#include "rlqc/targets.hpp"

namespace rlqc {

struct PpoConfig {
    int n_workers = 40;
    int rollout_len = 128;
    double clip_range = 0.2;
    double gae_lambda = 0.95;
    double gamma = 0.99;
    int epochs = 4;
    int minibatch_size = 128;
    double learning_rate = 1e-4;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    /// Global gradient-norm clip per minibatch; 0 disables it.
    double max_grad_norm = 0.5;
    /// Threads used for rollout collection (workers are split into contiguous groups).
    int threads = 1;
    Activation hidden_activation = Activation::Selu;

    void validate() const;
};

/// Shared trunk with a softmax policy head (head 0) and a linear value head (head 1).
NetworkShape ppo_network_shape(std::size_t n_actions, Activation hidden = Activation::Selu);

/// Finished episode seen during collection.
struct EpisodeSummary {
    int worker = 0;
    bool solved = false;
    int length = 0;
    double ret = 0.0;
};

/// Fixed-length segments, worker-major: entry w * rollout_len + t is step t of worker w.
struct RolloutBatch {
    int n_workers = 0;
    int rollout_len = 0;
    std::vector<Observation> observations;
    std::vector<std::uint32_t> actions;
    std::vector<double> log_probs;
    std::vector<double> rewards;
    std::vector<double> values;
    /// The episode ended with this step (solved or truncated); the next entry starts a fresh target.
    std::vector<std::uint8_t> dones;
    std::vector<std::uint8_t> truncated;
    /// V of the final observation of a truncated episode (0 elsewhere).
    std::vector<double> bootstrap_values;
    /// V of the observation following each worker's segment.
    std::vector<double> last_values;
    std::vector<double> advantages;
    std::vector<double> returns;
    std::vector<EpisodeSummary> episodes;

    std::size_t size() const {
        return observations.size();
    }
    int worker_of(std::size_t i) const {
        return static_cast<int>(i / static_cast<std::size_t>(rollout_len));
    }
};

/// One environment, its target stream and its action RNG.
class PpoWorker {
   public:
    PpoWorker(int id, const EnvConfig &env, TargetSpec targets, RngStream target_rng, RngStream action_rng);

    int id() const {
        return id_;
    }
    const Observation &observation() const {
        return obs_;
    }
    /// Applies `action`, logs a summary and resets with a fresh target when the episode ends.
    StepResult step(std::size_t action, std::vector<EpisodeSummary> &finished);
    RngStream &action_rng() {
        return action_rng_;
    }
    const CompileEnv &env() const {
        return env_;
    }

   private:
    int id_;
    CompileEnv env_;
    TargetGenerator targets_;
    RngStream action_rng_;
    Observation obs_{};
    double ret_ = 0.0;
};

/// Samples index i with probability probs[i] (inverse CDF on one uniform draw).
std::size_t sample_categorical(std::span<const double> probs, RngStream &rng);

/// Runs every worker for `rollout_len` steps against the frozen snapshot.
/// Env errors are rethrown as the same type with the worker id prefixed.
RolloutBatch collect_rollouts(const NetworkParams &policy, std::vector<PpoWorker> &workers, int rollout_len,
                              int threads = 1);

/// Fills batch.advantages and batch.returns:
/// A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1},
/// delta_t = r_t + gamma * V_next - V_t, with V_next = 0 after a solved step,
/// the bootstrap value after a truncated step and V_{t+1} otherwise.
void compute_gae(RolloutBatch &batch, double gamma, double lambda);

/// In place: mean 0, population std 1. No-op on fewer than two entries.
void normalize_advantages(std::vector<double> &advantages);

/// Mean entropy of the categorical distributions in the columns of `probs`.
double mean_entropy(const Eigen::MatrixXd &probs);

struct PpoUpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
    int minibatches = 0;
    int skipped = 0;
};

/// Loss terms and logit/value gradients of one minibatch; exposed for testing.
struct PpoMinibatchLoss {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
    Eigen::MatrixXd d_logits;  // |B| x n
    Eigen::MatrixXd d_value;   // 1 x n
};

/// Total loss = policy_loss + value_coef * value_loss - entropy_coef * entropy,
/// with policy_loss = -mean(min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)).
PpoMinibatchLoss ppo_minibatch_loss(const ForwardCache &cache, std::span<const std::uint32_t> actions,
                                    std::span<const double> old_log_probs, std::span<const double> advantages,
                                    std::span<const double> returns, const PpoConfig &config);

/// Epochs of shuffled minibatch Adam steps. Advantages are normalized first.
/// A minibatch whose loss is non-finite is skipped and counted; if every
/// minibatch is skipped a NumericsError is raised.
PpoUpdateStats ppo_update(NetworkParams &policy, AdamState &adam, const RolloutBatch &batch, const PpoConfig &config,
                          RngStream &rng);

struct PpoUpdateLog {
    std::int64_t update = 0;
    std::int64_t env_steps = 0;
    std::int64_t episodes = 0;
    double solved_pct = 0.0;
    double mean_len = 0.0;
    PpoUpdateStats stats;
};

class PpoTrainer {
   public:
    PpoTrainer(EnvConfig env, PpoConfig config, TargetSpec targets, std::uint64_t seed);

    /// Collect, estimate advantages, update.
    PpoUpdateLog run_update();

    /// Runs updates until at least `episodes` episodes have finished (counted
    /// from construction) or the callback returns false.
    void train(std::int64_t episodes, const std::function<bool(const PpoUpdateLog &)> &on_update = {});

    const NetworkParams &policy() const {
        return policy_;
    }
    const AdamState &adam() const {
        return adam_;
    }
    const EnvConfig &env_config() const {
        return env_config_;
    }
    const PpoConfig &config() const {
        return config_;
    }
    std::int64_t updates_done() const {
        return updates_;
    }
    std::int64_t episodes_done() const {
        return episodes_;
    }
    std::int64_t env_steps() const {
        return env_steps_;
    }
    std::int64_t skipped_updates() const {
        return skipped_;
    }

    void set_policy(NetworkParams params);

   private:
    EnvConfig env_config_;
    PpoConfig config_;
    std::vector<PpoWorker> workers_;
    RngStream shuffle_rng_;
    NetworkParams policy_;
    AdamState adam_;
    std::int64_t updates_ = 0;
    std::int64_t episodes_ = 0;
    std::int64_t env_steps_ = 0;
    std::int64_t skipped_ = 0;
};

}  // namespace rlqc
