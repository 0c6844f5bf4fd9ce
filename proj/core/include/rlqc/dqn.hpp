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
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rlqc/env.hpp"
#include "rlqc/mlp.hpp"
#include "rlqc/rng.hpp"
#include "rlqc/targets.hpp"

namespace rlqc {

/// Goal-conditioned experience tuple. `terminal` marks a solved transition,
/// `truncated` one that hit the episode cap; they are never both set.
struct Transition {
    Observation obs{};
    std::uint32_t action = 0;
    double reward = 0.0;
    Observation next_obs{};
    bool terminal = false;
    bool truncated = false;
    std::int64_t episode_id = 0;
    std::int32_t step_in_episode = 0;
};

/// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
   public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition &t);
    std::size_t size() const {
        return size_;
    }
    std::size_t capacity() const {
        return capacity_;
    }
    /// Oldest-first view index: 0 is the oldest stored transition.
    const Transition &at(std::size_t i) const;

    /// `batch` distinct entries drawn uniformly (Floyd's algorithm). Requires batch <= size().
    std::vector<const Transition *> sample(std::size_t batch, RngStream &rng) const;

   private:
    std::size_t capacity_;
    std::vector<Transition> ring_;
    std::size_t next_ = 0;
    std::size_t size_ = 0;
};

struct DqnConfig {
    double learning_rate = 1e-4;
    int batch_size = 200;
    int memory_size = 500000;
    double epsilon_decay = 0.99931;
    double epsilon_min = 0.02;
    double gamma = 0.99;
    /// Online-network gradient steps between target-network syncs.
    int target_sync = 1000;
    bool her = true;
    double her_k = 0.10;
    /// Gradient steps after each episode; 0 means ceil(episode_length / 4).
    int updates_per_episode = 0;
    /// Clamp Bellman targets to the range of achievable returns (see q_value_bounds).
    bool clip_targets = true;
    Activation hidden_activation = Activation::Selu;
    /// When set, epsilon is pinned to this value and the network is never trained.
    std::optional<double> fixed_epsilon;

    /// Throws ValidationError on out-of-range values.
    void validate() const;

    /// Fixed-target task defaults (lr 5e-4, batch 1000, memory 1e4, decay 0.99976).
    static DqnConfig fixed_target_defaults();
    /// HRC task defaults (lr 1e-4, batch 200, memory 5e5, decay 0.99931, HER on).
    static DqnConfig hrc_defaults();
};

/// max(epsilon_min, epsilon_decay^episode).
double epsilon_schedule(std::int64_t episode, const DqnConfig &config);

/// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax_action(std::span<const double> values);

/// Epsilon-greedy action for one observation.
std::size_t select_action(const NetworkParams &q_net, const Observation &obs, double epsilon, RngStream &rng);

/// One finished episode with the partial products U_0 = I, U_1, ..., U_T.
struct EpisodeRecord {
    std::int64_t episode_id = 0;
    UnitaryMatrix target;
    std::vector<UnitaryMatrix> products;
    std::vector<Transition> transitions;
    bool done = false;

    std::vector<std::size_t> actions() const;
};

/// Hindsight relabeling with the "episode" goal strategy: ceil(k * T) achieved
/// products U_m (m in [1, T], distinct) become substitute goals. For each goal
/// every transition is re-expressed relative to it and re-rewarded; the
/// relabeled episode ends at the first step that reaches the goal within
/// tolerance, which becomes terminal. Throws StateError for an unfinished
/// episode.
std::vector<Transition> her_relabel(const EpisodeRecord &episode, const EnvConfig &env, double k, RngStream &rng);

/// Discount plus optional clamp applied to every Bellman target.
struct BellmanSpec {
    double gamma = 0.99;
    double min_target = -std::numeric_limits<double>::infinity();
    double max_target = std::numeric_limits<double>::infinity();
};

/// Interval that contains every discounted return of the environment:
/// [min step reward / (1 - gamma), largest single reward]. Positive rewards
/// only occur on the terminal step, so the upper end is one reward.
BellmanSpec q_value_bounds(const EnvConfig &env, double gamma);

/// y = r for terminal transitions, r + gamma * max_a Q_target(s', a) otherwise
/// (truncated transitions bootstrap), clamped to [min_target, max_target].
std::vector<double> bellman_targets(const NetworkParams &target_net, std::span<const Transition *const> batch,
                                    const BellmanSpec &bellman);

struct QUpdateStats {
    double loss = 0.0;
    double mean_q = 0.0;
};

/// Buffers reused by consecutive q_update calls.
struct QUpdateWorkspace {
    Eigen::MatrixXd obs;
    Eigen::MatrixXd next_obs;
    ForwardCache online;
    ForwardCache target;
    std::vector<HeadGradient> head{1};
    NetworkGradients grads;
    BackwardScratch scratch;
    std::vector<double> y;
};

/// One Adam step on the mean squared Bellman error over `batch`.
/// Throws NumericsError (parameters untouched) if the loss is not finite.
QUpdateStats q_update(NetworkParams &online, const NetworkParams &target_net, AdamState &adam,
                      std::span<const Transition *const> batch, const BellmanSpec &bellman);
QUpdateStats q_update(NetworkParams &online, const NetworkParams &target_net, AdamState &adam,
                      std::span<const Transition *const> batch, const BellmanSpec &bellman, QUpdateWorkspace &ws);

/// Per-episode log row: episode,solved,length,return,epsilon,agf_final.
struct DqnEpisodeLog {
    std::int64_t episode = 0;
    bool solved = false;
    int length = 0;
    double ret = 0.0;
    double epsilon = 0.0;
    double agf_final = 0.0;
};

struct BestSolution {
    std::int64_t episode = -1;
    std::vector<std::size_t> actions;
    double agf = 0.0;
};

/// Single-threaded DQN (+ optional HER) training loop. Fully reproducible from
/// its seed.
class DqnTrainer {
   public:
    DqnTrainer(EnvConfig env, DqnConfig config, TargetSpec targets, std::uint64_t seed);

    /// Runs one episode, stores (and relabels) its transitions, then trains.
    DqnEpisodeLog run_episode();

    /// Runs up to `episodes` episodes; `on_episode` may return false to stop early.
    void train(std::int64_t episodes, const std::function<bool(const DqnEpisodeLog &)> &on_episode = {});

    const NetworkParams &online() const {
        return online_;
    }
    const NetworkParams &target_network() const {
        return target_;
    }
    const AdamState &adam() const {
        return adam_;
    }
    const EnvConfig &env_config() const {
        return env_config_;
    }
    const DqnConfig &config() const {
        return config_;
    }
    std::int64_t episodes_done() const {
        return episode_;
    }
    std::int64_t gradient_steps() const {
        return grad_steps_;
    }
    std::int64_t target_syncs() const {
        return syncs_;
    }
    std::int64_t skipped_updates() const {
        return skipped_updates_;
    }
    const ReplayBuffer &buffer() const {
        return buffer_;
    }
    const std::optional<BestSolution> &best() const {
        return best_;
    }
    const EpisodeRecord &last_episode() const {
        return last_episode_;
    }

    void set_online(NetworkParams params);

   private:
    void sync_target();

    EnvConfig env_config_;
    DqnConfig config_;
    CompileEnv env_;
    TargetGenerator targets_;
    RngStream action_rng_;
    RngStream sample_rng_;
    RngStream her_rng_;
    NetworkParams online_;
    NetworkParams target_;
    AdamState adam_;
    ReplayBuffer buffer_;
    QUpdateWorkspace workspace_;
    BellmanSpec bellman_;
    std::int64_t episode_ = 0;
    std::int64_t grad_steps_ = 0;
    std::int64_t syncs_ = 0;
    std::int64_t skipped_updates_ = 0;
    std::optional<BestSolution> best_;
    EpisodeRecord last_episode_;
};

/// 8 -> 128 selu -> 128 selu -> n_actions linear.
NetworkShape dqn_network_shape(std::size_t n_actions, Activation hidden = Activation::Selu);

}  // namespace rlqc
