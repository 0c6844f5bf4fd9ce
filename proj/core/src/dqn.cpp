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

#include "rlqc/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <unordered_set>

#include "rlqc/errors.hpp"

namespace rlqc {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw ValidationError("replay buffer capacity must be positive");
    }
    ring_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition &t) {
    if (ring_.size() < capacity_) {
        ring_.push_back(t);
    } else {
        ring_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

const Transition &ReplayBuffer::at(std::size_t i) const {
    if (i >= size_) {
        throw DomainError("replay buffer index out of range");
    }
    const std::size_t oldest = size_ < capacity_ ? 0 : next_;
    return ring_[(oldest + i) % capacity_];
}

std::vector<const Transition *> ReplayBuffer::sample(std::size_t batch, RngStream &rng) const {
    if (batch > size_) {
        throw DomainError("cannot sample " + std::to_string(batch) + " of " + std::to_string(size_) + " transitions");
    }
    // Floyd's algorithm: distinct indices, uniform over all batch-subsets.
    std::unordered_set<std::size_t> chosen;
    chosen.reserve(batch * 2);
    std::vector<const Transition *> out;
    out.reserve(batch);
    for (std::size_t j = size_ - batch; j < size_; ++j) {
        std::size_t r = static_cast<std::size_t>(rng.uniform_int(j + 1));
        if (!chosen.insert(r).second) {
            r = j;
            chosen.insert(r);
        }
        out.push_back(&ring_[r]);
    }
    return out;
}

void DqnConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("dqn.learning_rate must be positive");
    }
    if (batch_size < 1 || memory_size < batch_size) {
        throw ValidationError("dqn needs 1 <= batch_size <= memory_size");
    }
    if (!(epsilon_decay > 0.0 && epsilon_decay < 1.0)) {
        throw ValidationError("dqn.epsilon_decay must lie in (0, 1)");
    }
    if (!(epsilon_min >= 0.0 && epsilon_min <= 1.0)) {
        throw ValidationError("dqn.epsilon_min must lie in [0, 1]");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ValidationError("dqn.gamma must lie in [0, 1]");
    }
    if (target_sync < 1) {
        throw ValidationError("dqn.target_sync must be positive");
    }
    if (!(her_k >= 0.0 && her_k <= 1.0)) {
        throw ValidationError("dqn.her_k must lie in [0, 1]");
    }
    if (hidden_activation != Activation::Selu && hidden_activation != Activation::Relu) {
        throw ValidationError("dqn.hidden_activation must be selu or relu");
    }
    if (updates_per_episode < 0) {
        throw ValidationError("dqn.updates_per_episode must be >= 0");
    }
    if (fixed_epsilon && !(*fixed_epsilon >= 0.0 && *fixed_epsilon <= 1.0)) {
        throw ValidationError("dqn.fixed_epsilon must lie in [0, 1]");
    }
}

DqnConfig DqnConfig::fixed_target_defaults() {
    DqnConfig c;
    c.learning_rate = 0.0005;
    c.batch_size = 1000;
    c.memory_size = 10000;
    c.epsilon_decay = 0.99976;
    c.her = false;
    c.updates_per_episode = 2;
    c.target_sync = 500;
    return c;
}

DqnConfig DqnConfig::hrc_defaults() {
    DqnConfig c;
    c.learning_rate = 0.0001;
    c.batch_size = 200;
    c.memory_size = 500000;
    c.epsilon_decay = 0.99931;
    c.her = true;
    return c;
}

double epsilon_schedule(std::int64_t episode, const DqnConfig &config) {
    if (config.fixed_epsilon) {
        return *config.fixed_epsilon;
    }
    return std::max(config.epsilon_min, std::pow(config.epsilon_decay, static_cast<double>(std::max<std::int64_t>(episode, 0))));
}

std::size_t argmax_action(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

std::size_t select_action(const NetworkParams &q_net, const Observation &obs, double epsilon, RngStream &rng) {
    const auto n = static_cast<std::size_t>(q_net.head_dim(0));
    if (rng.uniform() < epsilon) {
        return static_cast<std::size_t>(rng.uniform_int(n));
    }
    const Eigen::VectorXd q = forward_one(q_net, obs);
    return argmax_action(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

std::vector<std::size_t> EpisodeRecord::actions() const {
    std::vector<std::size_t> out;
    out.reserve(transitions.size());
    for (const Transition &t : transitions) {
        out.push_back(t.action);
    }
    return out;
}

std::vector<Transition> her_relabel(const EpisodeRecord &episode, const EnvConfig &env, double k, RngStream &rng) {
    if (!episode.done) {
        throw StateError("her_relabel needs a finished episode");
    }
    const std::size_t T = episode.transitions.size();
    if (episode.products.size() != T + 1) {
        throw StateError("episode record is missing partial products");
    }
    std::vector<Transition> out;
    if (T == 0 || k <= 0.0) {
        return out;
    }
    const auto n_goals = std::min<std::size_t>(T, static_cast<std::size_t>(std::ceil(k * static_cast<double>(T) - 1e-12)));

    // Distinct goal steps m in [1, T] (partial Fisher-Yates).
    std::vector<std::size_t> steps(T);
    for (std::size_t i = 0; i < T; ++i) {
        steps[i] = i + 1;
    }
    for (std::size_t i = 0; i < n_goals; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(T - i));
        std::swap(steps[i], steps[j]);
    }

    for (std::size_t g = 0; g < n_goals; ++g) {
        const UnitaryMatrix &goal = episode.products[steps[g]];
        const std::size_t m = steps[g];
        for (std::size_t j = 0; j < m; ++j) {
            const Transition &src = episode.transitions[j];
            const double fid = agf(episode.products[j + 1], goal).value;
            const bool solved = fid >= env.tolerance_agf;
            const int gates_used = static_cast<int>(j + 1);
            Transition t;
            t.obs = make_observation(episode.products[j], goal);
            t.next_obs = make_observation(episode.products[j + 1], goal);
            t.action = src.action;
            t.reward = step_reward(env.reward, solved, 1.0 - fid, gates_used, env.max_steps);
            t.terminal = solved;
            t.truncated = !solved && gates_used == env.max_steps;
            t.episode_id = src.episode_id;
            t.step_in_episode = src.step_in_episode;
            out.push_back(t);
            if (solved) {
                break;
            }
        }
    }
    return out;
}

namespace {

void stack_observations(std::span<const Transition *const> batch, bool next, Eigen::MatrixXd &x) {
    x.resize(8, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Observation &o = next ? batch[i]->next_obs : batch[i]->obs;
        for (int r = 0; r < 8; ++r) {
            x(r, static_cast<Eigen::Index>(i)) = o[static_cast<std::size_t>(r)];
        }
    }
}

void compute_targets(const NetworkParams &target_net, std::span<const Transition *const> batch,
                     const BellmanSpec &bellman, QUpdateWorkspace &ws) {
    stack_observations(batch, true, ws.next_obs);
    forward(target_net, ws.next_obs, ws.target);
    const Eigen::MatrixXd &q_next = ws.target.output(0);
    ws.y.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double max_q = q_next.col(static_cast<Eigen::Index>(i)).maxCoeff();
        const double y = batch[i]->terminal ? batch[i]->reward : batch[i]->reward + bellman.gamma * max_q;
        ws.y[i] = std::clamp(y, bellman.min_target, bellman.max_target);
    }
}

}  // namespace

BellmanSpec q_value_bounds(const EnvConfig &env, double gamma) {
    BellmanSpec b;
    b.gamma = gamma;
    const double L = static_cast<double>(env.max_steps);
    const double worst_step = env.reward == RewardKind::Dense ? -(2.0 / 3.0) / L : -1.0 / L;
    b.min_target = gamma < 1.0 ? worst_step / (1.0 - gamma) : worst_step * L;
    b.max_target = env.reward == RewardKind::Dense ? L : 0.0;
    return b;
}

std::vector<double> bellman_targets(const NetworkParams &target_net, std::span<const Transition *const> batch,
                                    const BellmanSpec &bellman) {
    QUpdateWorkspace ws;
    compute_targets(target_net, batch, bellman, ws);
    return ws.y;
}

QUpdateStats q_update(NetworkParams &online, const NetworkParams &target_net, AdamState &adam,
                      std::span<const Transition *const> batch, const BellmanSpec &bellman) {
    QUpdateWorkspace ws;
    return q_update(online, target_net, adam, batch, bellman, ws);
}

QUpdateStats q_update(NetworkParams &online, const NetworkParams &target_net, AdamState &adam,
                      std::span<const Transition *const> batch, const BellmanSpec &bellman, QUpdateWorkspace &ws) {
    if (batch.empty()) {
        throw DomainError("q_update needs a non-empty batch");
    }
    compute_targets(target_net, batch, bellman, ws);
    stack_observations(batch, false, ws.obs);
    forward(online, ws.obs, ws.online);
    const Eigen::MatrixXd &q = ws.online.output(0);
    const auto n = static_cast<double>(batch.size());

    Eigen::MatrixXd &dq = ws.head[0].grad;
    dq.setZero(q.rows(), q.cols());
    QUpdateStats stats;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        const auto a = static_cast<Eigen::Index>(batch[i]->action);
        if (a >= q.rows()) {
            throw DomainError("transition action out of range for the Q network");
        }
        const double err = q(a, col) - ws.y[i];
        stats.loss += err * err / n;
        stats.mean_q += q(a, col) / n;
        dq(a, col) = 2.0 * err / n;
    }
    if (!std::isfinite(stats.loss)) {
        throw NumericsError("q_update: non-finite loss");
    }
    backward(online, ws.online, ws.head, ws.grads, ws.scratch);
    adam_step(online, ws.grads, adam);
    return stats;
}

NetworkShape dqn_network_shape(std::size_t n_actions, Activation hidden) {
    return NetworkShape{8, {{128, hidden}, {128, hidden}}, {{static_cast<int>(n_actions), Activation::Linear}}};
}

DqnTrainer::DqnTrainer(EnvConfig env, DqnConfig config, TargetSpec targets, std::uint64_t seed)
    : env_config_(std::move(env)),
      config_(config),
      env_(env_config_),
      targets_(std::move(targets), env_config_.gateset, RngStream(seed).split(1)),
      action_rng_(RngStream(seed).split(2)),
      sample_rng_(RngStream(seed).split(3)),
      her_rng_(RngStream(seed).split(4)),
      buffer_(static_cast<std::size_t>(config.memory_size)) {
    config_.validate();
    if (config_.clip_targets) {
        bellman_ = q_value_bounds(env_config_, config_.gamma);
    } else {
        bellman_.gamma = config_.gamma;
    }
    RngStream init_rng = RngStream(seed).split(0);
    online_ = init_network(dqn_network_shape(env_config_.gateset->size(), config_.hidden_activation), init_rng);
    adam_ = AdamState::for_params(online_, config_.learning_rate);
    sync_target();
}

void DqnTrainer::set_online(NetworkParams params) {
    params.validate();
    if (params.num_heads() != 1 || static_cast<std::size_t>(params.head_dim(0)) != env_config_.gateset->size()) {
        throw ValidationError("network outputs do not match the gate set");
    }
    online_ = std::move(params);
    adam_ = AdamState::for_params(online_, config_.learning_rate);
    sync_target();
}

void DqnTrainer::sync_target() {
    target_ = online_;
    if (params_checksum(target_) != params_checksum(online_)) {
        throw StateError("target network sync produced a mismatched copy");
    }
    ++syncs_;
}

DqnEpisodeLog DqnTrainer::run_episode() {
    const double epsilon = epsilon_schedule(episode_, config_);
    EpisodeRecord &rec = last_episode_;
    rec.episode_id = episode_;
    rec.target = targets_.next();
    rec.products.clear();
    rec.transitions.clear();
    rec.done = false;

    Observation obs = env_.reset(rec.target);
    rec.products.push_back(env_.state().product);
    DqnEpisodeLog log;
    log.episode = episode_;
    log.epsilon = epsilon;
    StepResult r;
    while (!env_.state().done) {
        const std::size_t a = select_action(online_, obs, epsilon, action_rng_);
        r = env_.step(a);
        Transition t;
        t.obs = obs;
        t.action = static_cast<std::uint32_t>(a);
        t.reward = r.reward;
        t.next_obs = r.observation;
        t.terminal = r.solved;
        t.truncated = r.truncated;
        t.episode_id = episode_;
        t.step_in_episode = static_cast<std::int32_t>(rec.transitions.size());
        rec.transitions.push_back(t);
        rec.products.push_back(env_.state().product);
        log.ret += r.reward;
        obs = r.observation;
    }
    rec.done = true;
    log.solved = r.solved;
    log.length = static_cast<int>(rec.transitions.size());
    log.agf_final = r.fidelity;

    if (log.solved && (!best_ || log.length < static_cast<int>(best_->actions.size()))) {
        best_ = BestSolution{episode_, rec.actions(), r.fidelity};
    }

    ++episode_;
    if (config_.fixed_epsilon) {
        return log;
    }

    for (const Transition &t : rec.transitions) {
        buffer_.push(t);
    }
    if (config_.her) {
        for (const Transition &t : her_relabel(rec, env_config_, config_.her_k, her_rng_)) {
            buffer_.push(t);
        }
    }

    if (buffer_.size() >= static_cast<std::size_t>(config_.batch_size)) {
        const int updates = config_.updates_per_episode > 0 ? config_.updates_per_episode : (log.length + 3) / 4;
        for (int u = 0; u < updates; ++u) {
            const auto batch = buffer_.sample(static_cast<std::size_t>(config_.batch_size), sample_rng_);
            try {
                q_update(online_, target_, adam_, batch, bellman_, workspace_);
            } catch (const NumericsError &e) {
                ++skipped_updates_;
                std::cerr << "rlqc: episode " << log.episode << ": " << e.what() << '\n';
                continue;
            }
            ++grad_steps_;
            if (grad_steps_ % config_.target_sync == 0) {
                sync_target();
            }
        }
    }
    return log;
}

void DqnTrainer::train(std::int64_t episodes, const std::function<bool(const DqnEpisodeLog &)> &on_episode) {
    for (std::int64_t i = 0; i < episodes; ++i) {
        const DqnEpisodeLog log = run_episode();
        if (on_episode && !on_episode(log)) {
            break;
        }
    }
}

}  // namespace rlqc
