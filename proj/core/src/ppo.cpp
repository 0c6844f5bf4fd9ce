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

#include "rlqc/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "rlqc/errors.hpp"

namespace rlqc {

void PpoConfig::validate() const {
    if (n_workers < 1 || rollout_len < 1) {
        throw ValidationError("ppo: n_workers and rollout_len must be positive");
    }
    if (!(clip_range > 0.0 && clip_range < 1.0)) {
        throw ValidationError("ppo: clip_range must lie in (0, 1)");
    }
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
        throw ValidationError("ppo: gae_lambda must lie in [0, 1]");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ValidationError("ppo: gamma must lie in [0, 1]");
    }
    if (epochs < 1 || minibatch_size < 1) {
        throw ValidationError("ppo: epochs and minibatch_size must be positive");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("ppo: learning_rate must be positive");
    }
    if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0) || !(max_grad_norm >= 0.0)) {
        throw ValidationError("ppo: entropy_coef, value_coef and max_grad_norm must be non-negative");
    }
    if (threads < 1) {
        throw ValidationError("ppo: threads must be positive");
    }
    if (hidden_activation != Activation::Selu && hidden_activation != Activation::Relu) {
        throw ValidationError("ppo: hidden_activation must be selu or relu");
    }
}

NetworkShape ppo_network_shape(std::size_t n_actions, Activation hidden) {
    return NetworkShape{8,
                        {{128, hidden}, {128, hidden}},
                        {{static_cast<int>(n_actions), Activation::Softmax}, {1, Activation::Linear}}};
}

PpoWorker::PpoWorker(int id, const EnvConfig &env, TargetSpec targets, RngStream target_rng, RngStream action_rng)
    : id_(id), env_(env), targets_(std::move(targets), env.gateset, target_rng), action_rng_(action_rng) {
    obs_ = env_.reset(targets_.next());
}

StepResult PpoWorker::step(std::size_t action, std::vector<EpisodeSummary> &finished) {
    StepResult r = env_.step(action);
    ret_ += r.reward;
    if (r.done) {
        finished.push_back({id_, r.solved, env_.state().step, ret_});
        ret_ = 0.0;
        obs_ = env_.reset(targets_.next());
    } else {
        obs_ = r.observation;
    }
    return r;
}

std::size_t sample_categorical(std::span<const double> probs, RngStream &rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
            return i;
        }
    }
    // Rounding left the cumulative sum just below u: take the last non-zero entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) {
            return i;
        }
    }
    throw DomainError("sample_categorical: all probabilities are zero");
}

namespace {

template <class E>
[[noreturn]] void rethrow_with_worker(const E &e, int worker) {
    throw E(std::string("worker ") + std::to_string(worker) + ": " + e.what());
}

// Lockstep collection for workers [begin, end). Each group gets its own slice of
// the batch and its own list of finished episodes.
void collect_group(const NetworkParams &policy, std::vector<PpoWorker> &workers, std::size_t begin, std::size_t end,
                   int rollout_len, RolloutBatch &batch, std::vector<EpisodeSummary> &finished) {
    const Eigen::Index n = static_cast<Eigen::Index>(end - begin);
    const std::size_t T = static_cast<std::size_t>(rollout_len);
    Eigen::MatrixXd inputs(8, n);
    ForwardCache cache;
    int current = -1;
    try {
        for (std::size_t t = 0; t < T; ++t) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const Observation &o = workers[begin + j].observation();
                for (int k = 0; k < 8; ++k) {
                    inputs(k, j) = o[k];
                }
            }
            forward(policy, inputs, cache);
            const Eigen::MatrixXd &probs = cache.output(0);
            const Eigen::MatrixXd &vals = cache.output(1);
            for (Eigen::Index j = 0; j < n; ++j) {
                PpoWorker &w = workers[begin + j];
                current = w.id();
                const std::size_t idx = (begin + j) * T + t;
                batch.observations[idx] = w.observation();
                const std::size_t a =
                    sample_categorical({probs.col(j).data(), static_cast<std::size_t>(probs.rows())}, w.action_rng());
                batch.actions[idx] = static_cast<std::uint32_t>(a);
                batch.log_probs[idx] = std::log(probs(static_cast<Eigen::Index>(a), j));
                batch.values[idx] = vals(0, j);
                const StepResult r = w.step(a, finished);
                batch.rewards[idx] = r.reward;
                batch.dones[idx] = r.done ? 1 : 0;
                batch.truncated[idx] = r.truncated ? 1 : 0;
                if (r.truncated) {
                    batch.bootstrap_values[idx] = forward_one(policy, r.observation, 1)(0);
                }
            }
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const Observation &o = workers[begin + j].observation();
            for (int k = 0; k < 8; ++k) {
                inputs(k, j) = o[k];
            }
        }
        forward(policy, inputs, cache);
        for (Eigen::Index j = 0; j < n; ++j) {
            batch.last_values[begin + j] = cache.output(1)(0, j);
        }
    } catch (const DomainError &e) {
        rethrow_with_worker(e, current);
    } catch (const StateError &e) {
        rethrow_with_worker(e, current);
    } catch (const ValidationError &e) {
        rethrow_with_worker(e, current);
    }
}

}  // namespace

RolloutBatch collect_rollouts(const NetworkParams &policy, std::vector<PpoWorker> &workers, int rollout_len,
                              int threads) {
    if (workers.empty() || rollout_len < 1) {
        throw DomainError("collect_rollouts needs workers and a positive rollout length");
    }
    if (policy.num_heads() != 2 || policy.head(0).activation != Activation::Softmax) {
        throw DomainError("collect_rollouts needs a policy/value network");
    }
    const std::size_t W = workers.size();
    const std::size_t N = W * static_cast<std::size_t>(rollout_len);
    RolloutBatch batch;
    batch.n_workers = static_cast<int>(W);
    batch.rollout_len = rollout_len;
    batch.observations.resize(N);
    batch.actions.resize(N);
    batch.log_probs.resize(N);
    batch.rewards.resize(N);
    batch.values.resize(N);
    batch.dones.assign(N, 0);
    batch.truncated.assign(N, 0);
    batch.bootstrap_values.assign(N, 0.0);
    batch.last_values.assign(W, 0.0);

    const std::size_t groups = std::clamp<std::size_t>(static_cast<std::size_t>(threads), 1, W);
    std::vector<std::vector<EpisodeSummary>> finished(groups);
    auto bounds = [&](std::size_t g) { return std::pair{g * W / groups, (g + 1) * W / groups}; };
    if (groups == 1) {
        collect_group(policy, workers, 0, W, rollout_len, batch, finished[0]);
    } else {
        std::vector<std::exception_ptr> errors(groups);
        std::vector<std::thread> pool;
        for (std::size_t g = 0; g < groups; ++g) {
            pool.emplace_back([&, g] {
                try {
                    auto [b, e] = bounds(g);
                    collect_group(policy, workers, b, e, rollout_len, batch, finished[g]);
                } catch (...) {
                    errors[g] = std::current_exception();
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
        for (auto &e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }
    for (auto &f : finished) {
        batch.episodes.insert(batch.episodes.end(), f.begin(), f.end());
    }
    return batch;
}

void compute_gae(RolloutBatch &batch, double gamma, double lambda) {
    const std::size_t T = static_cast<std::size_t>(batch.rollout_len);
    const std::size_t N = batch.size();
    batch.advantages.assign(N, 0.0);
    batch.returns.assign(N, 0.0);
    for (std::size_t w = 0; w < static_cast<std::size_t>(batch.n_workers); ++w) {
        double next_adv = 0.0;
        for (std::size_t t = T; t-- > 0;) {
            const std::size_t i = w * T + t;
            double next_value;
            double carry;
            if (batch.dones[i]) {
                next_value = batch.truncated[i] ? batch.bootstrap_values[i] : 0.0;
                carry = 0.0;
            } else {
                next_value = t + 1 == T ? batch.last_values[w] : batch.values[i + 1];
                carry = next_adv;
            }
            const double delta = batch.rewards[i] + gamma * next_value - batch.values[i];
            next_adv = delta + gamma * lambda * carry;
            batch.advantages[i] = next_adv;
            batch.returns[i] = next_adv + batch.values[i];
        }
    }
}

void normalize_advantages(std::vector<double> &advantages) {
    const std::size_t n = advantages.size();
    if (n < 2) {
        return;
    }
    const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : advantages) {
        var += (a - mean) * (a - mean);
    }
    const double stdev = std::sqrt(var / static_cast<double>(n));
    const double inv = 1.0 / (stdev + 1e-12);
    for (double &a : advantages) {
        a = (a - mean) * inv;
    }
}

double mean_entropy(const Eigen::MatrixXd &probs) {
    if (probs.cols() == 0) {
        return 0.0;
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
        for (Eigen::Index i = 0; i < probs.rows(); ++i) {
            const double p = probs(i, j);
            if (p > 0.0) {
                total -= p * std::log(p);
            }
        }
    }
    return total / static_cast<double>(probs.cols());
}

PpoMinibatchLoss ppo_minibatch_loss(const ForwardCache &cache, std::span<const std::uint32_t> actions,
                                    std::span<const double> old_log_probs, std::span<const double> advantages,
                                    std::span<const double> returns, const PpoConfig &config) {
    const Eigen::MatrixXd &probs = cache.output(0);
    const Eigen::MatrixXd &values = cache.output(1);
    const Eigen::Index n = probs.cols();
    const Eigen::Index na = probs.rows();
    if (static_cast<std::size_t>(n) != actions.size() || actions.size() != old_log_probs.size() ||
        actions.size() != advantages.size() || actions.size() != returns.size() || n == 0) {
        throw DomainError("ppo_minibatch_loss: inconsistent minibatch");
    }
    const Eigen::MatrixXd logp = log_softmax(cache.head_pre[0]);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double lo = 1.0 - config.clip_range;
    const double hi = 1.0 + config.clip_range;

    PpoMinibatchLoss out;
    out.d_logits.resize(na, n);
    out.d_value.resize(1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index a = actions[j];
        const double adv = advantages[j];
        const double log_ratio = logp(a, j) - old_log_probs[j];
        const double ratio = std::exp(log_ratio);
        const double unclipped = ratio * adv;
        const double clipped = std::clamp(ratio, lo, hi) * adv;
        const bool clip_active = clipped < unclipped;
        out.policy_loss -= std::min(unclipped, clipped) * inv_n;
        out.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
        if (ratio < lo || ratio > hi) {
            out.clip_fraction += inv_n;
        }
        // d(loss)/d(log pi_a): zero when the clipped branch is selected.
        const double g_logp = clip_active ? 0.0 : -unclipped * inv_n;

        double h = 0.0;
        for (Eigen::Index i = 0; i < na; ++i) {
            h -= probs(i, j) * logp(i, j);
        }
        out.entropy += h * inv_n;
        for (Eigen::Index i = 0; i < na; ++i) {
            const double p = probs(i, j);
            const double onehot = i == a ? 1.0 : 0.0;
            // dH/dz_i = -p_i (log p_i + H); the loss carries -entropy_coef * H.
            out.d_logits(i, j) = g_logp * (onehot - p) + config.entropy_coef * inv_n * p * (logp(i, j) + h);
        }
        const double err = values(0, j) - returns[j];
        out.value_loss += err * err * inv_n;
        out.d_value(0, j) = config.value_coef * 2.0 * err * inv_n;
    }
    return out;
}

PpoUpdateStats ppo_update(NetworkParams &policy, AdamState &adam, const RolloutBatch &batch, const PpoConfig &config,
                          RngStream &rng) {
    const std::size_t N = batch.size();
    if (N == 0 || batch.advantages.size() != N || batch.returns.size() != N) {
        throw DomainError("ppo_update needs a batch with advantages and returns");
    }
    std::vector<double> adv = batch.advantages;
    normalize_advantages(adv);

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t mb = std::min<std::size_t>(static_cast<std::size_t>(config.minibatch_size), N);

    PpoUpdateStats stats;
    Eigen::MatrixXd inputs;
    ForwardCache cache;
    std::vector<HeadGradient> heads(2);
    heads[0].wrt_preactivation = true;
    NetworkGradients grads;
    BackwardScratch scratch;
    std::vector<std::uint32_t> acts;
    std::vector<double> old_lp, mb_adv, mb_ret;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = N; i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_int(i)]);
        }
        for (std::size_t start = 0; start < N; start += mb) {
            const std::size_t end = std::min(N, start + mb);
            const Eigen::Index n = static_cast<Eigen::Index>(end - start);
            inputs.resize(8, n);
            acts.resize(n);
            old_lp.resize(n);
            mb_adv.resize(n);
            mb_ret.resize(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                const std::size_t k = order[start + j];
                for (int r = 0; r < 8; ++r) {
                    inputs(r, j) = batch.observations[k][r];
                }
                acts[j] = batch.actions[k];
                old_lp[j] = batch.log_probs[k];
                mb_adv[j] = adv[k];
                mb_ret[j] = batch.returns[k];
            }
            forward(policy, inputs, cache);
            PpoMinibatchLoss loss = ppo_minibatch_loss(cache, acts, old_lp, mb_adv, mb_ret, config);
            const double total = loss.policy_loss + config.value_coef * loss.value_loss - config.entropy_coef * loss.entropy;
            if (!std::isfinite(total)) {
                ++stats.skipped;
                continue;
            }
            heads[0].grad = std::move(loss.d_logits);
            heads[1].grad = std::move(loss.d_value);
            backward(policy, cache, heads, grads, scratch);
            if (config.max_grad_norm > 0.0) {
                const double norm = std::sqrt(grads.squared_norm());
                if (norm > config.max_grad_norm) {
                    grads.scale(config.max_grad_norm / norm);
                }
            }
            try {
                adam_step(policy, grads, adam);
            } catch (const NumericsError &) {
                ++stats.skipped;
                continue;
            }
            stats.policy_loss += loss.policy_loss;
            stats.value_loss += loss.value_loss;
            stats.entropy += loss.entropy;
            stats.approx_kl += loss.approx_kl;
            stats.clip_fraction += loss.clip_fraction;
            ++stats.minibatches;
        }
    }
    if (stats.minibatches == 0) {
        throw NumericsError("ppo_update: every minibatch produced a non-finite loss");
    }
    const double inv = 1.0 / stats.minibatches;
    stats.policy_loss *= inv;
    stats.value_loss *= inv;
    stats.entropy *= inv;
    stats.approx_kl *= inv;
    stats.clip_fraction *= inv;
    return stats;
}

PpoTrainer::PpoTrainer(EnvConfig env, PpoConfig config, TargetSpec targets, std::uint64_t seed)
    : env_config_(std::move(env)), config_(config), shuffle_rng_(RngStream(seed).split(3)) {
    config_.validate();
    env_config_.validate();
    const RngStream root(seed);
    const RngStream target_root = root.split(1);
    const RngStream action_root = root.split(2);
    workers_.reserve(static_cast<std::size_t>(config_.n_workers));
    for (int w = 0; w < config_.n_workers; ++w) {
        workers_.emplace_back(w, env_config_, targets, target_root.split(static_cast<std::uint64_t>(w)),
                              action_root.split(static_cast<std::uint64_t>(w)));
    }
    RngStream init_rng = root.split(0);
    policy_ = init_network(ppo_network_shape(env_config_.gateset->size(), config_.hidden_activation), init_rng);
    adam_ = AdamState::for_params(policy_, config_.learning_rate);
}

void PpoTrainer::set_policy(NetworkParams params) {
    params.validate();
    if (params.num_heads() != 2 || static_cast<std::size_t>(params.head_dim(0)) != env_config_.gateset->size() ||
        params.head_dim(1) != 1) {
        throw ValidationError("policy heads do not match the gate set");
    }
    policy_ = std::move(params);
    adam_ = AdamState::for_params(policy_, config_.learning_rate);
}

PpoUpdateLog PpoTrainer::run_update() {
    RolloutBatch batch = collect_rollouts(policy_, workers_, config_.rollout_len, config_.threads);
    compute_gae(batch, config_.gamma, config_.gae_lambda);
    PpoUpdateLog log;
    try {
        log.stats = ppo_update(policy_, adam_, batch, config_, shuffle_rng_);
    } catch (const NumericsError &) {
        ++skipped_;
        log.stats.skipped = -1;
    }
    ++updates_;
    env_steps_ += static_cast<std::int64_t>(batch.size());
    episodes_ += static_cast<std::int64_t>(batch.episodes.size());
    log.update = updates_;
    log.env_steps = env_steps_;
    log.episodes = episodes_;
    int solved = 0;
    double len = 0.0;
    for (const auto &e : batch.episodes) {
        if (e.solved) {
            ++solved;
            len += e.length;
        }
    }
    if (!batch.episodes.empty()) {
        log.solved_pct = 100.0 * solved / static_cast<double>(batch.episodes.size());
    }
    log.mean_len = solved > 0 ? len / solved : 0.0;
    return log;
}

void PpoTrainer::train(std::int64_t episodes, const std::function<bool(const PpoUpdateLog &)> &on_update) {
    while (episodes_ < episodes) {
        const PpoUpdateLog log = run_update();
        if (on_update && !on_update(log)) {
            break;
        }
    }
}

}  // namespace rlqc
