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

#include <cmath>
#include <memory>
#include <numeric>

#include "doctest.h"
#include "rlqc/errors.hpp"
#include "rlqc/ppo.hpp"

using namespace rlqc;

namespace {

EnvConfig rot_env(int max_steps = 130, double tol = 0.99) {
    EnvConfig c;
    c.gateset = std::make_shared<const GateSet>(builtin_gateset("rot-pi-128"));
    c.reward = RewardKind::Dense;
    c.max_steps = max_steps;
    c.tolerance_agf = tol;
    return c;
}

std::vector<PpoWorker> make_workers(const EnvConfig &env, const std::string &targets, int n, std::uint64_t seed) {
    std::vector<PpoWorker> w;
    const RngStream root(seed);
    for (int i = 0; i < n; ++i) {
        w.emplace_back(i, env, TargetSpec::parse(targets), root.split(1).split(i), root.split(2).split(i));
    }
    return w;
}

RolloutBatch manual_batch(const std::vector<double> &rewards, const std::vector<double> &values,
                          const std::vector<std::uint8_t> &dones, double last_value) {
    RolloutBatch b;
    b.n_workers = 1;
    b.rollout_len = static_cast<int>(rewards.size());
    b.observations.resize(rewards.size());
    b.rewards = rewards;
    b.values = values;
    b.dones = dones;
    b.truncated.assign(rewards.size(), 0);
    b.bootstrap_values.assign(rewards.size(), 0.0);
    b.last_values = {last_value};
    return b;
}

/// Cache with given logits (n_actions x n) and values (1 x n), as forward() would produce.
ForwardCache head_cache(const Eigen::MatrixXd &logits, const Eigen::MatrixXd &values) {
    ForwardCache c;
    c.head_pre = {logits, values};
    c.heads = {log_softmax(logits).array().exp().matrix(), values};
    return c;
}

double total_loss(const PpoMinibatchLoss &l, const PpoConfig &cfg) {
    return l.policy_loss + cfg.value_coef * l.value_loss - cfg.entropy_coef * l.entropy;
}

}  // namespace

TEST_CASE("defaults and validation") {
    const PpoConfig c;
    CHECK(c.n_workers == 40);
    CHECK(c.minibatch_size == 128);
    CHECK(c.learning_rate == 0.0001);
    CHECK(c.clip_range == 0.2);
    CHECK(c.gae_lambda == 0.95);
    CHECK(c.gamma == 0.99);
    CHECK(c.epochs == 4);
    CHECK(c.rollout_len == 128);
    CHECK(c.entropy_coef == 0.01);
    CHECK(c.value_coef == 0.5);
    CHECK_NOTHROW(c.validate());
    PpoConfig bad = c;
    bad.clip_range = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.gae_lambda = 1.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = c;
    bad.n_workers = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("network shape") {
    RngStream rng(1);
    const NetworkParams p = init_network(ppo_network_shape(6), rng);
    CHECK(p.num_trunk == 2);
    CHECK(p.num_heads() == 2);
    CHECK(p.head_dim(0) == 6);
    CHECK(p.head_dim(1) == 1);
    CHECK(p.head(0).activation == Activation::Softmax);
    CHECK(p.head(1).activation == Activation::Linear);
}

TEST_CASE("sample_categorical") {
    RngStream rng(2);
    const double probs[] = {0.1, 0.0, 0.6, 0.3};
    int counts[4] = {};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ++counts[sample_categorical(probs, rng)];
    }
    CHECK(counts[1] == 0);
    for (int i : {0, 2, 3}) {
        const double sigma = std::sqrt(n * probs[i] * (1 - probs[i]));
        CHECK(std::abs(counts[i] - n * probs[i]) < 4 * sigma);
    }
    const double zero[] = {0.0, 0.0};
    CHECK_THROWS_AS(sample_categorical(zero, rng), DomainError);
}

TEST_CASE("collect_rollouts shape, consistency and determinism") {
    const EnvConfig env = rot_env(130, 0.95);
    RngStream rng(3);
    const NetworkParams policy = init_network(ppo_network_shape(6), rng);
    auto w1 = make_workers(env, "product:1:30", 40, 9);
    auto w2 = make_workers(env, "product:1:30", 40, 9);
    const RolloutBatch a = collect_rollouts(policy, w1, 128);
    const RolloutBatch b = collect_rollouts(policy, w2, 128);
    CHECK(a.size() == 5120);
    CHECK(a.actions.size() == 5120);
    CHECK(a.rewards.size() == 5120);
    CHECK(a.last_values.size() == 40);
    CHECK(a.observations == b.observations);
    CHECK(a.actions == b.actions);
    CHECK(a.rewards == b.rewards);
    CHECK(a.log_probs == b.log_probs);
    CHECK(a.episodes.size() == b.episodes.size());

    // Log-probs recorded at collection match the snapshot: ratio 1.
    Eigen::MatrixXd x(8, static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (int r = 0; r < 8; ++r) {
            x(r, static_cast<Eigen::Index>(i)) = a.observations[i][r];
        }
    }
    const ForwardCache c = forward(policy, x);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double lp = std::log(c.output(0)(a.actions[i], static_cast<Eigen::Index>(i)));
        worst = std::max(worst, std::abs(std::exp(lp - a.log_probs[i]) - 1.0));
        CHECK(std::abs(c.output(1)(0, static_cast<Eigen::Index>(i)) - a.values[i]) < 1e-12);
    }
    CHECK(worst < 1e-6);

    // Counting dones reproduces the finished-episode list.
    std::size_t dones = 0;
    for (auto d : a.dones) {
        dones += d;
    }
    CHECK(dones == a.episodes.size());
    CHECK(a.episodes.size() > 0);
}

TEST_CASE("done flag and fresh target after a solve") {
    const EnvConfig env = rot_env(130, 0.95);
    RngStream rng(4);
    const NetworkParams policy = init_network(ppo_network_shape(6), rng);
    auto workers = make_workers(env, "product:1:30", 4, 5);
    const RolloutBatch b = collect_rollouts(policy, workers, 64);
    bool saw = false;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        if (b.dones[i] && b.worker_of(i) == b.worker_of(i + 1) && !b.truncated[i]) {
            saw = true;
            CHECK(b.rewards[i] >= 1.0);
            // The next entry is the first step of a new episode.
            CHECK(b.observations[i + 1] != b.observations[i]);
        }
    }
    CHECK(saw);
}

TEST_CASE("threaded collection matches per-worker streams") {
    const EnvConfig env = rot_env(130, 0.95);
    RngStream rng(5);
    const NetworkParams policy = init_network(ppo_network_shape(6), rng);
    auto w1 = make_workers(env, "product:1:30", 6, 2);
    auto w2 = make_workers(env, "product:1:30", 6, 2);
    const RolloutBatch a = collect_rollouts(policy, w1, 32, 1);
    const RolloutBatch b = collect_rollouts(policy, w2, 32, 3);
    CHECK(a.actions == b.actions);
    CHECK(a.rewards == b.rewards);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a.log_probs[i] - b.log_probs[i]) < 1e-12);
    }
}

TEST_CASE("gae one-step td at lambda 0") {
    RolloutBatch b = manual_batch({0.1, -0.2, 0.3, 0.05}, {0.5, 0.4, -0.1, 0.2}, {0, 0, 0, 0}, 0.7);
    compute_gae(b, 0.9, 0.0);
    const double next[] = {0.4, -0.1, 0.2, 0.7};
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(b.advantages[t] == doctest::Approx(b.rewards[t] + 0.9 * next[t] - b.values[t]).epsilon(1e-15));
        CHECK(std::abs(b.returns[t] - (b.advantages[t] + b.values[t])) < 1e-9);
    }
}

TEST_CASE("gae zero rewards and values") {
    RolloutBatch b = manual_batch({0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0, 1, 0, 0}, 0.0);
    compute_gae(b, 0.99, 0.95);
    for (double a : b.advantages) {
        CHECK(a == 0.0);
    }
}

TEST_CASE("gae geometric unrolling of a terminal reward") {
    const double r = 2.5;
    const double gamma = 0.9;
    RolloutBatch b = manual_batch({0, 0, 0, 0, r}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 1}, 123.0);
    compute_gae(b, gamma, 1.0);
    // Brute force: A_t = sum_l gamma^l r_{t+l}.
    for (int t = 0; t < 5; ++t) {
        double brute = 0.0;
        for (int l = 0; t + l < 5; ++l) {
            brute += std::pow(gamma, l) * b.rewards[static_cast<std::size_t>(t + l)];
        }
        CHECK(std::abs(b.advantages[static_cast<std::size_t>(t)] - brute) < 1e-12);
        CHECK(std::abs(b.advantages[static_cast<std::size_t>(t)] - std::pow(gamma, 4 - t) * r) < 1e-12);
    }
}

TEST_CASE("gae truncation bootstraps") {
    RolloutBatch b = manual_batch({-0.1, -0.1, 0.2}, {0.3, 0.2, 0.1}, {0, 1, 0}, 0.4);
    b.truncated[1] = 1;
    b.bootstrap_values[1] = 0.25;
    compute_gae(b, 0.99, 0.95);
    CHECK(b.advantages[2] == doctest::Approx(0.2 + 0.99 * 0.4 - 0.1));
    CHECK(b.advantages[1] == doctest::Approx(-0.1 + 0.99 * 0.25 - 0.2));
    CHECK(b.advantages[0] == doctest::Approx(-0.1 + 0.99 * 0.2 - 0.3 + 0.99 * 0.95 * b.advantages[1]));
    b.truncated[1] = 0;
    compute_gae(b, 0.99, 0.95);
    CHECK(b.advantages[1] == doctest::Approx(-0.1 - 0.2));
}

TEST_CASE("advantage normalization") {
    RngStream rng(6);
    std::vector<double> a(5000);
    for (auto &x : a) {
        x = 3.0 + 7.0 * rng.normal();
    }
    normalize_advantages(a);
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    double var = 0;
    for (double x : a) {
        var += (x - mean) * (x - mean);
    }
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var / a.size()) - 1.0) < 1e-6);
    std::vector<double> one{4.0};
    normalize_advantages(one);
    CHECK(one[0] == 4.0);
}

TEST_CASE("entropy of a uniform policy") {
    const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(6, 3, 1.0 / 6);
    CHECK(std::abs(mean_entropy(u) - std::log(6.0)) < 1e-12);
    CHECK(std::abs(std::log(6.0) - 1.7918) < 1e-4);
}

TEST_CASE("ratio one: clipped and unclipped objectives agree") {
    RngStream rng(7);
    Eigen::MatrixXd z(6, 10), v(1, 10);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z.data()[i] = rng.normal();
    }
    v.setZero();
    const ForwardCache c = head_cache(z, v);
    const Eigen::MatrixXd lp = log_softmax(z);
    std::vector<std::uint32_t> acts(10);
    std::vector<double> old(10), adv(10), ret(10, 0.0);
    double expect = 0;
    for (int j = 0; j < 10; ++j) {
        acts[j] = static_cast<std::uint32_t>(rng.uniform_int(6));
        old[j] = lp(acts[j], j);
        adv[j] = rng.normal();
        expect -= adv[j] / 10;
    }
    PpoConfig cfg;
    const PpoMinibatchLoss l = ppo_minibatch_loss(c, acts, old, adv, ret, cfg);
    CHECK(std::abs(l.policy_loss - expect) < 1e-14);
    CHECK(l.clip_fraction == 0.0);
    CHECK(std::abs(l.approx_kl) < 1e-15);
}

TEST_CASE("clip at ratio 1.5 with positive advantage") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 1);
    const ForwardCache c = head_cache(z, Eigen::MatrixXd::Zero(1, 1));
    const std::uint32_t act[] = {1};
    const double old[] = {std::log(1.0 / 3) - std::log(1.5)};
    const double adv[] = {2.0};
    const double ret[] = {0.0};
    PpoConfig cfg;
    cfg.entropy_coef = 0.0;
    const PpoMinibatchLoss l = ppo_minibatch_loss(c, act, old, adv, ret, cfg);
    CHECK(std::abs(l.policy_loss - (-1.2 * 2.0)) < 1e-12);
    CHECK(l.clip_fraction == 1.0);
    CHECK(l.d_logits.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("minibatch loss gradients match finite differences") {
    RngStream rng(8);
    const Eigen::Index na = 4, n = 6;
    Eigen::MatrixXd z(na, n), v(1, n);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z.data()[i] = rng.normal();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        v(0, i) = rng.normal();
    }
    std::vector<std::uint32_t> acts(n);
    std::vector<double> old(n), adv(n), ret(n);
    const Eigen::MatrixXd lp = log_softmax(z);
    for (Eigen::Index j = 0; j < n; ++j) {
        acts[j] = static_cast<std::uint32_t>(rng.uniform_int(na));
        // Spread the ratios across the clipped and unclipped regions, away from the kinks.
        const double shift = (j % 3 == 0) ? 0.5 : (j % 3 == 1 ? -0.45 : 0.05);
        old[j] = lp(acts[j], j) - shift;
        adv[j] = (j % 2 == 0 ? 1.0 : -1.0) * (0.5 + rng.uniform());
        ret[j] = rng.normal();
    }
    PpoConfig cfg;
    cfg.entropy_coef = 0.05;
    const PpoMinibatchLoss base = ppo_minibatch_loss(head_cache(z, v), acts, old, adv, ret, cfg);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        Eigen::MatrixXd zp = z, zm = z;
        zp.data()[i] += h;
        zm.data()[i] -= h;
        const double fd = (total_loss(ppo_minibatch_loss(head_cache(zp, v), acts, old, adv, ret, cfg), cfg) -
                           total_loss(ppo_minibatch_loss(head_cache(zm, v), acts, old, adv, ret, cfg), cfg)) /
                          (2 * h);
        CHECK(std::abs(fd - base.d_logits.data()[i]) < 1e-7);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::MatrixXd vp = v, vm = v;
        vp(0, j) += h;
        vm(0, j) -= h;
        const double fd = (total_loss(ppo_minibatch_loss(head_cache(z, vp), acts, old, adv, ret, cfg), cfg) -
                           total_loss(ppo_minibatch_loss(head_cache(z, vm), acts, old, adv, ret, cfg), cfg)) /
                          (2 * h);
        CHECK(std::abs(fd - base.d_value(0, j)) < 1e-7);
    }
}

TEST_CASE("ppo_update skips non-finite minibatches") {
    const EnvConfig env = rot_env(130, 0.95);
    RngStream rng(9);
    NetworkParams policy = init_network(ppo_network_shape(6), rng);
    auto workers = make_workers(env, "product:1:30", 2, 3);
    RolloutBatch b = collect_rollouts(policy, workers, 16);
    compute_gae(b, 0.99, 0.95);
    PpoConfig cfg;
    cfg.minibatch_size = 8;
    cfg.epochs = 1;
    AdamState adam = AdamState::for_params(policy, cfg.learning_rate);
    RngStream shuffle(1);
    const PpoUpdateStats ok = ppo_update(policy, adam, b, cfg, shuffle);
    CHECK(ok.minibatches == 4);
    CHECK(ok.skipped == 0);
    CHECK(std::isfinite(ok.policy_loss));
    CHECK(std::isfinite(ok.value_loss));

    RolloutBatch bad = b;
    for (auto &r : bad.returns) {
        r = std::nan("");
    }
    const NetworkParams before = policy;
    CHECK_THROWS_AS(ppo_update(policy, adam, bad, cfg, shuffle), NumericsError);
    CHECK(policy == before);
}

TEST_CASE("trainer determinism and near-identity curriculum") {
    const EnvConfig env = rot_env(130, 0.99);
    PpoConfig cfg;
    cfg.n_workers = 8;
    cfg.rollout_len = 64;
    auto run = [&] {
        PpoTrainer t(env, cfg, TargetSpec::parse("product:5:5"), 21);
        std::vector<PpoUpdateLog> logs;
        t.train(300, [&](const PpoUpdateLog &l) {
            logs.push_back(l);
            return true;
        });
        return std::make_pair(logs, params_checksum(t.policy()));
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.second == b.second);
    REQUIRE(a.first.size() == b.first.size());
    CHECK(a.first.back().episodes >= 300);
    CHECK(a.first.back().env_steps == static_cast<std::int64_t>(a.first.size()) * 8 * 64);
    for (std::size_t i = 0; i < a.first.size(); ++i) {
        CHECK(a.first[i].solved_pct == b.first[i].solved_pct);
        CHECK(std::isfinite(a.first[i].stats.policy_loss));
    }
}
