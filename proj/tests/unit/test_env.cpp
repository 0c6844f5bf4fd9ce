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
#include <numbers>

#include "doctest.h"
#include "rlqc/env.hpp"
#include "rlqc/errors.hpp"
#include "rlqc/targets.hpp"
#include "test_helpers.hpp"

using namespace rlqc;

namespace {

EnvConfig make_config(const std::string &gs, RewardKind reward, int max_steps = 130, double tol = 0.99) {
    EnvConfig c;
    c.gateset = std::make_shared<const GateSet>(builtin_gateset(gs));
    c.reward = reward;
    c.max_steps = max_steps;
    c.tolerance_agf = tol;
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    EnvConfig c = make_config("hrc", RewardKind::Sparse);
    CHECK_NOTHROW(c.validate());
    c.tolerance_agf = 1.0 / 3.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.tolerance_agf = 1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.tolerance_agf = 0.9;
    c.max_steps = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.max_steps = 10001;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.max_steps = 10000;
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(CompileEnv(EnvConfig{}), ValidationError);
}

TEST_CASE("reward kind names") {
    CHECK(to_string(RewardKind::Dense) == "dense");
    CHECK(parse_reward_kind("sparse") == RewardKind::Sparse);
    CHECK_THROWS(parse_reward_kind("shaped"));
}

TEST_CASE("reset") {
    CompileEnv env(make_config("hrc", RewardKind::Sparse));
    RngStream rng(1);
    const UnitaryMatrix t = haar_sample(rng);
    const Observation obs = env.reset(t);
    CHECK(obs == t.to_reals());
    CHECK(env.state().step == 0);
    CHECK_FALSE(env.state().done);

    env.reset(UnitaryMatrix::identity());
    CHECK_FALSE(env.state().done);
    CHECK_FALSE(env.state().solved);
    CHECK(agf(env.state().product, env.state().target) >= 0.99);

    CHECK_THROWS_AS(env.reset(UnitaryMatrix(1, 1, 0, 1)), ValidationError);
}

TEST_CASE("step errors") {
    CompileEnv env(make_config("hrc", RewardKind::Sparse, 2));
    CHECK_THROWS_AS(env.step(0), StateError);
    env.reset(rlqc::testing::v3());
    CHECK_THROWS_AS(env.step(3), DomainError);
    env.step(0);
    const StepResult r = env.step(0);
    CHECK(r.done);
    CHECK(r.truncated);
    CHECK_FALSE(r.solved);
    CHECK_THROWS_AS(env.step(0), StateError);
}

TEST_CASE("dense reward values") {
    CHECK(step_reward(RewardKind::Dense, true, 0.0, 76, 130) == 55.0);
    CHECK(std::abs(step_reward(RewardKind::Dense, false, 0.5, 10, 130) - (-0.5 / 130)) < 1e-15);
    CHECK(std::abs(step_reward(RewardKind::Dense, false, 0.5, 10, 130) + 0.003846) < 1e-6);
    CHECK(step_reward(RewardKind::Dense, true, 0.001, 130, 130) == 1.0);
    CHECK(step_reward(RewardKind::Dense, true, 0.001, 1, 130) == 130.0);
}

TEST_CASE("sparse reward values") {
    CHECK(step_reward(RewardKind::Sparse, false, 0.3, 4, 130) == -1.0 / 130);
    CHECK(step_reward(RewardKind::Sparse, true, 0.0, 4, 130) == 0.0);
}

TEST_CASE("step multiplies on the right") {
    const EnvConfig cfg = make_config("hrc", RewardKind::Sparse);
    CompileEnv env(cfg);
    RngStream rng(2);
    env.reset(haar_sample(rng));
    env.step(0);
    env.step(2);
    CHECK(max_abs_diff(env.state().product, compose(cfg.gateset->matrix(0), cfg.gateset->matrix(2))) < 1e-15);
}

TEST_CASE("replay examples") {
    const EnvConfig cfg = make_config("hrc", RewardKind::Sparse);
    const UnitaryMatrix v1 = rlqc::testing::v1();
    const ReplayResult one = replay(cfg, v1, {0});
    CHECK(one.solved);
    CHECK(one.rewards.size() == 1);
    CHECK(one.rewards[0] == 0.0);

    const ReplayResult none = replay(cfg, v1, {});
    CHECK_FALSE(none.solved);
    CHECK(std::abs(none.final_agf - 14.0 / 30.0) < 1e-12);
    CHECK(none.rewards.empty());

    std::vector<std::size_t> long_seq(131, 0);
    CHECK_THROWS(replay(cfg, v1, long_seq));
}

TEST_CASE("random 87-gate product is solved by its own sequence") {
    const EnvConfig cfg = make_config("rot-pi-128", RewardKind::Dense);
    RngStream rng(87);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<std::size_t> seq(87);
        for (auto &a : seq) {
            a = rng.uniform_int(6);
        }
        const UnitaryMatrix target = cfg.gateset->product(seq);
        // A prefix may already land within tolerance; the episode then ends there.
        std::size_t first = 0;
        UnitaryMatrix p;
        for (std::size_t j = 0; j < seq.size(); ++j) {
            p = compose(p, cfg.gateset->matrix(seq[j]));
            if (agf(p, target) >= cfg.tolerance_agf) {
                first = j + 1;
                break;
            }
        }
        REQUIRE(first >= 1);
        const std::vector<std::size_t> prefix(seq.begin(), seq.begin() + static_cast<long>(first));
        const ReplayResult r = replay(cfg, target, prefix);
        CHECK(r.solved);
        CHECK(r.rewards.size() == first);
        CHECK(r.rewards.back() == static_cast<double>(cfg.max_steps - static_cast<int>(first) + 1));
        if (first < seq.size()) {
            CHECK_THROWS_AS(replay(cfg, target, seq), StateError);
        }
    }
}

TEST_CASE("repeated rotation solves where the closed form says") {
    const EnvConfig cfg = make_config("rot-pi-128", RewardKind::Dense);
    const std::vector<std::size_t> seq(87, 0);
    const UnitaryMatrix target = cfg.gateset->product(seq);
    // After j gates the remaining angle is (87 - j) pi / 128 and |Tr| = 2 cos((87 - j) pi / 256).
    std::size_t expect = 0;
    for (std::size_t j = 1; j <= 87; ++j) {
        const double c = std::cos((87.0 - static_cast<double>(j)) * std::numbers::pi / 256);
        if ((2 + 4 * c * c) / 6 >= cfg.tolerance_agf) {
            expect = j;
            break;
        }
    }
    REQUIRE(expect > 1);
    const std::vector<std::size_t> prefix(expect, 0);
    const ReplayResult r = replay(cfg, target, prefix);
    CHECK(r.solved);
    CHECK(r.rewards.size() == expect);
    const std::vector<std::size_t> shorter(expect - 1, 0);
    CHECK_FALSE(replay(cfg, target, shorter).solved);
    EnvConfig tight = cfg;
    tight.tolerance_agf = 1.0 - 1e-12;
    CHECK(replay(tight, target, seq).solved);
}

TEST_CASE("observation consistency over long random walks") {
    const EnvConfig cfg = make_config("rot-pi-128", RewardKind::Dense, 300, 0.999999);
    CompileEnv env(cfg);
    RngStream rng(17);
    for (int ep = 0; ep < 20; ++ep) {
        env.reset(haar_sample(rng));
        bool done = false;
        while (!done) {
            const StepResult r = env.step(rng.uniform_int(6));
            done = r.done;
            const UnitaryMatrix o = UnitaryMatrix::from_reals(r.observation);
            CHECK(max_abs_diff(compose(env.state().product, o), env.state().target) < 1e-8);
            CHECK(unitarity_error(o) < 1e-8);
            CHECK(env.state().step <= cfg.max_steps);
            CHECK(r.done == (r.solved || env.state().step == cfg.max_steps));
            CHECK_FALSE((r.solved && r.truncated));
            if (!r.solved) {
                CHECK(r.reward >= -2.0 / (3.0 * cfg.max_steps) - 1e-15);
                CHECK(r.reward <= 0.0);
            } else {
                CHECK(r.reward >= 1.0);
                CHECK(r.reward <= cfg.max_steps);
            }
        }
    }
}

TEST_CASE("failed sparse episode returns -1") {
    const EnvConfig cfg = make_config("hrc", RewardKind::Sparse, 130, 0.999999);
    CompileEnv env(cfg);
    RngStream rng(3);
    env.reset(haar_sample(rng));
    double total = 0;
    StepResult r;
    do {
        r = env.step(rng.uniform_int(3));
        total += r.reward;
        CHECK((r.reward == 0.0 || r.reward == -1.0 / 130));
    } while (!r.done);
    REQUIRE(r.truncated);
    CHECK(std::abs(total + 1.0) < 1e-12);
}

TEST_CASE("determinism") {
    const EnvConfig cfg = make_config("rot-pi-128", RewardKind::Dense);
    RngStream rng(5);
    const UnitaryMatrix t = haar_sample(rng);
    std::vector<std::size_t> seq(100);
    for (auto &a : seq) {
        a = rng.uniform_int(6);
    }
    const ReplayResult a = replay(cfg, t, seq);
    const ReplayResult b = replay(cfg, t, seq);
    CHECK(a.rewards == b.rewards);
    CHECK(a.final_agf == b.final_agf);

    CompileEnv env(cfg);
    env.reset(t);
    std::vector<double> stepped;
    for (auto s : seq) {
        const StepResult r = env.step(s);
        stepped.push_back(r.reward);
        if (r.done) {
            break;
        }
    }
    CHECK(stepped == a.rewards);
    CHECK(agf(env.state().product, t).value == a.final_agf);
}

TEST_CASE("target generators") {
    auto gs = std::make_shared<const GateSet>(builtin_gateset("hrc"));
    TargetGenerator fixed(TargetSpec::parse("fixed87"), gs, RngStream(1));
    CHECK(fixed.next() == fixed_target_87());
    CHECK(fixed.next() == fixed_target_87());
    CHECK(unitarity_error(fixed_target_87()) < 1e-10);

    TargetGenerator prod(TargetSpec::parse("product:2:4"), gs, RngStream(1));
    for (int i = 0; i < 50; ++i) {
        const UnitaryMatrix u = prod.next();
        const auto &seq = prod.last_sequence();
        CHECK(seq.size() >= 2);
        CHECK(seq.size() <= 4);
        CHECK(max_abs_diff(u, gs->product(seq)) < 1e-15);
    }
    CHECK(TargetSpec::parse("product:7").max_gates == 7);
    CHECK(TargetSpec::parse("haar").kind == TargetKind::Haar);
    CHECK(TargetSpec::parse(TargetSpec::parse("product:3:9").to_string()).min_gates == 3);
    const TargetSpec m = TargetSpec::parse("0 0 1 0 1 0 0 0");
    CHECK(m.kind == TargetKind::Fixed);
    CHECK(m.fixed == UnitaryMatrix(0, 1, 1, 0));
    CHECK_THROWS(TargetSpec::parse("product:5:2"));
    CHECK_THROWS(TargetSpec::parse("nonsense"));

    TargetGenerator h1(TargetSpec::parse("haar"), gs, RngStream(9));
    TargetGenerator h2(TargetSpec::parse("haar"), gs, RngStream(9));
    CHECK(h1.next() == h2.next());
}
