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


#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "rlqc/dqn.hpp"
#include "rlqc/env.hpp"
#include "rlqc/gateset.hpp"
#include "rlqc/mlp.hpp"
#include "rlqc/oracle.hpp"
#include "rlqc/unitary.hpp"

namespace {

using namespace rlqc;

void BM_Compose(benchmark::State &state) {
    RngStream rng(1);
    const UnitaryMatrix a = haar_sample(rng);
    UnitaryMatrix u = haar_sample(rng);
    for (auto _ : state) {
        u = compose(u, a);
        benchmark::DoNotOptimize(u);
    }
}
BENCHMARK(BM_Compose);

void BM_Agf(benchmark::State &state) {
    RngStream rng(2);
    const UnitaryMatrix a = haar_sample(rng);
    const UnitaryMatrix b = haar_sample(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(agf(a, b).value);
    }
}
BENCHMARK(BM_Agf);

void BM_HaarSample(benchmark::State &state) {
    RngStream rng(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(haar_sample(rng));
    }
}
BENCHMARK(BM_HaarSample);

void BM_ForwardOne(benchmark::State &state) {
    RngStream rng(4);
    const NetworkParams net = init_network(dqn_network_shape(6), rng);
    const Observation obs = make_observation(UnitaryMatrix::identity(), haar_sample(rng));
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_one(net, obs));
    }
}
BENCHMARK(BM_ForwardOne);

void BM_QUpdate(benchmark::State &state) {
    RngStream rng(5);
    NetworkParams online = init_network(dqn_network_shape(6), rng);
    const NetworkParams target = online;
    AdamState adam = AdamState::for_params(online, 1e-4);
    std::vector<Transition> data(static_cast<std::size_t>(state.range(0)));
    for (auto &t : data) {
        t.obs = make_observation(UnitaryMatrix::identity(), haar_sample(rng));
        t.next_obs = make_observation(UnitaryMatrix::identity(), haar_sample(rng));
        t.action = static_cast<std::uint32_t>(rng.uniform_int(6));
        t.reward = -0.01;
    }
    std::vector<const Transition *> batch;
    for (const auto &t : data) {
        batch.push_back(&t);
    }
    QUpdateWorkspace ws;
    const BellmanSpec bellman{0.99};
    for (auto _ : state) {
        benchmark::DoNotOptimize(q_update(online, target, adam, batch, bellman, ws));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QUpdate)->Arg(200)->Arg(1000);

void BM_EnvStep(benchmark::State &state) {
    const EnvConfig cfg{std::make_shared<const GateSet>(builtin_gateset("rot-pi-128")), 0.99, 10000,
                        RewardKind::Dense};
    CompileEnv env(cfg);
    RngStream rng(6);
    const UnitaryMatrix target = haar_sample(rng);
    env.reset(target);
    for (auto _ : state) {
        if (env.state().done) {
            env.reset(target);
        }
        benchmark::DoNotOptimize(env.step(rng.uniform_int(6)));
    }
}
BENCHMARK(BM_EnvStep);

void BM_Bfs(benchmark::State &state) {
    const GateSet hrc = builtin_gateset("hrc");
    RngStream rng(7);
    const int depth = static_cast<int>(state.range(0));
    for (auto _ : state) {
        // Haar targets are essentially never reached, so the whole tree is visited.
        benchmark::DoNotOptimize(bfs_compile(haar_sample(rng), hrc, 0.9999, depth));
    }
}
BENCHMARK(BM_Bfs)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
