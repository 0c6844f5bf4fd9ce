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

#include "rlqc/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <string>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "rlqc/errors.hpp"

namespace rlqc {

namespace {

struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 8> &k) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::int64_t v : k) {
            h = splitmix64(h ^ static_cast<std::uint64_t>(v));
        }
        return static_cast<std::size_t>(h);
    }
};

struct Node {
    UnitaryMatrix product;
    std::int64_t parent;
    std::uint32_t action;
};

}  // namespace

std::array<std::int64_t, 8> phase_canonical_key(const UnitaryMatrix &u) {
    Complex phase{1.0, 0.0};
    for (const Complex &z : u.entries()) {
        if (std::abs(z) > 1e-9) {
            phase = std::conj(z) / std::abs(z);
            break;
        }
    }
    std::array<std::int64_t, 8> key{};
    for (std::size_t i = 0; i < 4; ++i) {
        const Complex z = u.entries()[i] * phase;
        // + 0.0 folds -0 into 0 so both signs of zero share a key.
        key[2 * i] = std::llround(z.real() * 1e6 + 0.0);
        key[2 * i + 1] = std::llround(z.imag() * 1e6 + 0.0);
    }
    return key;
}

CompilationResult bfs_compile(const UnitaryMatrix &target, const GateSet &gateset, double tolerance_agf, int max_depth) {
    if (!(tolerance_agf > 1.0 / 3.0 && tolerance_agf < 1.0)) {
        throw DomainError("bfs_compile: tolerance must lie in (1/3, 1)");
    }
    if (max_depth < 0) {
        throw DomainError("bfs_compile: max_depth must be non-negative");
    }
    const double b = static_cast<double>(gateset.size());
    double space = 0.0;
    for (int d = 0; d <= max_depth; ++d) {
        space += std::pow(b, d);
    }
    if (space > kBfsNodeLimit) {
        throw ResourceError("bfs_compile: depth " + std::to_string(max_depth) + " over " +
                            std::to_string(gateset.size()) + " gates exceeds the search limit");
    }
    const auto t0 = std::chrono::steady_clock::now();
    CompilationResult out;
    auto finish = [&](std::int64_t node, const std::vector<Node> &nodes, double f) {
        for (std::int64_t i = node; i > 0; i = nodes[static_cast<std::size_t>(i)].parent) {
            out.actions.push_back(nodes[static_cast<std::size_t>(i)].action);
        }
        std::reverse(out.actions.begin(), out.actions.end());
        for (std::size_t a : out.actions) {
            out.sequence.push_back(gateset[a].label);
        }
        out.solved = true;
        out.length = static_cast<int>(out.actions.size());
        out.final_agf = f;
    };

    std::vector<Node> nodes{{UnitaryMatrix::identity(), -1, 0}};
    std::unordered_set<std::array<std::int64_t, 8>, KeyHash> seen{phase_canonical_key(nodes[0].product)};
    const double f0 = agf(nodes[0].product, target).value;
    out.final_agf = f0;
    if (f0 >= tolerance_agf) {
        finish(0, nodes, f0);
    }
    std::size_t level_begin = 0;
    for (int depth = 1; depth <= max_depth && !out.solved; ++depth) {
        const std::size_t level_end = nodes.size();
        for (std::size_t n = level_begin; n < level_end && !out.solved; ++n) {
            for (std::size_t a = 0; a < gateset.size(); ++a) {
                const UnitaryMatrix p = compose(nodes[n].product, gateset.matrix(a));
                const double f = agf(p, target).value;
                if (f >= tolerance_agf) {
                    nodes.push_back({p, static_cast<std::int64_t>(n), static_cast<std::uint32_t>(a)});
                    finish(static_cast<std::int64_t>(nodes.size() - 1), nodes, f);
                    break;
                }
                if (seen.insert(phase_canonical_key(p)).second) {
                    nodes.push_back({p, static_cast<std::int64_t>(n), static_cast<std::uint32_t>(a)});
                }
                out.final_agf = std::max(out.final_agf, f);
            }
        }
        level_begin = level_end;
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.solved) {
        EnvConfig env{std::make_shared<const GateSet>(gateset), tolerance_agf, std::max(out.length, 1), RewardKind::Sparse};
        verify_compilation(env, target, out);
    }
    return out;
}

McEstimate mc_agf(const UnitaryMatrix &u, const UnitaryMatrix &v, int n_samples, RngStream &rng) {
    if (n_samples < 100) {
        throw DomainError("mc_agf needs at least 100 samples");
    }
    const UnitaryMatrix w = compose(dagger(u), v);
    // Welford accumulation keeps the variance exact when every term is 1.
    double mean = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const auto psi = haar_state(rng);
        const Complex w0 = w(0, 0) * psi[0] + w(0, 1) * psi[1];
        const Complex w1 = w(1, 0) * psi[0] + w(1, 1) * psi[1];
        const double x = std::norm(std::conj(psi[0]) * w0 + std::conj(psi[1]) * w1);
        const double delta = x - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (x - mean);
    }
    const double n = static_cast<double>(n_samples);
    McEstimate est;
    est.mean = mean;
    est.std_error = std::sqrt(std::max(0.0, m2 / (n - 1.0)) / n);
    return est;
}

}  // namespace rlqc
