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
#include <span>
#include <vector>

#include "rlqc/env.hpp"
#include "rlqc/policy.hpp"
#include "rlqc/targets.hpp"

namespace rlqc {

struct EvalOptions {
    ActionMode mode = ActionMode::Greedy;
    int threads = 1;
};

/// One row of the per-target CSV.
struct TargetOutcome {
    int target_id = 0;
    bool solved = false;
    int length = 0;
    double final_agf = 0.0;
    std::uint64_t seed = 0;
    double seconds_per_step = 0.0;
};

/// Length statistics are taken over solved targets only.
struct EvalReport {
    int n_targets = 0;
    int n_solved = 0;
    double solved_pct = 0.0;
    double mean_length = 0.0;
    double p95_length = 0.0;
    double p99_length = 0.0;
    double tolerance = 0.0;
    double mean_seconds_per_step = 0.0;
};

struct EvalResult {
    EvalReport report;
    std::vector<TargetOutcome> targets;
};

/// Linear-interpolation percentile (p in [0, 100]) of sorted data. 0 for empty input.
double percentile_sorted(std::span<const double> sorted, double p);

EvalReport summarize(std::span<const TargetOutcome> outcomes, double tolerance);

/// Seed of the RNG stream behind target `id` of an evaluation seeded with `seed`.
std::uint64_t target_seed(std::uint64_t seed, int id);

/// One episode per target; target i is drawn from `targets` with the stream
/// RngStream(target_seed(seed, i)), so results do not depend on thread count.
/// Throws ValidationError for n_targets < 1 or an action-count mismatch.
EvalResult evaluate(const Policy &policy, const EnvConfig &env, const TargetSpec &targets, int n_targets,
                    std::uint64_t seed, const EvalOptions &options = {});

/// Least-squares fit of length = a * log(1/delta)^b.
struct PolylogFit {
    double a = 0.0;
    double b = 0.0;
    double r2 = 0.0;
    double rmse = 0.0;
    /// Set when the data carry no length variation (b is then 0 and r2 meaningless)
    /// or the fit did not converge.
    bool degenerate = false;
    int iterations = 0;
};

/// Starts from the log-log linear regression, then refines with damped Gauss-Newton.
/// Throws DomainError for fewer than 3 points, delta outside (0, 1) or non-positive lengths.
PolylogFit fit_polylog(std::span<const double> deltas, std::span<const double> lengths);

struct ScalingPoint {
    double delta = 0.0;
    double mean_length = 0.0;
    int n_solved = 0;
    int n_targets = 0;
};

struct ScalingResult {
    std::vector<ScalingPoint> points;
    PolylogFit fit;
};

/// Evaluates `policy` at every AGF tolerance (delta = 1 - tolerance) and fits the
/// solved mean lengths. Points with no solved target are reported but not fitted;
/// with fewer than 3 fitted points the fit is marked degenerate.
/// Throws DomainError for fewer than 3 tolerances.
ScalingResult scaling_study(const Policy &policy, const EnvConfig &env, std::span<const double> tolerances,
                            const TargetSpec &targets, int n_per_point, std::uint64_t seed,
                            const EvalOptions &options = {});

}  // namespace rlqc
