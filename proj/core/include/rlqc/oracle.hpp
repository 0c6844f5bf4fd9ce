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

#include <array>
#include <cstdint>

#include "rlqc/gateset.hpp"
#include "rlqc/policy.hpp"
#include "rlqc/rng.hpp"
#include "rlqc/unitary.hpp"

namespace rlqc {

/// Upper bound on the number of sequences (sum of |B|^d for d <= max_depth)
/// bfs_compile agrees to consider.
inline constexpr double kBfsNodeLimit = 1e6;

/// Minimum-length gate sequence with agf(product, target) >= tolerance_agf,
/// found breadth first. Ties go to the lexicographically smallest action list.
/// States equal up to global phase (after rounding to 6 decimals) are visited
/// once. Throws ResourceError when the search space exceeds kBfsNodeLimit and
/// DomainError for a tolerance outside (1/3, 1).
CompilationResult bfs_compile(const UnitaryMatrix &target, const GateSet &gateset, double tolerance_agf, int max_depth);

/// Rounded, phase-normalized entries used as the BFS visited key.
std::array<std::int64_t, 8> phase_canonical_key(const UnitaryMatrix &u);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo average of |<psi| u^dagger v |psi>|^2 over Haar-random pure states.
/// Throws DomainError when n_samples < 100.
McEstimate mc_agf(const UnitaryMatrix &u, const UnitaryMatrix &v, int n_samples, RngStream &rng);

}  // namespace rlqc
