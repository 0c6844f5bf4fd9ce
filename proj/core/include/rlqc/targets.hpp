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

#include <memory>
#include <string>
#include <vector>

#include "rlqc/gateset.hpp"
#include "rlqc/rng.hpp"
#include "rlqc/unitary.hpp"

namespace rlqc {

/// The fixed single-gate target built from 87 rot-pi-128 gates, printed with
/// 8 decimals and projected back onto U(2) (the printed entries are unitary
/// only to ~1e-9).
UnitaryMatrix fixed_target_87();

enum class TargetKind {
    Fixed,          // the same matrix every episode
    Haar,           // fresh Haar sample every episode
    RandomProduct,  // product of N uniformly drawn base gates, N uniform in [min_gates, max_gates]
};

struct TargetSpec {
    TargetKind kind = TargetKind::Haar;
    UnitaryMatrix fixed;
    int min_gates = 1;
    int max_gates = 30;

    /// "haar", "fixed87", "product:<max>", "product:<min>:<max>", or 8 floats.
    static TargetSpec parse(const std::string &text);
    std::string to_string() const;
};

/// Stream of episode targets. Owns its RNG stream.
class TargetGenerator {
   public:
    TargetGenerator(TargetSpec spec, std::shared_ptr<const GateSet> gateset, RngStream rng);

    UnitaryMatrix next();

    /// Gate sequence behind the last RandomProduct target (empty otherwise).
    const std::vector<std::size_t> &last_sequence() const {
        return last_sequence_;
    }
    const TargetSpec &spec() const {
        return spec_;
    }

   private:
    TargetSpec spec_;
    std::shared_ptr<const GateSet> gateset_;
    RngStream rng_;
    std::vector<std::size_t> last_sequence_;
};

}  // namespace rlqc
