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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "rlqc/env.hpp"
#include "rlqc/gateset.hpp"
#include "rlqc/mlp.hpp"
#include "rlqc/policy.hpp"

namespace rlqc {

inline constexpr int kCheckpointVersion = 1;

/// Trained network plus everything needed to rebuild its environment.
///
/// On disk: a text header of "key value" lines ending with "end", followed by
/// the payload of little-endian 64-bit floats (per layer: weights column-major,
/// then bias; then the Adam moments in the same order when present). The
/// header records the payload size and its CRC-32.
struct Checkpoint {
    int format_version = kCheckpointVersion;
    std::string created_at;
    AgentKind agent = AgentKind::Dqn;
    std::string gateset_name;
    std::uint32_t gateset_crc = 0;
    double tolerance_agf = 0.99;
    int max_steps = 130;
    RewardKind reward = RewardKind::Dense;
    NetworkParams params;
    std::optional<AdamState> adam;
    std::int64_t episodes = 0;
    std::uint64_t seed = 0;

    /// Throws ValidationError when `gateset` has a different number of gates than
    /// the policy has outputs, or a different CRC than the one trained on.
    void check_gateset(const GateSet &gateset) const;

    Policy policy() const {
        return Policy{agent, params};
    }
};

/// CRC-32 of the canonical text form of a gate set.
std::uint32_t gateset_crc(const GateSet &gateset);

/// Fills the environment and gate-set fields from `env`, stamps created_at with the current UTC time.
Checkpoint make_checkpoint(AgentKind agent, const EnvConfig &env, NetworkParams params, std::optional<AdamState> adam,
                           std::int64_t episodes, std::uint64_t seed);

std::string encode_checkpoint(const Checkpoint &ckpt);

/// IntegrityError on a malformed header, truncated payload or checksum mismatch;
/// ValidationError for an unsupported format version.
Checkpoint decode_checkpoint(std::string_view bytes);

/// Atomic (write to a temporary file, then rename). IoError on failure.
void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path);
Checkpoint load_checkpoint(const std::filesystem::path &path);

/// Header fields as text, one per line (the inspect-checkpoint view).
std::string describe_checkpoint(const Checkpoint &ckpt);

}  // namespace rlqc
