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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlqc/unitary.hpp"

namespace rlqc {

enum class Axis { X, Y, Z };

/// exp(-i angle sigma_axis / 2); R_z(t) = diag(e^{-it/2}, e^{it/2}).
/// Throws DomainError for a non-finite angle.
UnitaryMatrix rotation(Axis axis, double angle);

struct Gate {
    std::string label;
    UnitaryMatrix matrix;

    bool operator==(const Gate &) const = default;
};

/// Ordered, immutable gate base. Action index i always refers to gates()[i].
class GateSet {
   public:
    static constexpr std::size_t kMaxGates = 64;

    /// Validates size (1..64), label uniqueness and unitarity of every gate.
    GateSet(std::string name, std::vector<Gate> gates);

    const std::string &name() const {
        return name_;
    }
    const std::vector<Gate> &gates() const {
        return gates_;
    }
    std::size_t size() const {
        return gates_.size();
    }
    const Gate &operator[](std::size_t action) const {
        return gates_[action];
    }
    const UnitaryMatrix &matrix(std::size_t action) const {
        return gates_[action].matrix;
    }

    std::optional<std::size_t> index_of(std::string_view label) const;

    /// Product gates[a0] * gates[a1] * ... in circuit order.
    UnitaryMatrix product(const std::vector<std::size_t> &actions) const;

    /// Resolves a space-separated label list into action indices (ValidationError on unknown label).
    std::vector<std::size_t> parse_sequence(std::string_view labels) const;
    std::string format_sequence(const std::vector<std::size_t> &actions) const;

    bool operator==(const GateSet &) const = default;

   private:
    std::string name_;
    std::vector<Gate> gates_;
};

/// "rot-pi-128": R_x(+-pi/128), R_y(+-pi/128), R_z(+-pi/128) in that order.
/// "hrc": V1, V2, V3.
GateSet builtin_gateset(std::string_view name);
std::vector<std::string> builtin_gateset_names();

/// Gate-set file format:
///
///     # comment
///     gateset <name>
///     <label> re00 im00 re01 im01 re10 im10 re11 im11
GateSet parse_gateset(std::string_view text);
std::string serialize_gateset(const GateSet &gateset);

/// A built-in name, or otherwise a path to a gate-set file.
GateSet resolve_gateset(const std::string &name_or_path);

}  // namespace rlqc
