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

#include "rlqc/targets.hpp"

#include <charconv>

#include "rlqc/errors.hpp"

namespace rlqc {

UnitaryMatrix fixed_target_87() {
    const UnitaryMatrix printed(Complex(0.76749896, -0.43959894), Complex(-0.09607122, 0.45658344),
                                Complex(0.09607122, 0.45658344), Complex(0.76749896, 0.43959894));
    return nearest_unitary(printed);
}

namespace {

int parse_int(const std::string &s, const std::string &context) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ValidationError("invalid integer '" + s + "' in target spec '" + context + "'");
    }
    return value;
}

}  // namespace

TargetSpec TargetSpec::parse(const std::string &text) {
    TargetSpec spec;
    if (text == "haar") {
        spec.kind = TargetKind::Haar;
    } else if (text == "fixed87") {
        spec.kind = TargetKind::Fixed;
        spec.fixed = fixed_target_87();
    } else if (text.rfind("product:", 0) == 0) {
        spec.kind = TargetKind::RandomProduct;
        const std::string rest = text.substr(8);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) {
            spec.min_gates = 1;
            spec.max_gates = parse_int(rest, text);
        } else {
            spec.min_gates = parse_int(rest.substr(0, colon), text);
            spec.max_gates = parse_int(rest.substr(colon + 1), text);
        }
        if (spec.min_gates < 1 || spec.max_gates < spec.min_gates) {
            throw ValidationError("target spec '" + text + "' needs 1 <= min <= max");
        }
    } else {
        spec.kind = TargetKind::Fixed;
        try {
            spec.fixed = parse_matrix(text);
        } catch (const ParseError &e) {
            throw ValidationError("target must be haar, fixed87, product:<max>[...] or 8 floats (" +
                                  std::string(e.what()) + ")");
        }
    }
    return spec;
}

std::string TargetSpec::to_string() const {
    switch (kind) {
        case TargetKind::Haar:
            return "haar";
        case TargetKind::RandomProduct:
            return "product:" + std::to_string(min_gates) + ":" + std::to_string(max_gates);
        case TargetKind::Fixed:
            return fixed == fixed_target_87() ? "fixed87" : format_matrix(fixed);
    }
    return "haar";
}

TargetGenerator::TargetGenerator(TargetSpec spec, std::shared_ptr<const GateSet> gateset, RngStream rng)
    : spec_(std::move(spec)), gateset_(std::move(gateset)), rng_(std::move(rng)) {
    if (spec_.kind == TargetKind::RandomProduct && !gateset_) {
        throw ValidationError("product targets need a gate set");
    }
}

UnitaryMatrix TargetGenerator::next() {
    last_sequence_.clear();
    switch (spec_.kind) {
        case TargetKind::Fixed:
            return spec_.fixed;
        case TargetKind::Haar:
            return haar_sample(rng_);
        case TargetKind::RandomProduct: {
            const auto span = static_cast<std::uint64_t>(spec_.max_gates - spec_.min_gates + 1);
            const int n = spec_.min_gates + static_cast<int>(rng_.uniform_int(span));
            for (int i = 0; i < n; ++i) {
                last_sequence_.push_back(static_cast<std::size_t>(rng_.uniform_int(gateset_->size())));
            }
            return gateset_->product(last_sequence_);
        }
    }
    return UnitaryMatrix::identity();
}

}  // namespace rlqc
