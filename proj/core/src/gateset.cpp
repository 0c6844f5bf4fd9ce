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

#include "rlqc/gateset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "rlqc/errors.hpp"

namespace rlqc {

UnitaryMatrix rotation(Axis axis, double angle) {
    if (!std::isfinite(angle)) {
        throw DomainError("rotation angle must be finite");
    }
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    switch (axis) {
        case Axis::X:
            return UnitaryMatrix(Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0));
        case Axis::Y:
            return UnitaryMatrix(Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0));
        case Axis::Z:
            return UnitaryMatrix(Complex(c, -s), Complex(0, 0), Complex(0, 0), Complex(c, s));
    }
    throw DomainError("unknown rotation axis");
}

GateSet::GateSet(std::string name, std::vector<Gate> gates) : name_(std::move(name)), gates_(std::move(gates)) {
    if (name_.empty() || name_.find_first_of(" \t\r\n") != std::string::npos) {
        throw ValidationError("gate set name must be a single non-empty token");
    }
    if (gates_.empty() || gates_.size() > kMaxGates) {
        throw ValidationError("gate set '" + name_ + "' must hold between 1 and 64 gates, got " +
                              std::to_string(gates_.size()));
    }
    std::set<std::string> seen;
    for (const Gate &g : gates_) {
        if (g.label.empty() || g.label.find_first_of(" \t\r\n#") != std::string::npos) {
            throw ValidationError("gate label '" + g.label + "' must be a single token without '#'");
        }
        if (!seen.insert(g.label).second) {
            throw ValidationError("duplicate gate label '" + g.label + "'");
        }
        const double err = unitarity_error(g.matrix);
        if (!(err <= UnitaryMatrix::kUnitarityTolerance)) {
            std::ostringstream msg;
            msg << "gate '" << g.label << "' is not unitary: |g^dagger g - I| = " << err;
            throw ValidationError(msg.str());
        }
    }
}

std::optional<std::size_t> GateSet::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        if (gates_[i].label == label) {
            return i;
        }
    }
    return std::nullopt;
}

UnitaryMatrix GateSet::product(const std::vector<std::size_t> &actions) const {
    UnitaryMatrix u;
    for (std::size_t a : actions) {
        if (a >= gates_.size()) {
            throw DomainError("action " + std::to_string(a) + " out of range for gate set '" + name_ + "'");
        }
        u = compose(u, gates_[a].matrix);
    }
    return u;
}

std::vector<std::size_t> GateSet::parse_sequence(std::string_view labels) const {
    std::vector<std::size_t> actions;
    std::istringstream in{std::string(labels)};
    std::string label;
    while (in >> label) {
        auto idx = index_of(label);
        if (!idx) {
            throw ValidationError("unknown gate label '" + label + "' for gate set '" + name_ + "'");
        }
        actions.push_back(*idx);
    }
    return actions;
}

std::string GateSet::format_sequence(const std::vector<std::size_t> &actions) const {
    std::string out;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += gates_.at(actions[i]).label;
    }
    return out;
}

GateSet builtin_gateset(std::string_view name) {
    if (name == "rot-pi-128") {
        const double t = std::numbers::pi / 128.0;
        return GateSet("rot-pi-128", {
                                         {"Rx+", rotation(Axis::X, t)},
                                         {"Rx-", rotation(Axis::X, -t)},
                                         {"Ry+", rotation(Axis::Y, t)},
                                         {"Ry-", rotation(Axis::Y, -t)},
                                         {"Rz+", rotation(Axis::Z, t)},
                                         {"Rz-", rotation(Axis::Z, -t)},
                                     });
    }
    if (name == "hrc") {
        const double s = 1.0 / std::sqrt(5.0);
        return GateSet("hrc", {
                                  {"V1", UnitaryMatrix(Complex(s, 0), Complex(0, 2 * s), Complex(0, 2 * s), Complex(s, 0))},
                                  {"V2", UnitaryMatrix(Complex(s, 0), Complex(2 * s, 0), Complex(-2 * s, 0), Complex(s, 0))},
                                  {"V3", UnitaryMatrix(Complex(s, 2 * s), Complex(0, 0), Complex(0, 0), Complex(s, -2 * s))},
                              });
    }
    std::string available;
    for (const auto &n : builtin_gateset_names()) {
        available += (available.empty() ? "" : ", ") + n;
    }
    throw NameError("unknown gate set '" + std::string(name) + "' (available: " + available + ")");
}

std::vector<std::string> builtin_gateset_names() {
    return {"rot-pi-128", "hrc"};
}

namespace {

std::array<double, 8> parse_gate_reals(const std::string &rest, const std::string &label, int line_no) {
    std::array<double, 8> reals{};
    std::istringstream nums(rest);
    std::string tok;
    std::size_t count = 0;
    while (nums >> tok) {
        if (count == reals.size()) {
            throw ParseError("gate '" + label + "': expected 8 floats, found more", line_no);
        }
        std::size_t used = 0;
        try {
            reals[count] = std::stod(tok, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used != tok.size()) {
            throw ParseError("gate '" + label + "': invalid float '" + tok + "'", line_no);
        }
        ++count;
    }
    if (count != reals.size()) {
        throw ParseError("gate '" + label + "': expected 8 floats, found " + std::to_string(count), line_no);
    }
    return reals;
}

}  // namespace

GateSet parse_gateset(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    std::optional<std::string> name;
    std::vector<Gate> gates;
    std::set<std::string> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::string head;
        if (!(fields >> head)) {
            continue;
        }
        if (!name) {
            std::string gs_name, extra;
            if (head != "gateset" || !(fields >> gs_name) || (fields >> extra)) {
                throw ParseError("expected 'gateset <name>'", line_no);
            }
            name = gs_name;
            continue;
        }
        std::string rest;
        std::getline(fields, rest);
        const UnitaryMatrix u = UnitaryMatrix::from_reals(parse_gate_reals(rest, head, line_no));
        if (!labels.insert(head).second) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate gate label '" + head + "'");
        }
        const double err = unitarity_error(u);
        if (!(err <= UnitaryMatrix::kUnitarityTolerance)) {
            std::ostringstream msg;
            msg << "line " << line_no << ": gate '" << head << "' is not unitary: |g^dagger g - I| = " << err;
            throw ValidationError(msg.str());
        }
        gates.push_back({head, u});
    }
    if (!name) {
        throw ParseError("missing 'gateset <name>' header", line_no);
    }
    return GateSet(*name, std::move(gates));
}

std::string serialize_gateset(const GateSet &gateset) {
    std::string out = "gateset " + gateset.name() + "\n";
    for (const Gate &g : gateset.gates()) {
        out += g.label + ' ' + format_matrix(g.matrix) + '\n';
    }
    return out;
}

GateSet resolve_gateset(const std::string &name_or_path) {
    for (const auto &n : builtin_gateset_names()) {
        if (n == name_or_path) {
            return builtin_gateset(n);
        }
    }
    std::ifstream in(name_or_path);
    if (!in) {
        return builtin_gateset(name_or_path);  // NameError listing the built-ins
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_gateset(text.str());
}

}  // namespace rlqc
