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

#include <algorithm>
#include <cmath>
#include <vector>

#include "rlqc/mlp.hpp"
#include "rlqc/rng.hpp"

namespace rlqc::testing {

/// Scalar probe loss sum_h sum_ij c_h(i, j) * out_h(i, j) with fixed random weights c.
struct ProbeLoss {
    std::vector<Eigen::MatrixXd> coeffs;

    double operator()(const NetworkParams &p, const Eigen::MatrixXd &x) const {
        const ForwardCache c = forward(p, x);
        double s = 0.0;
        for (std::size_t h = 0; h < coeffs.size(); ++h) {
            s += coeffs[h].cwiseProduct(c.output(h)).sum();
        }
        return s;
    }
};

inline ProbeLoss make_probe(const NetworkParams &p, Eigen::Index batch, RngStream &rng) {
    ProbeLoss loss;
    for (std::size_t h = 0; h < p.num_heads(); ++h) {
        Eigen::MatrixXd c(p.head_dim(h), batch);
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            c.data()[i] = rng.normal();
        }
        loss.coeffs.push_back(c);
    }
    return loss;
}

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

/// Compares backward() with central differences (step h) on every parameter.
/// Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheckResult gradient_check(NetworkParams params, const Eigen::MatrixXd &x, const ProbeLoss &loss,
                                      double h = 1e-5, double floor = 1e-7) {
    const ForwardCache cache = forward(params, x);
    std::vector<HeadGradient> heads;
    for (const auto &c : loss.coeffs) {
        heads.push_back({c, false});
    }
    const NetworkGradients g = backward(params, cache, heads);
    GradCheckResult out;
    auto probe = [&](double &slot, double analytic) {
        const double saved = slot;
        slot = saved + h;
        const double up = loss(params, x);
        slot = saved - h;
        const double down = loss(params, x);
        slot = saved;
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
        out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / denom);
        ++out.checked;
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        DenseLayer &layer = params.layers[l];
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
            probe(layer.weights.data()[i], g.weights[l].data()[i]);
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
            probe(layer.bias.data()[i], g.biases[l].data()[i]);
        }
    }
    return out;
}

inline Eigen::MatrixXd random_inputs(Eigen::Index rows, Eigen::Index cols, RngStream &rng) {
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = 2 * rng.uniform() - 1;
    }
    return x;
}

}  // namespace rlqc::testing
