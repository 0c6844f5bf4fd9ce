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

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlqc/rng.hpp"

namespace rlqc {

enum class Activation { Selu, Relu, Linear, Softmax };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view text);

inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

double selu(double x);

struct DenseLayer {
    Eigen::MatrixXd weights;  // fan_out x fan_in
    Eigen::VectorXd bias;     // fan_out
    Activation activation = Activation::Linear;

    Eigen::Index fan_in() const {
        return weights.cols();
    }
    Eigen::Index fan_out() const {
        return weights.rows();
    }
};

/// Dense feed-forward network: a chain of trunk layers followed by one or more
/// heads that each read the last trunk output.
///
///   DQN: 8 -> 128 (selu) -> 128 (selu) -> |B| (linear)
///   PPO: 8 -> 128 (selu) -> 128 (selu) -> {|B| (softmax), 1 (linear)}
struct NetworkParams {
    std::vector<DenseLayer> layers;  // trunk layers first, then heads
    std::size_t num_trunk = 0;

    Eigen::Index input_dim() const {
        return layers.front().fan_in();
    }
    std::size_t num_heads() const {
        return layers.size() - num_trunk;
    }
    const DenseLayer &head(std::size_t h) const {
        return layers[num_trunk + h];
    }
    Eigen::Index head_dim(std::size_t h) const {
        return head(h).fan_out();
    }

    /// Throws DomainError unless dimensions chain and every parameter is finite.
    void validate() const;

    bool operator==(const NetworkParams &other) const;
};

struct LayerShape {
    int units;
    Activation activation;
};

struct NetworkShape {
    int input_dim;
    std::vector<LayerShape> trunk;
    std::vector<LayerShape> heads;
};

/// Hidden layers use lecun-normal weights (std 1/sqrt(fan_in)), heads use
/// glorot-uniform (limit sqrt(6/(fan_in+fan_out))); biases start at zero.
NetworkParams init_network(const NetworkShape &shape, RngStream &rng);

/// Single-head chain: dims = {input, hidden..., output}, one activation per layer.
NetworkParams init_network(const std::vector<int> &dims, const std::vector<Activation> &activations, RngStream &rng);

/// Activations of one batched forward pass (samples are columns).
struct ForwardCache {
    std::vector<Eigen::MatrixXd> trunk;  // trunk[0] is the input, trunk[i+1] the output of layer i
    std::vector<Eigen::MatrixXd> trunk_pre;
    std::vector<Eigen::MatrixXd> head_pre;
    std::vector<Eigen::MatrixXd> heads;

    const Eigen::MatrixXd &output(std::size_t h = 0) const {
        return heads[h];
    }
};

/// Throws DomainError on a dimension mismatch or non-finite input.
ForwardCache forward(const NetworkParams &params, const Eigen::MatrixXd &inputs);

/// Same as above, reusing the storage already held by `cache`.
void forward(const NetworkParams &params, const Eigen::MatrixXd &inputs, ForwardCache &cache);

/// Convenience for a single sample; returns the outputs of head `h`.
Eigen::VectorXd forward_one(const NetworkParams &params, std::span<const double> input, std::size_t h = 0);

/// Parameter gradients, one entry per layer (same order as NetworkParams::layers).
struct NetworkGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    static NetworkGradients zeros_like(const NetworkParams &params);
    bool all_finite() const;
    double squared_norm() const;
    void scale(double factor);
};

struct HeadGradient {
    Eigen::MatrixXd grad;  // head_dim x batch
    /// When set, `grad` is taken with respect to the head pre-activation
    /// (logits) instead of the head output, bypassing the activation Jacobian.
    bool wrt_preactivation = false;
};

/// Scratch matrices reused across backward passes of the same batch size.
struct BackwardScratch {
    std::vector<Eigen::MatrixXd> dz;  // one per layer so sizes stay stable
    Eigen::MatrixXd d_trunk;
    Eigen::MatrixXd d_prev;
};

/// Backpropagates per-head gradients of a scalar loss through a cached forward pass.
/// An empty `grad` matrix means the head does not contribute.
NetworkGradients backward(const NetworkParams &params, const ForwardCache &cache, const std::vector<HeadGradient> &head_grads);

/// Allocation-free variant once `out` and `scratch` have been sized by a previous call.
void backward(const NetworkParams &params, const ForwardCache &cache, const std::vector<HeadGradient> &head_grads,
              NetworkGradients &out, BackwardScratch &scratch);

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t t = 0;
    NetworkGradients first_moment;
    NetworkGradients second_moment;

    static AdamState for_params(const NetworkParams &params, double learning_rate);
};

/// One bias-corrected Adam update. Non-finite gradients raise NumericsError and
/// leave params and state untouched.
void adam_step(NetworkParams &params, const NetworkGradients &grads, AdamState &state);

/// Stable log(softmax(z)) per column.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd &logits);

/// FNV-1a over every parameter's bit pattern; used to check target-network syncs.
std::uint64_t params_checksum(const NetworkParams &params);

}  // namespace rlqc
