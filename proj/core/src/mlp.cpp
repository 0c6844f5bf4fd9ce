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

#include "rlqc/mlp.hpp"

#include <bit>
#include <cmath>

#include "rlqc/errors.hpp"

namespace rlqc {

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::Selu:
            return "selu";
        case Activation::Relu:
            return "relu";
        case Activation::Linear:
            return "linear";
        case Activation::Softmax:
            return "softmax";
    }
    return "?";
}

Activation parse_activation(std::string_view text) {
    for (Activation a : {Activation::Selu, Activation::Relu, Activation::Linear, Activation::Softmax}) {
        if (to_string(a) == text) {
            return a;
        }
    }
    throw ValidationError("unknown activation '" + std::string(text) + "'");
}

double selu(double x) {
    return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * (std::exp(x) - 1.0);
}

void NetworkParams::validate() const {
    if (layers.empty() || num_trunk >= layers.size()) {
        throw DomainError("network needs at least one head layer");
    }
    const Eigen::Index trunk_out = num_trunk == 0 ? layers.front().fan_in() : layers[num_trunk - 1].fan_out();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const DenseLayer &l = layers[i];
        const Eigen::Index expected_in = i == 0 ? l.fan_in() : (i < num_trunk ? layers[i - 1].fan_out() : trunk_out);
        if (l.fan_in() != expected_in || l.bias.size() != l.fan_out() || l.fan_in() < 1 || l.fan_out() < 1) {
            throw DomainError("layer " + std::to_string(i) + " dimensions do not chain");
        }
        if (i < num_trunk && l.activation == Activation::Softmax) {
            throw DomainError("softmax is only allowed on head layers");
        }
        if (!l.weights.allFinite() || !l.bias.allFinite()) {
            throw DomainError("layer " + std::to_string(i) + " has non-finite parameters");
        }
    }
}

bool NetworkParams::operator==(const NetworkParams &other) const {
    if (num_trunk != other.num_trunk || layers.size() != other.layers.size()) {
        return false;
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const DenseLayer &a = layers[i];
        const DenseLayer &b = other.layers[i];
        if (a.activation != b.activation || a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols() ||
            a.bias.size() != b.bias.size() || a.weights != b.weights || a.bias != b.bias) {
            return false;
        }
    }
    return true;
}

namespace {

DenseLayer make_layer(int fan_in, int fan_out, Activation act) {
    if (fan_in < 1 || fan_out < 1) {
        throw DomainError("layer dimensions must be positive");
    }
    DenseLayer l;
    l.weights = Eigen::MatrixXd::Zero(fan_out, fan_in);
    l.bias = Eigen::VectorXd::Zero(fan_out);
    l.activation = act;
    return l;
}

void lecun_normal(DenseLayer &l, RngStream &rng) {
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(l.fan_in()));
    // Column-major fill order; fixed so a seed always gives the same network.
    for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            l.weights(r, c) = std_dev * rng.normal();
        }
    }
}

void glorot_uniform(DenseLayer &l, RngStream &rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.fan_in() + l.fan_out()));
    for (Eigen::Index c = 0; c < l.weights.cols(); ++c) {
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
            l.weights(r, c) = limit * (2.0 * rng.uniform() - 1.0);
        }
    }
}

void activate_into(const Eigen::MatrixXd &z, Activation act, Eigen::MatrixXd &out) {
    switch (act) {
        case Activation::Selu:
            // Branch-free so Eigen vectorizes the exponential.
            out = kSeluLambda * z.array().max(0.0) + (kSeluLambda * kSeluAlpha) * (z.array().min(0.0).exp() - 1.0);
            return;
        case Activation::Relu:
            out = z.array().max(0.0);
            return;
        case Activation::Linear:
            out = z;
            return;
        case Activation::Softmax: {
            out = z.rowwise() - z.colwise().maxCoeff();
            out = out.array().exp();
            const Eigen::RowVectorXd sum = out.colwise().sum();
            out.array().rowwise() /= sum.array();
            return;
        }
    }
}

// dz = dL/dz given dy = dL/dy for y = act(z).
void activation_backward(const Eigen::MatrixXd &z, const Eigen::MatrixXd &y, const Eigen::MatrixXd &dy, Activation act,
                         Eigen::MatrixXd &dz) {
    switch (act) {
        case Activation::Selu:
            // For z <= 0, d/dz selu(z) = lambda * alpha * e^z = y + lambda * alpha.
            dz = dy.array() *
                 ((z.array() <= 0.0).cast<double>() * (y.array() + (kSeluLambda * kSeluAlpha - kSeluLambda)) + kSeluLambda);
            return;
        case Activation::Relu:
            dz = dy.array() * (z.array() > 0.0).cast<double>();
            return;
        case Activation::Linear:
            dz = dy;
            return;
        case Activation::Softmax: {
            const Eigen::RowVectorXd inner = (y.array() * dy.array()).colwise().sum();
            dz = y.array() * (dy.rowwise() - inner).array();
            return;
        }
    }
}

}  // namespace

NetworkParams init_network(const NetworkShape &shape, RngStream &rng) {
    if (shape.input_dim < 1 || shape.heads.empty()) {
        throw DomainError("network needs a positive input dimension and at least one head");
    }
    NetworkParams p;
    int prev = shape.input_dim;
    for (const LayerShape &ls : shape.trunk) {
        DenseLayer l = make_layer(prev, ls.units, ls.activation);
        lecun_normal(l, rng);
        p.layers.push_back(std::move(l));
        prev = ls.units;
    }
    p.num_trunk = p.layers.size();
    for (const LayerShape &ls : shape.heads) {
        DenseLayer l = make_layer(prev, ls.units, ls.activation);
        glorot_uniform(l, rng);
        p.layers.push_back(std::move(l));
    }
    p.validate();
    return p;
}

NetworkParams init_network(const std::vector<int> &dims, const std::vector<Activation> &activations, RngStream &rng) {
    if (dims.size() < 2 || activations.size() != dims.size() - 1) {
        throw DomainError("need at least {input, output} dims and one activation per layer");
    }
    NetworkShape shape{dims.front(), {}, {}};
    for (std::size_t i = 1; i + 1 < dims.size(); ++i) {
        shape.trunk.push_back({dims[i], activations[i - 1]});
    }
    shape.heads.push_back({dims.back(), activations.back()});
    return init_network(shape, rng);
}

ForwardCache forward(const NetworkParams &params, const Eigen::MatrixXd &inputs) {
    ForwardCache cache;
    forward(params, inputs, cache);
    return cache;
}

void forward(const NetworkParams &params, const Eigen::MatrixXd &inputs, ForwardCache &cache) {
    if (inputs.rows() != params.input_dim()) {
        throw DomainError("input has " + std::to_string(inputs.rows()) + " rows, network expects " +
                          std::to_string(params.input_dim()));
    }
    if (!inputs.allFinite()) {
        throw DomainError("non-finite network input");
    }
    cache.trunk.resize(params.num_trunk + 1);
    cache.trunk_pre.resize(params.num_trunk);
    cache.heads.resize(params.num_heads());
    cache.head_pre.resize(params.num_heads());
    cache.trunk[0] = inputs;
    for (std::size_t i = 0; i < params.num_trunk; ++i) {
        const DenseLayer &l = params.layers[i];
        Eigen::MatrixXd &z = cache.trunk_pre[i];
        z.resize(l.fan_out(), inputs.cols());
        z.noalias() = l.weights * cache.trunk[i];
        z.colwise() += l.bias;
        activate_into(z, l.activation, cache.trunk[i + 1]);
    }
    for (std::size_t h = 0; h < params.num_heads(); ++h) {
        const DenseLayer &l = params.head(h);
        Eigen::MatrixXd &z = cache.head_pre[h];
        z.resize(l.fan_out(), inputs.cols());
        z.noalias() = l.weights * cache.trunk.back();
        z.colwise() += l.bias;
        activate_into(z, l.activation, cache.heads[h]);
    }
}

Eigen::VectorXd forward_one(const NetworkParams &params, std::span<const double> input, std::size_t h) {
    const Eigen::Map<const Eigen::MatrixXd> x(input.data(), static_cast<Eigen::Index>(input.size()), 1);
    return forward(params, x).heads.at(h).col(0);
}

NetworkGradients NetworkGradients::zeros_like(const NetworkParams &params) {
    NetworkGradients g;
    for (const DenseLayer &l : params.layers) {
        g.weights.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
        g.biases.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    }
    return g;
}

bool NetworkGradients::all_finite() const {
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!weights[i].allFinite() || !biases[i].allFinite()) {
            return false;
        }
    }
    return true;
}

double NetworkGradients::squared_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        s += weights[i].squaredNorm() + biases[i].squaredNorm();
    }
    return s;
}

void NetworkGradients::scale(double factor) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] *= factor;
        biases[i] *= factor;
    }
}

NetworkGradients backward(const NetworkParams &params, const ForwardCache &cache, const std::vector<HeadGradient> &head_grads) {
    NetworkGradients g;
    BackwardScratch scratch;
    backward(params, cache, head_grads, g, scratch);
    return g;
}

void backward(const NetworkParams &params, const ForwardCache &cache, const std::vector<HeadGradient> &head_grads,
              NetworkGradients &g, BackwardScratch &scratch) {
    if (head_grads.size() != params.num_heads() || cache.heads.size() != params.num_heads() ||
        cache.trunk.size() != params.num_trunk + 1) {
        throw DomainError("backward: cache or head gradients do not match the network");
    }
    if (g.weights.size() != params.layers.size()) {
        g = NetworkGradients::zeros_like(params);
    }
    const Eigen::Index batch = cache.trunk.front().cols();
    const Eigen::MatrixXd &trunk_out = cache.trunk.back();
    scratch.dz.resize(params.layers.size());
    scratch.d_trunk.setZero(trunk_out.rows(), batch);
    bool any = false;
    for (std::size_t h = 0; h < params.num_heads(); ++h) {
        const HeadGradient &hg = head_grads[h];
        const std::size_t li = params.num_trunk + h;
        if (hg.grad.size() == 0) {
            g.weights[li].setZero(params.head(h).fan_out(), params.head(h).fan_in());
            g.biases[li].setZero(params.head(h).fan_out());
            continue;
        }
        const DenseLayer &l = params.head(h);
        if (hg.grad.rows() != l.fan_out() || hg.grad.cols() != batch) {
            throw DomainError("backward: head " + std::to_string(h) + " gradient has the wrong shape");
        }
        const Eigen::MatrixXd *dz = &hg.grad;
        if (!hg.wrt_preactivation) {
            activation_backward(cache.head_pre[h], cache.heads[h], hg.grad, l.activation, scratch.dz[li]);
            dz = &scratch.dz[li];
        }
        g.weights[li].noalias() = *dz * trunk_out.transpose();
        g.biases[li] = dz->rowwise().sum();
        scratch.d_trunk.noalias() += l.weights.transpose() * *dz;
        any = true;
    }
    for (std::size_t i = params.num_trunk; i-- > 0;) {
        const DenseLayer &l = params.layers[i];
        if (!any) {
            g.weights[i].setZero(l.fan_out(), l.fan_in());
            g.biases[i].setZero(l.fan_out());
            continue;
        }
        Eigen::MatrixXd &dz = scratch.dz[i];
        activation_backward(cache.trunk_pre[i], cache.trunk[i + 1], scratch.d_trunk, l.activation, dz);
        g.weights[i].noalias() = dz * cache.trunk[i].transpose();
        g.biases[i] = dz.rowwise().sum();
        if (i > 0) {
            scratch.d_prev.noalias() = l.weights.transpose() * dz;
            scratch.d_trunk.swap(scratch.d_prev);
        }
    }
}

AdamState AdamState::for_params(const NetworkParams &params, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.first_moment = NetworkGradients::zeros_like(params);
    s.second_moment = NetworkGradients::zeros_like(params);
    return s;
}

void adam_step(NetworkParams &params, const NetworkGradients &grads, AdamState &state) {
    if (grads.weights.size() != params.layers.size() || state.first_moment.weights.size() != params.layers.size()) {
        throw DomainError("adam_step: gradient/state layout does not match the network");
    }
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const DenseLayer &l = params.layers[i];
        if (grads.weights[i].rows() != l.weights.rows() || grads.weights[i].cols() != l.weights.cols() ||
            grads.biases[i].size() != l.bias.size()) {
            throw DomainError("adam_step: gradient shape mismatch at layer " + std::to_string(i));
        }
    }
    if (!grads.all_finite()) {
        throw NumericsError("adam_step: non-finite gradient, update skipped");
    }
    state.t += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    const double lr = state.learning_rate;
    const double eps = state.epsilon;
    auto update = [&](auto &param, const auto &grad, auto &m, auto &v) {
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        DenseLayer &l = params.layers[i];
        update(l.weights, grads.weights[i], state.first_moment.weights[i], state.second_moment.weights[i]);
        update(l.bias, grads.biases[i], state.first_moment.biases[i], state.second_moment.biases[i]);
    }
}

Eigen::MatrixXd log_softmax(const Eigen::MatrixXd &logits) {
    const Eigen::RowVectorXd max = logits.colwise().maxCoeff();
    const Eigen::MatrixXd shifted = logits.rowwise() - max;
    const Eigen::RowVectorXd lse = shifted.array().exp().colwise().sum().log().matrix();
    return shifted.rowwise() - lse;
}

std::uint64_t params_checksum(const NetworkParams &params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double x) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    };
    for (const DenseLayer &l : params.layers) {
        for (Eigen::Index i = 0; i < l.weights.size(); ++i) {
            mix(l.weights.data()[i]);
        }
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) {
            mix(l.bias.data()[i]);
        }
    }
    return h;
}

}  // namespace rlqc
