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

#include "rlqc/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <map>
#include <sstream>
#include <vector>

#include <zlib.h>

#include "rlqc/errors.hpp"
#include "rlqc/io.hpp"

namespace rlqc {

namespace {

constexpr std::string_view kMagic = "rlqc-checkpoint";

std::uint32_t crc32_of(std::string_view bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in chunks.
    std::size_t off = 0;
    while (off < bytes.size()) {
        const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
        crc = crc32(crc, reinterpret_cast<const Bytef *>(bytes.data() + off), static_cast<uInt>(n));
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

void put_double(std::string &out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.append(buf, 8);
}

double get_double(const char *p) {
    std::uint64_t bits;
    std::memcpy(&bits, p, 8);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return std::bit_cast<double>(bits);
}

void put_arrays(std::string &out, const std::vector<Eigen::MatrixXd> &w, const std::vector<Eigen::VectorXd> &b) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (Eigen::Index k = 0; k < w[i].size(); ++k) {
            put_double(out, w[i].data()[k]);
        }
        for (Eigen::Index k = 0; k < b[i].size(); ++k) {
            put_double(out, b[i].data()[k]);
        }
    }
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

[[noreturn]] void corrupt(const std::string &what) {
    throw IntegrityError("corrupt checkpoint: " + what);
}

template <class T>
T parse_number(const std::string &text, const std::string &key) {
    T value{};
    int base = 10;
    const char *first = text.data();
    const char *last = text.data() + text.size();
    std::from_chars_result r;
    if constexpr (std::is_floating_point_v<T>) {
        r = std::from_chars(first, last, value);
    } else {
        if (key.ends_with("crc32")) {
            base = 16;
        }
        r = std::from_chars(first, last, value, base);
    }
    if (r.ec != std::errc() || r.ptr != last) {
        corrupt("bad value for '" + key + "'");
    }
    return value;
}

}  // namespace

std::uint32_t gateset_crc(const GateSet &gateset) {
    return crc32_of(serialize_gateset(gateset));
}

void Checkpoint::check_gateset(const GateSet &gateset) const {
    policy().check_actions(gateset.size());
    if (gateset_crc != rlqc::gateset_crc(gateset)) {
        throw ValidationError("checkpoint was trained on gate set '" + gateset_name + "' (crc " + hex32(gateset_crc) +
                              "), not '" + gateset.name() + "' (crc " + hex32(rlqc::gateset_crc(gateset)) + ")");
    }
}

Checkpoint make_checkpoint(AgentKind agent, const EnvConfig &env, NetworkParams params, std::optional<AdamState> adam,
                           std::int64_t episodes, std::uint64_t seed) {
    Checkpoint c;
    c.created_at = utc_timestamp();
    c.agent = agent;
    c.gateset_name = env.gateset->name();
    c.gateset_crc = gateset_crc(*env.gateset);
    c.tolerance_agf = env.tolerance_agf;
    c.max_steps = env.max_steps;
    c.reward = env.reward;
    c.params = std::move(params);
    c.adam = std::move(adam);
    c.episodes = episodes;
    c.seed = seed;
    return c;
}

std::string describe_checkpoint(const Checkpoint &c) {
    std::ostringstream h;
    h << "format_version " << c.format_version << '\n';
    h << "created_at " << c.created_at << '\n';
    h << "agent " << to_string(c.agent) << '\n';
    h << "gateset " << c.gateset_name << '\n';
    h << "gateset_crc32 " << hex32(c.gateset_crc) << '\n';
    h << "tolerance_agf " << format_double(c.tolerance_agf) << '\n';
    h << "max_steps " << c.max_steps << '\n';
    h << "reward " << to_string(c.reward) << '\n';
    h << "episodes " << c.episodes << '\n';
    h << "seed " << c.seed << '\n';
    h << "num_trunk " << c.params.num_trunk << '\n';
    for (std::size_t i = 0; i < c.params.layers.size(); ++i) {
        const DenseLayer &l = c.params.layers[i];
        h << "layer " << l.fan_in() << ' ' << l.fan_out() << ' ' << to_string(l.activation) << '\n';
    }
    if (c.adam) {
        h << "adam " << format_double(c.adam->learning_rate) << ' ' << format_double(c.adam->beta1) << ' '
          << format_double(c.adam->beta2) << ' ' << format_double(c.adam->epsilon) << ' ' << c.adam->t << '\n';
    } else {
        h << "adam none\n";
    }
    return h.str();
}

std::string encode_checkpoint(const Checkpoint &c) {
    c.params.validate();
    std::string payload;
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    for (const DenseLayer &l : c.params.layers) {
        w.push_back(l.weights);
        b.push_back(l.bias);
    }
    put_arrays(payload, w, b);
    if (c.adam) {
        put_arrays(payload, c.adam->first_moment.weights, c.adam->first_moment.biases);
        put_arrays(payload, c.adam->second_moment.weights, c.adam->second_moment.biases);
    }
    std::string out = std::string(kMagic) + ' ' + std::to_string(c.format_version) + '\n';
    out += describe_checkpoint(c);
    out += "payload_bytes " + std::to_string(payload.size()) + '\n';
    out += "payload_crc32 " + hex32(crc32_of(payload)) + '\n';
    out += "end\n";
    out += payload;
    return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        const std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) {
            corrupt("header is truncated");
        }
        std::string line(bytes.substr(pos, nl - pos));
        pos = nl + 1;
        return line;
    };
    auto split = [](const std::string &line) {
        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos) {
            return std::pair<std::string, std::string>{line, ""};
        }
        return std::pair<std::string, std::string>{line.substr(0, sp), line.substr(sp + 1)};
    };

    const auto [magic, version_text] = split(next_line());
    if (magic != kMagic) {
        corrupt("not an rlqc checkpoint");
    }
    Checkpoint c;
    c.format_version = parse_number<int>(version_text, "version");
    if (c.format_version != kCheckpointVersion) {
        throw ValidationError("checkpoint format version " + std::to_string(c.format_version) +
                              " is not supported by this build (reads version " + std::to_string(kCheckpointVersion) +
                              "); load it with the release that wrote it and re-save, or retrain");
    }

    std::map<std::string, std::string> fields;
    struct LayerSpec {
        int in, out;
        Activation act;
    };
    std::vector<LayerSpec> layers;
    std::string adam_line;
    for (;;) {
        const std::string line = next_line();
        if (line == "end") {
            break;
        }
        auto [key, value] = split(line);
        if (key == "layer") {
            std::istringstream ls(value);
            int in = 0, out = 0;
            std::string act;
            if (!(ls >> in >> out >> act) || in < 1 || out < 1) {
                corrupt("bad layer line");
            }
            try {
                layers.push_back({in, out, parse_activation(act)});
            } catch (const Error &) {
                corrupt("unknown activation '" + act + "'");
            }
        } else if (key == "adam") {
            adam_line = value;
        } else {
            fields[key] = value;
        }
    }
    auto field = [&](const std::string &key) -> const std::string & {
        auto it = fields.find(key);
        if (it == fields.end()) {
            corrupt("missing '" + key + "'");
        }
        return it->second;
    };

    c.created_at = field("created_at");
    try {
        c.agent = parse_agent_kind(field("agent"));
        c.reward = parse_reward_kind(field("reward"));
    } catch (const NameError &e) {
        corrupt(e.what());
    } catch (const ParseError &e) {
        corrupt(e.what());
    }
    c.gateset_name = field("gateset");
    c.gateset_crc = parse_number<std::uint32_t>(field("gateset_crc32"), "gateset_crc32");
    c.tolerance_agf = parse_number<double>(field("tolerance_agf"), "tolerance_agf");
    c.max_steps = parse_number<int>(field("max_steps"), "max_steps");
    c.episodes = parse_number<std::int64_t>(field("episodes"), "episodes");
    c.seed = parse_number<std::uint64_t>(field("seed"), "seed");
    const std::size_t num_trunk = parse_number<std::size_t>(field("num_trunk"), "num_trunk");
    const std::size_t payload_bytes = parse_number<std::size_t>(field("payload_bytes"), "payload_bytes");
    const std::uint32_t payload_crc = parse_number<std::uint32_t>(field("payload_crc32"), "payload_crc32");
    if (layers.empty() || num_trunk >= layers.size()) {
        corrupt("layer table is inconsistent");
    }

    const std::string_view payload = bytes.substr(pos);
    if (payload.size() < payload_bytes) {
        corrupt("payload is truncated (" + std::to_string(payload.size()) + " of " + std::to_string(payload_bytes) +
                " bytes)");
    }
    if (payload.size() > payload_bytes) {
        corrupt("trailing bytes after payload");
    }
    if (crc32_of(payload) != payload_crc) {
        corrupt("payload checksum mismatch");
    }

    std::size_t needed = 0;
    for (const LayerSpec &l : layers) {
        needed += static_cast<std::size_t>(l.out) * (static_cast<std::size_t>(l.in) + 1);
    }
    const bool has_adam = adam_line != "none";
    if (payload_bytes != needed * 8 * (has_adam ? 3 : 1)) {
        corrupt("payload size does not match the layer table");
    }

    const char *p = payload.data();
    auto read_arrays = [&](std::vector<Eigen::MatrixXd> &w, std::vector<Eigen::VectorXd> &b) {
        w.clear();
        b.clear();
        for (const LayerSpec &l : layers) {
            Eigen::MatrixXd m(l.out, l.in);
            for (Eigen::Index k = 0; k < m.size(); ++k, p += 8) {
                m.data()[k] = get_double(p);
            }
            Eigen::VectorXd v(l.out);
            for (Eigen::Index k = 0; k < v.size(); ++k, p += 8) {
                v.data()[k] = get_double(p);
            }
            w.push_back(std::move(m));
            b.push_back(std::move(v));
        }
    };
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    read_arrays(w, b);
    c.params.num_trunk = num_trunk;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        c.params.layers.push_back({std::move(w[i]), std::move(b[i]), layers[i].act});
    }
    try {
        c.params.validate();
    } catch (const DomainError &e) {
        corrupt(e.what());
    }
    if (has_adam) {
        std::istringstream as(adam_line);
        AdamState a;
        if (!(as >> a.learning_rate >> a.beta1 >> a.beta2 >> a.epsilon >> a.t)) {
            corrupt("bad adam line");
        }
        read_arrays(a.first_moment.weights, a.first_moment.biases);
        read_arrays(a.second_moment.weights, a.second_moment.biases);
        c.adam = std::move(a);
    }
    return c;
}

void save_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path) {
    write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
    return decode_checkpoint(read_file(path));
}

}  // namespace rlqc
