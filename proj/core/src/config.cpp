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

#include "rlqc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <functional>
#include <memory>
#include <sstream>

#include "rlqc/errors.hpp"
#include "rlqc/gateset.hpp"
#include "rlqc/io.hpp"

namespace rlqc {

namespace {

[[noreturn]] void bad_value(const std::string &key, const std::string &value, const std::string &expected) {
    throw ValidationError(key + ": invalid value '" + value + "' (expected " + expected + ")");
}

template <class T>
T to_number(const std::string &key, const std::string &value) {
    T out{};
    const char *first = value.data();
    const char *last = value.data() + value.size();
    const auto r = std::from_chars(first, last, out);
    if (r.ec != std::errc() || r.ptr != last || value.empty()) {
        bad_value(key, value, std::is_floating_point_v<T> ? "a number" : "an integer");
    }
    return out;
}

bool to_bool(const std::string &key, const std::string &value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    bad_value(key, value, "true or false");
}

std::string from_bool(bool v) {
    return v ? "true" : "false";
}

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig &)> get;
    std::function<void(RunConfig &, const std::string &key, const std::string &value)> set;
};

#define RLQC_NUM_FIELD(sec, name, member, type)                                                  \
    Field {                                                                                      \
        sec, #name, [](const RunConfig &c) { return num_text(c.member); },                       \
            [](RunConfig &c, const std::string &k, const std::string &v) { c.member = to_number<type>(k, v); } \
    }

template <class T>
std::string num_text(T v) {
    if constexpr (std::is_floating_point_v<T>) {
        return format_double(v);
    } else {
        return std::to_string(v);
    }
}

const std::vector<Field> &fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back({"run", "task", [](const RunConfig &c) { return c.task; },
                     [](RunConfig &c, const std::string &, const std::string &v) { c.task = v; }});
        f.push_back({"run", "agent", [](const RunConfig &c) { return std::string(to_string(c.agent)); },
                     [](RunConfig &c, const std::string &k, const std::string &v) {
                         try {
                             c.agent = parse_agent_kind(v);
                         } catch (const NameError &) {
                             bad_value(k, v, "dqn or ppo");
                         }
                     }});
        f.push_back(RLQC_NUM_FIELD("run", seed, seed, std::uint64_t));
        f.push_back(RLQC_NUM_FIELD("run", episodes, episodes, std::int64_t));
        f.push_back({"run", "output_dir", [](const RunConfig &c) { return c.output_dir; },
                     [](RunConfig &c, const std::string &, const std::string &v) { c.output_dir = v; }});
        f.push_back(RLQC_NUM_FIELD("run", checkpoint_every, checkpoint_every, std::int64_t));
        f.push_back(RLQC_NUM_FIELD("run", threads, threads, int));

        f.push_back({"env", "gateset", [](const RunConfig &c) { return c.gateset; },
                     [](RunConfig &c, const std::string &, const std::string &v) { c.gateset = v; }});
        f.push_back(RLQC_NUM_FIELD("env", tolerance_agf, tolerance_agf, double));
        f.push_back(RLQC_NUM_FIELD("env", max_steps, max_steps, int));
        f.push_back({"env", "reward", [](const RunConfig &c) { return std::string(to_string(c.reward)); },
                     [](RunConfig &c, const std::string &k, const std::string &v) {
                         try {
                             c.reward = parse_reward_kind(v);
                         } catch (const Error &) {
                             bad_value(k, v, "dense or sparse");
                         }
                     }});
        f.push_back({"env", "targets", [](const RunConfig &c) { return c.targets; },
                     [](RunConfig &c, const std::string &k, const std::string &v) {
                         try {
                             TargetSpec::parse(v);
                         } catch (const Error &e) {
                             bad_value(k, v, "haar, fixed87, product:<max>, product:<min>:<max> or 8 floats");
                         }
                         c.targets = v;
                     }});

        f.push_back({"net", "hidden_activation",
                     [](const RunConfig &c) { return std::string(to_string(c.hidden_activation)); },
                     [](RunConfig &c, const std::string &k, const std::string &v) {
                         if (v == "selu") {
                             c.hidden_activation = Activation::Selu;
                         } else if (v == "relu") {
                             c.hidden_activation = Activation::Relu;
                         } else {
                             bad_value(k, v, "selu or relu");
                         }
                     }});

        f.push_back(RLQC_NUM_FIELD("dqn", learning_rate, dqn.learning_rate, double));
        f.push_back(RLQC_NUM_FIELD("dqn", batch_size, dqn.batch_size, int));
        f.push_back(RLQC_NUM_FIELD("dqn", memory_size, dqn.memory_size, int));
        f.push_back(RLQC_NUM_FIELD("dqn", epsilon_decay, dqn.epsilon_decay, double));
        f.push_back(RLQC_NUM_FIELD("dqn", epsilon_min, dqn.epsilon_min, double));
        f.push_back(RLQC_NUM_FIELD("dqn", gamma, dqn.gamma, double));
        f.push_back(RLQC_NUM_FIELD("dqn", target_sync, dqn.target_sync, int));
        f.push_back({"dqn", "her", [](const RunConfig &c) { return from_bool(c.dqn.her); },
                     [](RunConfig &c, const std::string &k, const std::string &v) { c.dqn.her = to_bool(k, v); }});
        f.push_back(RLQC_NUM_FIELD("dqn", her_k, dqn.her_k, double));
        f.push_back(RLQC_NUM_FIELD("dqn", updates_per_episode, dqn.updates_per_episode, int));
        f.push_back({"dqn", "clip_targets", [](const RunConfig &c) { return from_bool(c.dqn.clip_targets); },
                     [](RunConfig &c, const std::string &k, const std::string &v) {
                         c.dqn.clip_targets = to_bool(k, v);
                     }});
        f.push_back({"dqn", "fixed_epsilon",
                     [](const RunConfig &c) {
                         return c.dqn.fixed_epsilon ? format_double(*c.dqn.fixed_epsilon) : std::string("none");
                     },
                     [](RunConfig &c, const std::string &k, const std::string &v) {
                         if (v == "none") {
                             c.dqn.fixed_epsilon.reset();
                         } else {
                             c.dqn.fixed_epsilon = to_number<double>(k, v);
                         }
                     }});

        f.push_back(RLQC_NUM_FIELD("ppo", n_workers, ppo.n_workers, int));
        f.push_back(RLQC_NUM_FIELD("ppo", rollout_len, ppo.rollout_len, int));
        f.push_back(RLQC_NUM_FIELD("ppo", clip_range, ppo.clip_range, double));
        f.push_back(RLQC_NUM_FIELD("ppo", gae_lambda, ppo.gae_lambda, double));
        f.push_back(RLQC_NUM_FIELD("ppo", gamma, ppo.gamma, double));
        f.push_back(RLQC_NUM_FIELD("ppo", epochs, ppo.epochs, int));
        f.push_back(RLQC_NUM_FIELD("ppo", minibatch_size, ppo.minibatch_size, int));
        f.push_back(RLQC_NUM_FIELD("ppo", learning_rate, ppo.learning_rate, double));
        f.push_back(RLQC_NUM_FIELD("ppo", entropy_coef, ppo.entropy_coef, double));
        f.push_back(RLQC_NUM_FIELD("ppo", value_coef, ppo.value_coef, double));
        f.push_back(RLQC_NUM_FIELD("ppo", max_grad_norm, ppo.max_grad_norm, double));
        return f;
    }();
    return table;
}

#undef RLQC_NUM_FIELD

const Field *find_field(const std::string &section, const std::string &key) {
    for (const Field &f : fields()) {
        if (f.section == section && f.key == key) {
            return &f;
        }
    }
    return nullptr;
}

}  // namespace

RunConfig RunConfig::preset(std::string_view task) {
    RunConfig c;
    if (task == "hrc") {
        return c;
    }
    if (task == "fixed-target") {
        c.task = "fixed-target";
        c.agent = AgentKind::Dqn;
        c.episodes = 30000;
        c.output_dir = "runs/fixed-target";
        c.checkpoint_every = 5000;
        c.gateset = "rot-pi-128";
        c.reward = RewardKind::Dense;
        c.targets = "fixed87";
        c.dqn = DqnConfig::fixed_target_defaults();
        return c;
    }
    if (task == "rotations") {
        c.task = "rotations";
        c.agent = AgentKind::Ppo;
        c.episodes = 1000000;
        c.output_dir = "runs/rotations";
        c.checkpoint_every = 50000;
        c.gateset = "rot-pi-128";
        c.max_steps = 300;
        c.reward = RewardKind::Dense;
        c.targets = "haar";
        return c;
    }
    std::string names;
    for (const auto &n : preset_names()) {
        names += (names.empty() ? "" : ", ") + n;
    }
    throw NameError("unknown task '" + std::string(task) + "' (available: " + names + ")");
}

std::vector<std::string> RunConfig::preset_names() {
    return {"fixed-target", "hrc", "rotations"};
}

RunConfig RunConfig::parse(std::string_view text) {
    boost::property_tree::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ParseError(e.message(), static_cast<int>(e.line()));
    }
    RunConfig c;
    if (auto task = tree.get_optional<std::string>("run.task")) {
        try {
            c = preset(*task);
        } catch (const NameError &e) {
            throw ValidationError(std::string("run.task: ") + e.what());
        }
    }
    for (const auto &[section, body] : tree) {
        if (body.empty()) {
            throw ValidationError("key '" + section + "' must be inside a section");
        }
        for (const auto &[key, value] : body) {
            if (!value.empty()) {
                throw ValidationError("unexpected nesting under " + section + "." + key);
            }
            c.set(section + "." + key, value.data());
        }
    }
    c.validate();
    return c;
}

void RunConfig::set(const std::string &dotted_key, const std::string &value) {
    const auto dot = dotted_key.find('.');
    const Field *f = dot == std::string::npos ? nullptr : find_field(dotted_key.substr(0, dot), dotted_key.substr(dot + 1));
    if (f == nullptr) {
        throw ValidationError("unknown config key '" + dotted_key + "'");
    }
    f->set(*this, dotted_key, value);
}

std::string RunConfig::to_ini() const {
    std::string out;
    std::string section;
    for (const Field &f : fields()) {
        if (f.section != section) {
            out += (section.empty() ? "" : "\n") + std::string("[") + f.section + "]\n";
            section = f.section;
        }
        out += f.key + " = " + f.get(*this) + "\n";
    }
    return out;
}

void RunConfig::validate() const {
    preset(task);  // task must name a preset
    if (episodes < 1) {
        throw ValidationError("run.episodes must be positive");
    }
    if (checkpoint_every < 0) {
        throw ValidationError("run.checkpoint_every must be >= 0");
    }
    if (threads < 1) {
        throw ValidationError("run.threads must be positive");
    }
    if (output_dir.empty()) {
        throw ValidationError("run.output_dir must not be empty");
    }
    if (!(tolerance_agf > 1.0 / 3.0 && tolerance_agf < 1.0)) {
        throw ValidationError("env.tolerance_agf must lie in (1/3, 1)");
    }
    if (max_steps < 1 || max_steps > 10000) {
        throw ValidationError("env.max_steps must lie in [1, 10000]");
    }
    TargetSpec::parse(targets);
    if (agent == AgentKind::Dqn) {
        resolved_dqn().validate();
    } else {
        resolved_ppo().validate();
    }
}

EnvConfig RunConfig::env_config() const {
    EnvConfig env{std::make_shared<const GateSet>(resolve_gateset(gateset)), tolerance_agf, max_steps, reward};
    env.validate();
    return env;
}

TargetSpec RunConfig::target_spec() const {
    return TargetSpec::parse(targets);
}

DqnConfig RunConfig::resolved_dqn() const {
    DqnConfig d = dqn;
    d.hidden_activation = hidden_activation;
    return d;
}

PpoConfig RunConfig::resolved_ppo() const {
    PpoConfig p = ppo;
    p.hidden_activation = hidden_activation;
    p.threads = threads;
    return p;
}

}  // namespace rlqc
