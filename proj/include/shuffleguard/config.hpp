/*
 * SPDX-FileCopyrightText: Copyright 2026 The shuffleguard authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "shuffleguard/errors.hpp"
#include "shuffleguard/float32.hpp"
#include "shuffleguard/leakage.hpp"
#include "shuffleguard/trace_io.hpp"

namespace shuffleguard {

struct AttackConfig {
    double grid_lo = -2.0;
    double grid_hi = 2.0;
    double grid_step = 0.01;
    std::optional<std::uint32_t> q_s;
    std::optional<std::uint32_t> q_e;
    std::uint32_t neuron = 0;
    std::vector<Component> components{kAllComponents.begin(), kAllComponents.end()};
    friend bool operator==(const AttackConfig &, const AttackConfig &) = default;
};

/// Everything one experiment run needs; every CLI flag has a field here.
struct ExperimentConfig {
    std::string model_path = "model.json";
    LeakageConfig leakage;
    Campaign campaign;
    AttackConfig attack;
    std::uint64_t model_seed = 1;
    std::optional<std::uint64_t> secrets_seed;
    std::string output_dir = ".";
    friend bool operator==(const ExperimentConfig &, const ExperimentConfig &) = default;
};

inline Component component_from_string(const std::string &s) {
    for (auto c : kAllComponents)
        if (component_name(c) == s)
            return c;
    throw DomainError("unknown weight component '" + s + "'");
}

inline void to_json(nlohmann::json &j, const AttackConfig &a) {
    j = nlohmann::json{{"grid", {a.grid_lo, a.grid_hi, a.grid_step}}, {"neuron", a.neuron}};
    j["q_s"] = a.q_s ? nlohmann::json(*a.q_s) : nlohmann::json(nullptr);
    j["q_e"] = a.q_e ? nlohmann::json(*a.q_e) : nlohmann::json(nullptr);
    nlohmann::json comps = nlohmann::json::array();
    for (auto c : a.components)
        comps.push_back(std::string(component_name(c)));
    j["components"] = comps;
}

inline void from_json(const nlohmann::json &j, AttackConfig &a) {
    a = AttackConfig{};
    if (j.contains("grid")) {
        const auto &g = j.at("grid");
        a.grid_lo = g.at(0).get<double>();
        a.grid_hi = g.at(1).get<double>();
        a.grid_step = g.at(2).get<double>();
    }
    a.neuron = j.value("neuron", a.neuron);
    if (j.contains("q_s") && !j.at("q_s").is_null())
        a.q_s = j.at("q_s").get<std::uint32_t>();
    if (j.contains("q_e") && !j.at("q_e").is_null())
        a.q_e = j.at("q_e").get<std::uint32_t>();
    if (j.contains("components")) {
        a.components.clear();
        for (const auto &c : j.at("components"))
            a.components.push_back(component_from_string(c.get<std::string>()));
    }
}

inline void to_json(nlohmann::json &j, const ExperimentConfig &c) {
    j = nlohmann::json{{"model", c.model_path},   {"leakage", c.leakage},
                       {"campaign", c.campaign},  {"attack", c.attack},
                       {"model_seed", c.model_seed}, {"output_dir", c.output_dir}};
    j["secrets_seed"] = c.secrets_seed ? nlohmann::json(*c.secrets_seed) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json &j, ExperimentConfig &c) {
    c = ExperimentConfig{};
    c.model_path = j.value("model", c.model_path);
    if (j.contains("leakage"))
        j.at("leakage").get_to(c.leakage);
    if (j.contains("campaign"))
        j.at("campaign").get_to(c.campaign);
    if (j.contains("attack"))
        j.at("attack").get_to(c.attack);
    c.model_seed = j.value("model_seed", c.model_seed);
    if (j.contains("secrets_seed") && !j.at("secrets_seed").is_null())
        c.secrets_seed = j.at("secrets_seed").get<std::uint64_t>();
    c.output_dir = j.value("output_dir", c.output_dir);
}

inline ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is)
        throw std::ios_base::failure("cannot open config " + path.string());
    try {
        return nlohmann::json::parse(is).get<ExperimentConfig>();
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("bad config " + path.string() + ": " + e.what());
    }
}

inline void save_config(const ExperimentConfig &c, const std::filesystem::path &path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw std::ios_base::failure("cannot write config " + path.string());
    os << nlohmann::json(c).dump(2) << '\n';
}

} // namespace shuffleguard
