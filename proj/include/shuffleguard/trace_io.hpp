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

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "shuffleguard/errors.hpp"
#include "shuffleguard/leakage.hpp"

namespace shuffleguard {

inline void to_json(nlohmann::json &j, const LeakageConfig &c) {
    j = nlohmann::json{{"samples_per_mul", c.samples_per_mul},
                       {"alpha", c.alpha},
                       {"sigma", c.sigma},
                       {"div_leak_mode", to_string(c.div_leak_mode)},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json &j, LeakageConfig &c) {
    c = LeakageConfig{};
    c.samples_per_mul = j.value("samples_per_mul", c.samples_per_mul);
    c.alpha = j.value("alpha", c.alpha);
    c.sigma = j.value("sigma", c.sigma);
    c.div_leak_mode = div_leak_mode_from_string(j.value("div_leak_mode", std::string("bit_serial")));
    c.seed = j.value("seed", c.seed);
}

inline void to_json(nlohmann::json &j, const FixedPolicy &p) {
    if (p.kind == FixedPolicy::Kind::constant)
        j = nlohmann::json{{"kind", "constant"}, {"value", p.value}};
    else
        j = nlohmann::json{{"kind", "random_fixed"}, {"seed", p.seed}};
}

inline void from_json(const nlohmann::json &j, FixedPolicy &p) {
    const auto kind = j.value("kind", std::string("constant"));
    if (kind == "constant")
        p = FixedPolicy::constant(j.value("value", 0.5f));
    else if (kind == "random_fixed")
        p = FixedPolicy::random_fixed(j.value("seed", std::uint64_t{0}));
    else
        throw FormatError("unknown fixed-input policy '" + kind + "'");
}

inline void to_json(nlohmann::json &j, const Campaign &c) {
    j = nlohmann::json{{"m_l", c.m_l},
                       {"fixed", c.fixed},
                       {"varying_index", c.varying_index},
                       {"range", {c.lo, c.hi}},
                       {"protection", to_string(c.protection)},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json &j, Campaign &c) {
    c = Campaign{};
    c.m_l = j.value("m_l", c.m_l);
    if (j.contains("fixed"))
        j.at("fixed").get_to(c.fixed);
    c.varying_index = j.value("varying_index", c.varying_index);
    if (j.contains("range")) {
        c.lo = j.at("range").at(0).get<double>();
        c.hi = j.at("range").at(1).get<double>();
    }
    c.protection = protection_from_string(j.value("protection", std::string("none")));
    c.seed = j.value("seed", c.seed);
}

namespace detail {

inline constexpr std::array<char, 4> kTraceMagic{'S', 'G', 'T', 'R'};
inline constexpr std::uint16_t kTraceVersion = 1;

class LeWriter {
  public:
    explicit LeWriter(std::ostream &os) : os_(os) {}
    template <class T> void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::array<char, sizeof(T)> b;
        std::memcpy(b.data(), &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(b.begin(), b.end());
        os_.write(b.data(), b.size());
    }

  private:
    std::ostream &os_;
};

class LeReader {
  public:
    explicit LeReader(std::istream &is) : is_(is) {}
    template <class T> T get() {
        std::array<char, sizeof(T)> b;
        if (!is_.read(b.data(), b.size()))
            throw FormatError("trace file truncated");
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(b.begin(), b.end());
        T v;
        std::memcpy(&v, b.data(), sizeof(T));
        return v;
    }

  private:
    std::istream &is_;
};

} // namespace detail

inline std::filesystem::path sidecar_path(const std::filesystem::path &trace_file) {
    auto p = trace_file;
    p += ".json";
    return p;
}

/// Writes the binary container and its JSON sidecar. Ground-truth
/// permutations go into the sidecar only when requested.
inline void write_trace_set(const TraceSet &set, const std::filesystem::path &path,
                            bool with_ground_truth = false) {
    if (!set.layout)
        throw LayoutError("write_trace_set: trace set has no layout");
    const Layout &lay = *set.layout;
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw std::ios_base::failure("cannot open " + path.string() + " for writing");
        detail::LeWriter w(os);
        os.write(detail::kTraceMagic.data(), 4);
        w.put<std::uint16_t>(detail::kTraceVersion);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(set.traces.size()));
        w.put<std::uint32_t>(lay.total_samples);

        w.put<std::uint8_t>(static_cast<std::uint8_t>(lay.protection));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(lay.div_leak_mode));
        w.put<std::uint8_t>(lay.natural_order ? 1 : 0);
        w.put<std::uint8_t>(0);
        w.put<std::uint32_t>(lay.samples_per_mul);
        w.put<std::uint32_t>(lay.leak_offset);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(lay.layer_sizes.size()));
        for (auto n : lay.layer_sizes)
            w.put<std::uint32_t>(n);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(lay.steps.size()));
        for (const auto &s : lay.steps) {
            w.put<std::uint32_t>(s.layer);
            w.put<std::uint32_t>(s.i);
            w.put<std::uint32_t>(s.start);
            w.put<std::uint32_t>(s.end);
            w.put<std::uint32_t>(s.remainder_bits);
            w.put<std::uint32_t>(s.masked ? 1 : 0);
        }
        w.put<std::uint32_t>(static_cast<std::uint32_t>(lay.muls.size()));
        for (const auto &m : lay.muls) {
            w.put<std::uint32_t>(m.layer);
            w.put<std::uint32_t>(m.neuron);
            w.put<std::uint32_t>(m.slot);
            w.put<std::uint32_t>(m.start);
            w.put<std::uint32_t>(m.end);
        }
        w.put<std::uint32_t>(static_cast<std::uint32_t>(lay.activations.size()));
        for (const auto &a : lay.activations) {
            w.put<std::uint32_t>(a.layer);
            w.put<std::uint32_t>(a.neuron);
            w.put<std::uint32_t>(a.start);
            w.put<std::uint32_t>(a.end);
        }
        for (const auto &t : set.traces) {
            if (t.samples.size() != lay.total_samples)
                throw LengthMismatch("write_trace_set: trace length differs from layout");
            if constexpr (std::endian::native == std::endian::little)
                os.write(reinterpret_cast<const char *>(t.samples.data()),
                         static_cast<std::streamsize>(t.samples.size() * sizeof(float)));
            else
                for (float v : t.samples)
                    w.put<float>(v);
        }
        if (!os)
            throw std::ios_base::failure("write failed: " + path.string());
    }

    nlohmann::json side;
    side["format"] = "SGTR";
    side["version"] = detail::kTraceVersion;
    side["varying_index"] = set.varying_index;
    side["fixed_inputs"] = set.fixed_inputs;
    side["inputs"] = set.inputs();
    side["leakage"] = set.config;
    side["campaign"] = set.campaign;
    if (with_ground_truth && set.has_ground_truth()) {
        nlohmann::json gt = nlohmann::json::array();
        for (const auto &t : set.traces) {
            nlohmann::json layers = nlohmann::json::array();
            for (const auto &p : t.ground_truth)
                layers.push_back(p.indices);
            gt.push_back(std::move(layers));
        }
        side["ground_truth"] = std::move(gt);
    }
    std::ofstream js(sidecar_path(path), std::ios::trunc);
    if (!js)
        throw std::ios_base::failure("cannot write sidecar for " + path.string());
    js << side.dump(1) << '\n';
    if (!js)
        throw std::ios_base::failure("write failed: " + sidecar_path(path).string());
}

inline TraceSet read_trace_set(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::ios_base::failure("cannot open " + path.string());
    detail::LeReader r(is);
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), 4) || magic != detail::kTraceMagic)
        throw FormatError(path.string() + ": not an SGTR trace file");
    const auto version = r.get<std::uint16_t>();
    if (version != detail::kTraceVersion)
        throw FormatError("unsupported SGTR version " + std::to_string(version));
    const auto m_l = r.get<std::uint32_t>();
    const auto spt = r.get<std::uint32_t>();

    auto lay = std::make_shared<Layout>();
    lay->total_samples = spt;
    lay->protection = static_cast<Protection>(r.get<std::uint8_t>());
    lay->div_leak_mode = static_cast<DivLeakMode>(r.get<std::uint8_t>());
    lay->natural_order = r.get<std::uint8_t>() != 0;
    (void)r.get<std::uint8_t>();
    lay->samples_per_mul = r.get<std::uint32_t>();
    lay->leak_offset = r.get<std::uint32_t>();
    lay->layer_sizes.resize(r.get<std::uint32_t>());
    for (auto &n : lay->layer_sizes)
        n = r.get<std::uint32_t>();
    lay->steps.resize(r.get<std::uint32_t>());
    for (auto &s : lay->steps) {
        s.layer = r.get<std::uint32_t>();
        s.i = r.get<std::uint32_t>();
        s.start = r.get<std::uint32_t>();
        s.end = r.get<std::uint32_t>();
        s.remainder_bits = r.get<std::uint32_t>();
        s.masked = r.get<std::uint32_t>() != 0;
    }
    lay->muls.resize(r.get<std::uint32_t>());
    for (auto &m : lay->muls) {
        m.layer = r.get<std::uint32_t>();
        m.neuron = r.get<std::uint32_t>();
        m.slot = r.get<std::uint32_t>();
        m.start = r.get<std::uint32_t>();
        m.end = r.get<std::uint32_t>();
    }
    lay->activations.resize(r.get<std::uint32_t>());
    for (auto &a : lay->activations) {
        a.layer = r.get<std::uint32_t>();
        a.neuron = r.get<std::uint32_t>();
        a.start = r.get<std::uint32_t>();
        a.end = r.get<std::uint32_t>();
    }
    if (!lay->is_disjoint())
        throw FormatError("trace layout ranges overlap or exceed the trace");

    TraceSet set;
    set.layout = lay;
    set.traces.resize(m_l);
    for (auto &t : set.traces) {
        t.layout = lay;
        t.samples.resize(spt);
        if constexpr (std::endian::native == std::endian::little) {
            if (!is.read(reinterpret_cast<char *>(t.samples.data()),
                         static_cast<std::streamsize>(spt * sizeof(float))))
                throw FormatError("trace file truncated");
        } else {
            for (auto &v : t.samples)
                v = r.get<float>();
        }
    }

    std::ifstream js(sidecar_path(path));
    if (!js)
        throw std::ios_base::failure("missing sidecar " + sidecar_path(path).string());
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(js);
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(std::string("bad sidecar: ") + e.what());
    }
    set.varying_index = side.at("varying_index").get<std::uint32_t>();
    set.fixed_inputs = side.at("fixed_inputs").get<std::vector<float>>();
    set.config = side.at("leakage").get<LeakageConfig>();
    set.campaign = side.at("campaign").get<Campaign>();
    const auto inputs = side.at("inputs").get<std::vector<double>>();
    if (inputs.size() != m_l)
        throw FormatError("sidecar input count does not match trace count");
    for (std::size_t k = 0; k < m_l; ++k)
        set.traces[k].input = static_cast<float>(inputs[k]);
    if (side.contains("ground_truth")) {
        const auto &gt = side.at("ground_truth");
        if (gt.size() != m_l)
            throw FormatError("ground truth count does not match trace count");
        for (std::size_t k = 0; k < m_l; ++k)
            for (const auto &layer : gt[k])
                set.traces[k].ground_truth.push_back(
                    Permutation{layer.get<std::vector<std::uint32_t>>()});
    }
    return set;
}

} // namespace shuffleguard
