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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "shuffleguard/errors.hpp"
#include "shuffleguard/random.hpp"
#include "shuffleguard/secret_arrays.hpp"
#include "shuffleguard/shuffle.hpp"

namespace shuffleguard {

enum class Activation { relu, sigmoid, none };

inline std::string to_string(Activation a) {
    switch (a) {
    case Activation::relu:
        return "relu";
    case Activation::sigmoid:
        return "sigmoid";
    case Activation::none:
        return "none";
    }
    return "none";
}

inline Activation activation_from_string(const std::string &s) {
    if (s == "relu")
        return Activation::relu;
    if (s == "sigmoid")
        return Activation::sigmoid;
    if (s == "none")
        return Activation::none;
    throw DomainError("unknown activation '" + s + "'");
}

inline float activate(Activation a, float x) noexcept {
    switch (a) {
    case Activation::relu:
        return x > 0.0f ? x : 0.0f;
    case Activation::sigmoid:
        return 1.0f / (1.0f + std::exp(-x));
    case Activation::none:
        return x;
    }
    return x;
}

/// Value of grid point k for a grid of the given spacing. Decimal spacings
/// (0.1, 0.01, ...) divide by the exact integer scale so k = 143 at 0.01
/// gives the double nearest 1.43 before rounding to binary32.
inline float grid_value(std::int64_t k, double precision) {
    const double scale = std::round(1.0 / precision);
    if (scale >= 1.0 && std::abs(scale * precision - 1.0) < 1e-12)
        return static_cast<float>(static_cast<double>(k) / scale);
    return static_cast<float>(static_cast<double>(k) * precision);
}

/// Fully connected network with binary32 parameters.
///
/// weights[l] is row-major with layer_sizes[l+1] rows of layer_sizes[l]
/// entries; activations[l] applies after weight layer l.
struct MlpModel {
    std::vector<std::uint32_t> layer_sizes;
    std::vector<std::vector<float>> weights;
    std::vector<std::vector<float>> biases;
    std::vector<Activation> activations;
    double precision = 0.01;

    std::size_t weight_layers() const noexcept {
        return layer_sizes.empty() ? 0 : layer_sizes.size() - 1;
    }
    std::uint32_t inputs(std::size_t l) const { return layer_sizes[l]; }
    std::uint32_t outputs(std::size_t l) const { return layer_sizes[l + 1]; }

    float weight(std::size_t l, std::size_t out, std::size_t in) const {
        return weights[l][out * layer_sizes[l] + in];
    }
    void set_weight(std::size_t l, std::size_t out, std::size_t in, float v) {
        weights.at(l).at(out * layer_sizes.at(l) + in) = v;
    }

    std::size_t weight_count() const {
        std::size_t n = 0;
        for (const auto &w : weights)
            n += w.size();
        return n;
    }
    std::size_t bias_count() const {
        std::size_t n = 0;
        for (const auto &b : biases)
            n += b.size();
        return n;
    }

    /// Widest layer input, which sizes the shared secret arrays.
    std::uint32_t max_input_width() const {
        std::uint32_t w = 0;
        for (std::size_t l = 0; l < weight_layers(); ++l)
            w = std::max(w, layer_sizes[l]);
        return w;
    }

    void validate() const {
        if (layer_sizes.size() < 2)
            throw DomainError("model needs at least 2 layers");
        for (auto n : layer_sizes)
            if (n == 0)
                throw DomainError("layer sizes must be positive");
        const std::size_t L = weight_layers();
        if (weights.size() != L || biases.size() != L || activations.size() != L)
            throw DimensionMismatch("per-layer parameter count does not match layer_sizes");
        for (std::size_t l = 0; l < L; ++l) {
            if (weights[l].size() != std::size_t{layer_sizes[l]} * layer_sizes[l + 1])
                throw DimensionMismatch("weights[" + std::to_string(l) + "] has wrong size");
            if (biases[l].size() != layer_sizes[l + 1])
                throw DimensionMismatch("biases[" + std::to_string(l) + "] has wrong size");
        }
    }
};

/// Random model with every parameter drawn uniformly from the grid
/// {k * precision} intersected with [lo, hi]. Hidden layers use ReLU and the
/// output layer a sigmoid.
inline MlpModel gen_random_model(std::span<const std::uint32_t> layer_sizes, double lo, double hi,
                                 double precision, RandomSource &src) {
    if (layer_sizes.size() < 2)
        throw DomainError("gen_random_model: need at least 2 layers");
    if (!(precision > 0.0))
        throw DomainError("gen_random_model: precision must be positive");
    if (lo > hi)
        throw DomainError("gen_random_model: empty range");

    const auto k_lo = static_cast<std::int64_t>(std::ceil(lo / precision - 1e-9));
    const auto k_hi = static_cast<std::int64_t>(std::floor(hi / precision + 1e-9));
    if (k_lo > k_hi)
        throw DomainError("gen_random_model: range contains no grid point");

    MlpModel m;
    m.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
    m.precision = precision;
    const std::size_t L = m.weight_layers();
    for (std::size_t l = 0; l < L; ++l) {
        std::vector<float> w(std::size_t{layer_sizes[l]} * layer_sizes[l + 1]);
        for (auto &v : w)
            v = grid_value(src.uniform_int(k_lo, k_hi), precision);
        std::vector<float> b(layer_sizes[l + 1]);
        for (auto &v : b)
            v = grid_value(src.uniform_int(k_lo, k_hi), precision);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
        m.activations.push_back(l + 1 == L ? Activation::sigmoid : Activation::relu);
    }
    return m;
}

/// One multiplication of an instrumented inference.
struct MulEvent {
    std::uint32_t layer = 0;
    std::uint32_t neuron = 0;
    std::uint32_t slot = 0;
    std::uint32_t input_index = 0;
    float weight = 0.0f;
    float input = 0.0f;
    float product = 0.0f;
};

/// Receives every event of an instrumented inference, in execution order.
struct NullSink {
    void on_shuffle_step(std::uint32_t /*layer*/, const ShuffleStep &) {}
    void on_layer_order(std::uint32_t /*layer*/, const Permutation &) {}
    void on_mul(const MulEvent &) {}
    void on_activation(std::uint32_t /*layer*/, std::uint32_t /*neuron*/, float) {}
};

enum class ShuffleKind { none, fisher_yates, protected_fy };

/// Draws one multiplication order per weight layer, reporting each shuffle
/// step to the sink. `secrets` is only consulted for protected_fy.
template <U32Source Source, class Sink>
std::vector<Permutation> draw_orders(const MlpModel &model, ShuffleKind kind,
                                     const SecretArrays *secrets, Source &src, Sink &sink) {
    std::vector<Permutation> orders;
    orders.reserve(model.weight_layers());
    for (std::uint32_t l = 0; l < model.weight_layers(); ++l) {
        auto natural = Permutation::identity(model.inputs(l));
        auto report = [&sink, l](const ShuffleStep &s) { sink.on_shuffle_step(l, s); };
        switch (kind) {
        case ShuffleKind::none:
            orders.push_back(std::move(natural));
            break;
        case ShuffleKind::fisher_yates:
            orders.push_back(fisher_yates(std::move(natural), src, report));
            break;
        case ShuffleKind::protected_fy:
            if (secrets == nullptr)
                throw DomainError("protected shuffle requires secret arrays");
            if (natural.size() < 2) {
                orders.push_back(std::move(natural));
                break;
            }
            orders.push_back(protected_fisher_yates(std::move(natural), *secrets, src, report));
            break;
        }
        sink.on_layer_order(l, orders.back());
    }
    return orders;
}

/// Forward pass using the given per-layer multiplication orders.
///
/// Products are formed in binary32; the running sum of a neuron is kept in
/// double, added in slot order, then the bias is added and the result
/// rounded to binary32 before the activation.
template <class Sink>
std::vector<float> infer_with_orders(const MlpModel &model, std::span<const float> input,
                                     const std::vector<Permutation> &orders, Sink &sink) {
    if (input.size() != model.layer_sizes.at(0))
        throw DimensionMismatch("input length " + std::to_string(input.size()) +
                                " does not match input layer width " +
                                std::to_string(model.layer_sizes[0]));
    if (orders.size() != model.weight_layers())
        throw DimensionMismatch("one multiplication order per layer required");

    std::vector<float> current(input.begin(), input.end());
    std::vector<float> next;
    for (std::uint32_t l = 0; l < model.weight_layers(); ++l) {
        const std::uint32_t n_in = model.inputs(l);
        const std::uint32_t n_out = model.outputs(l);
        const auto &order = orders[l].indices;
        if (order.size() != n_in)
            throw DimensionMismatch("order length does not match layer width");
        const float *w = model.weights[l].data();
        next.assign(n_out, 0.0f);
        for (std::uint32_t o = 0; o < n_out; ++o) {
            const float *row = w + std::size_t{o} * n_in;
            double acc = 0.0;
            for (std::uint32_t s = 0; s < n_in; ++s) {
                const std::uint32_t idx = order[s];
                const float product = row[idx] * current[idx];
                sink.on_mul(MulEvent{l, o, s, idx, row[idx], current[idx], product});
                acc += static_cast<double>(product);
            }
            acc += static_cast<double>(model.biases[l][o]);
            next[o] = activate(model.activations[l], static_cast<float>(acc));
            sink.on_activation(l, o, next[o]);
        }
        current.swap(next);
    }
    return current;
}

inline std::vector<float> infer(const MlpModel &model, std::span<const float> input) {
    NullSink sink;
    std::vector<Permutation> orders;
    for (std::uint32_t l = 0; l < model.weight_layers(); ++l)
        orders.push_back(Permutation::identity(model.inputs(l)));
    return infer_with_orders(model, input, orders, sink);
}

/// Inference with every layer's multiplications reordered by a fresh
/// protected shuffle; all output neurons of a layer share the order.
template <U32Source Source, class Sink = NullSink>
std::vector<float> infer_shuffled(const MlpModel &model, std::span<const float> input,
                                  const SecretArrays &secrets, Source &src, Sink &&sink = {}) {
    if (input.size() != model.layer_sizes.at(0))
        throw DimensionMismatch("input length does not match input layer width");
    if (secrets.n_max < model.max_input_width())
        throw DomainError("secret arrays narrower than the widest layer");
    auto orders = draw_orders(model, ShuffleKind::protected_fy, &secrets, src, sink);
    return infer_with_orders(model, input, orders, sink);
}

namespace detail {

inline int decimals_for(double precision) {
    const double scale = std::round(1.0 / precision);
    if (scale >= 1.0 && std::abs(scale * precision - 1.0) < 1e-12) {
        int d = 0;
        for (double s = scale; s > 1.5; s /= 10.0)
            ++d;
        if (std::pow(10.0, d) == scale)
            return d;
    }
    return -1;
}

inline std::string format_param(float v, int decimals) {
    char buf[64];
    if (decimals >= 0)
        std::snprintf(buf, sizeof buf, "%.*f", decimals, static_cast<double>(v));
    if (decimals < 0 || std::strtof(buf, nullptr) != v)
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
    std::string s(buf);
    if (s == "-0" || (s.size() > 1 && s.rfind("-0.", 0) == 0 &&
                      s.find_first_not_of("-0.") == std::string::npos))
        s.erase(0, 1);
    return s;
}

inline float parse_param(const nlohmann::json &j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        char *end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw FormatError("bad parameter value '" + s + "'");
        return static_cast<float>(v);
    }
    return static_cast<float>(j.get<double>());
}

} // namespace detail

/// Parameters are written as decimal strings at the model's precision.
inline void to_json(nlohmann::json &j, const MlpModel &m) {
    const int decimals = detail::decimals_for(m.precision);
    auto encode = [decimals](const std::vector<std::vector<float>> &layers) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto &layer : layers) {
            nlohmann::json row = nlohmann::json::array();
            for (float v : layer)
                row.push_back(detail::format_param(v, decimals));
            out.push_back(std::move(row));
        }
        return out;
    };
    nlohmann::json acts = nlohmann::json::array();
    for (auto a : m.activations)
        acts.push_back(to_string(a));
    j = nlohmann::json{{"layer_sizes", m.layer_sizes},
                       {"weights", encode(m.weights)},
                       {"biases", encode(m.biases)},
                       {"activations", acts},
                       {"precision", m.precision}};
}

inline void from_json(const nlohmann::json &j, MlpModel &m) {
    m = MlpModel{};
    j.at("layer_sizes").get_to(m.layer_sizes);
    m.precision = j.value("precision", 0.01);
    auto decode = [](const nlohmann::json &layers) {
        std::vector<std::vector<float>> out;
        for (const auto &layer : layers) {
            std::vector<float> row;
            for (const auto &v : layer)
                row.push_back(detail::parse_param(v));
            out.push_back(std::move(row));
        }
        return out;
    };
    m.weights = decode(j.at("weights"));
    m.biases = decode(j.at("biases"));
    for (const auto &a : j.at("activations"))
        m.activations.push_back(activation_from_string(a.get<std::string>()));
    m.validate();
}

} // namespace shuffleguard
