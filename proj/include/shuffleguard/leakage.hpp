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
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shuffleguard/errors.hpp"
#include "shuffleguard/float32.hpp"
#include "shuffleguard/network.hpp"
#include "shuffleguard/random.hpp"
#include "shuffleguard/secret_arrays.hpp"
#include "shuffleguard/shuffle.hpp"

namespace shuffleguard {

enum class DivLeakMode : std::uint8_t { bit_serial = 0, hw_only = 1, none = 2 };

/// Which multiplication order an inference uses.
enum class Protection : std::uint8_t { no_shuffle = 0, unprotected_fy = 1, protected_fy = 2 };

inline std::string to_string(DivLeakMode m) {
    switch (m) {
    case DivLeakMode::bit_serial:
        return "bit_serial";
    case DivLeakMode::hw_only:
        return "hw_only";
    case DivLeakMode::none:
        return "none";
    }
    return "none";
}

inline DivLeakMode div_leak_mode_from_string(const std::string &s) {
    if (s == "bit_serial")
        return DivLeakMode::bit_serial;
    if (s == "hw_only")
        return DivLeakMode::hw_only;
    if (s == "none")
        return DivLeakMode::none;
    throw DomainError("unknown division leak mode '" + s + "'");
}

/// "none", "fy", "protected".
inline std::string to_string(Protection p) {
    switch (p) {
    case Protection::no_shuffle:
        return "none";
    case Protection::unprotected_fy:
        return "fy";
    case Protection::protected_fy:
        return "protected";
    }
    return "none";
}

inline Protection protection_from_string(const std::string &s) {
    if (s == "none" || s == "no_shuffle")
        return Protection::no_shuffle;
    if (s == "fy" || s == "unprotected_fy")
        return Protection::unprotected_fy;
    if (s == "protected" || s == "protected_fy")
        return Protection::protected_fy;
    throw DomainError("unknown protection '" + s + "'");
}

inline ShuffleKind shuffle_kind(Protection p) noexcept {
    switch (p) {
    case Protection::no_shuffle:
        return ShuffleKind::none;
    case Protection::unprotected_fy:
        return ShuffleKind::fisher_yates;
    case Protection::protected_fy:
        return ShuffleKind::protected_fy;
    }
    return ShuffleKind::none;
}

struct LeakageConfig {
    std::uint32_t samples_per_mul = 8;
    double alpha = 1.0;
    double sigma = 1.0;
    DivLeakMode div_leak_mode = DivLeakMode::bit_serial;
    std::uint64_t seed = 0;

    /// Position of the informative sample inside a multiplication window.
    std::uint32_t leak_offset() const noexcept { return samples_per_mul / 2; }

    void validate() const {
        if (samples_per_mul < 1)
            throw DomainError("samples_per_mul must be >= 1");
        if (!(sigma >= 0.0))
            throw DomainError("sigma must be >= 0");
    }

    friend bool operator==(const LeakageConfig &, const LeakageConfig &) = default;
};

/// Multiplication leak: padding noise everywhere, plus alpha * HW(product)
/// at the designated offset.
template <class Out>
void emit_mul_leak_into(Out out, float product, const LeakageConfig &cfg, NoiseSource &noise) {
    const std::uint32_t hot = cfg.leak_offset();
    const double hw = cfg.alpha * hamming_weight(product);
    for (std::uint32_t k = 0; k < cfg.samples_per_mul; ++k)
        out(k == hot ? hw + noise.gaussian(cfg.sigma) : noise.gaussian(cfg.sigma));
}

inline std::vector<double> emit_mul_leak(float product, const LeakageConfig &cfg,
                                         NoiseSource &noise) {
    if (!std::isfinite(product))
        throw DomainError("emit_mul_leak: product must be finite");
    std::vector<double> out;
    out.reserve(cfg.samples_per_mul);
    emit_mul_leak_into([&out](double v) { out.push_back(v); }, product, cfg, noise);
    return out;
}

/// Remainder bits a bit-serial division leak exposes for this divisor.
constexpr std::uint32_t remainder_width(std::uint32_t divisor) noexcept {
    return divisor <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(divisor - 1));
}

constexpr std::uint32_t div_leak_length(std::uint32_t divisor, DivLeakMode mode) noexcept {
    switch (mode) {
    case DivLeakMode::bit_serial:
        return remainder_width(divisor) + 2;
    case DivLeakMode::hw_only:
        return 2;
    case DivLeakMode::none:
        return 0;
    }
    return 0;
}

/// Division leak of dividend mod divisor. Bit-serial mode emits the
/// remainder LSB first, one sample per bit, then HW(dividend) and
/// HW(divisor); hw_only emits just the two HW samples.
template <class Out>
void emit_div_leak_into(Out out, std::uint64_t dividend, std::uint32_t divisor,
                        const LeakageConfig &cfg, NoiseSource &noise) {
    if (cfg.div_leak_mode == DivLeakMode::none)
        return;
    if (cfg.div_leak_mode == DivLeakMode::bit_serial) {
        const std::uint64_t rem = dividend % divisor;
        for (std::uint32_t b = 0; b < remainder_width(divisor); ++b)
            out(cfg.alpha * static_cast<double>((rem >> b) & 1U) + noise.gaussian(cfg.sigma));
    }
    out(cfg.alpha * std::popcount(dividend) + noise.gaussian(cfg.sigma));
    out(cfg.alpha * std::popcount(divisor) + noise.gaussian(cfg.sigma));
}

inline std::vector<double> emit_div_leak(std::uint64_t dividend, std::uint32_t divisor,
                                         const LeakageConfig &cfg, NoiseSource &noise) {
    if (divisor < 1)
        throw DomainError("emit_div_leak: divisor must be >= 1");
    std::vector<double> out;
    emit_div_leak_into([&out](double v) { out.push_back(v); }, dividend, divisor, cfg, noise);
    return out;
}

struct MulWindow {
    std::uint32_t layer = 0, neuron = 0, slot = 0;
    std::uint32_t start = 0, end = 0;
    friend bool operator==(const MulWindow &, const MulWindow &) = default;
};

struct ActivationWindow {
    std::uint32_t layer = 0, neuron = 0;
    std::uint32_t start = 0, end = 0;
    friend bool operator==(const ActivationWindow &, const ActivationWindow &) = default;
};

/// Samples of one shuffle iteration's division. `masked` marks the blinded
/// reduction of a protected step (its remainder is t, not j).
struct StepWindow {
    std::uint32_t layer = 0, i = 0;
    std::uint32_t start = 0, end = 0;
    std::uint32_t remainder_bits = 0;
    bool masked = false;
    friend bool operator==(const StepWindow &, const StepWindow &) = default;
};

/// Segment map shared by every trace of a capture campaign.
///
/// Sample order is: all shuffle steps (layer 0 first), then for each layer
/// and output neuron the multiplication windows in slot order followed by
/// one activation window. When `natural_order` is set, slot s of every
/// neuron holds the multiplication by input s.
struct Layout {
    std::vector<std::uint32_t> layer_sizes;
    Protection protection = Protection::no_shuffle;
    DivLeakMode div_leak_mode = DivLeakMode::bit_serial;
    std::uint32_t samples_per_mul = 0;
    std::uint32_t leak_offset = 0;
    bool natural_order = true;
    std::vector<StepWindow> steps;
    std::vector<MulWindow> muls;
    std::vector<ActivationWindow> activations;
    std::uint32_t total_samples = 0;

    /// Index of layer `l`'s first multiplication window in `muls`.
    std::size_t mul_base(std::uint32_t layer) const {
        std::size_t base = 0;
        for (std::uint32_t l = 0; l < layer; ++l)
            base += std::size_t{layer_sizes[l]} * layer_sizes[l + 1];
        return base;
    }

    const MulWindow &mul(std::uint32_t layer, std::uint32_t neuron, std::uint32_t slot) const {
        if (layer + 1 >= layer_sizes.size() || neuron >= layer_sizes[layer + 1] ||
            slot >= layer_sizes[layer])
            throw LayoutError("no multiplication window for the requested position");
        return muls.at(mul_base(layer) + std::size_t{neuron} * layer_sizes[layer] + slot);
    }

    /// Inclusive sample range covering every multiplication of a neuron.
    std::pair<std::uint32_t, std::uint32_t> neuron_range(std::uint32_t layer,
                                                         std::uint32_t neuron) const {
        const auto &first = mul(layer, neuron, 0);
        const auto &last = mul(layer, neuron, layer_sizes[layer] - 1);
        return {first.start, last.end - 1};
    }

    /// Inclusive sample range of one multiplication window.
    std::pair<std::uint32_t, std::uint32_t> window_range(std::uint32_t layer, std::uint32_t neuron,
                                                         std::uint32_t slot) const {
        const auto &w = mul(layer, neuron, slot);
        return {w.start, w.end - 1};
    }

    std::vector<const StepWindow *> steps_of(std::uint32_t layer) const {
        std::vector<const StepWindow *> out;
        for (const auto &s : steps)
            if (s.layer == layer)
                out.push_back(&s);
        return out;
    }

    /// True when all labelled ranges are ordered, non-empty, disjoint and
    /// inside the trace.
    bool is_disjoint() const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
        for (const auto &s : steps)
            ranges.emplace_back(s.start, s.end);
        for (const auto &m : muls)
            ranges.emplace_back(m.start, m.end);
        for (const auto &a : activations)
            ranges.emplace_back(a.start, a.end);
        std::sort(ranges.begin(), ranges.end());
        std::uint32_t cursor = 0;
        for (const auto &[b, e] : ranges) {
            if (b < cursor || e < b || e > total_samples)
                return false;
            cursor = e;
        }
        return true;
    }

    friend bool operator==(const Layout &, const Layout &) = default;
};

/// One simulated power trace.
struct Trace {
    std::vector<float> samples;
    float input = 0.0f; ///< value of the varying input for this execution
    std::shared_ptr<const Layout> layout;
    std::vector<Permutation> ground_truth; ///< per-layer multiplication orders
};

namespace detail {

struct SampleAppender {
    std::vector<float> *out;
    void operator()(double v) const { out->push_back(static_cast<float>(v)); }
};

/// Sink that turns an instrumented inference into samples and layout.
class TraceRecorder {
  public:
    TraceRecorder(const MlpModel &model, Protection protection, const LeakageConfig &cfg,
                  NoiseSource &noise)
        : cfg_(cfg), noise_(noise) {
        layout_.layer_sizes = model.layer_sizes;
        layout_.protection = protection;
        layout_.div_leak_mode = cfg.div_leak_mode;
        layout_.samples_per_mul = cfg.samples_per_mul;
        layout_.leak_offset = cfg.leak_offset();
        layout_.natural_order = protection == Protection::no_shuffle;
        layout_.muls.reserve(model.weight_count());
    }

    void on_shuffle_step(std::uint32_t layer, const ShuffleStep &s) {
        StepWindow w;
        w.layer = layer;
        w.i = s.i;
        w.masked = s.masked;
        w.start = cursor();
        emit_div_leak_into(push(), s.dividend, s.divisor(), cfg_, noise_);
        w.end = cursor();
        w.remainder_bits =
            cfg_.div_leak_mode == DivLeakMode::bit_serial ? remainder_width(s.divisor()) : 0;
        layout_.steps.push_back(w);
    }

    void on_layer_order(std::uint32_t, const Permutation &p) { orders_.push_back(p); }

    void on_mul(const MulEvent &e) {
        MulWindow w{e.layer, e.neuron, e.slot, cursor(), 0};
        emit_mul_leak_into(push(), e.product, cfg_, noise_);
        w.end = cursor();
        layout_.muls.push_back(w);
    }

    void on_activation(std::uint32_t layer, std::uint32_t neuron, float) {
        ActivationWindow w{layer, neuron, cursor(), 0};
        for (std::uint32_t k = 0; k < cfg_.samples_per_mul; ++k)
            samples_.push_back(static_cast<float>(noise_.gaussian(cfg_.sigma)));
        w.end = cursor();
        layout_.activations.push_back(w);
    }

    Layout take_layout() {
        layout_.total_samples = cursor();
        return std::move(layout_);
    }
    std::vector<float> take_samples() { return std::move(samples_); }
    std::vector<Permutation> take_orders() { return std::move(orders_); }

  private:
    std::uint32_t cursor() const { return static_cast<std::uint32_t>(samples_.size()); }
    SampleAppender push() { return SampleAppender{&samples_}; }

    const LeakageConfig &cfg_;
    NoiseSource &noise_;
    Layout layout_;
    std::vector<float> samples_;
    std::vector<Permutation> orders_;
};

} // namespace detail

/// Runs one inference under the requested protection and records its
/// simulated power trace. `shuffle_src` drives the shuffles, `noise` the
/// measurement noise; `secrets` is required for protected_fy.
template <U32Source Source>
Trace capture_inference(const MlpModel &model, std::span<const float> input,
                        Protection protection, const LeakageConfig &cfg, Source &shuffle_src,
                        NoiseSource &noise, const SecretArrays *secrets = nullptr) {
    cfg.validate();
    if (input.size() != model.layer_sizes.at(0))
        throw DimensionMismatch("capture_inference: input length does not match model");
    if (protection == Protection::protected_fy &&
        (secrets == nullptr || secrets->n_max < model.max_input_width()))
        throw DomainError("capture_inference: protected capture needs wide enough secrets");

    detail::TraceRecorder rec(model, protection, cfg, noise);
    auto orders = draw_orders(model, shuffle_kind(protection), secrets, shuffle_src, rec);
    infer_with_orders(model, input, orders, rec);

    Trace t;
    t.layout = std::make_shared<const Layout>(rec.take_layout());
    t.samples = rec.take_samples();
    t.ground_truth = rec.take_orders();
    return t;
}

/// How the non-varying inputs of a campaign are chosen.
struct FixedPolicy {
    enum class Kind { constant, random_fixed } kind = Kind::constant;
    float value = 0.5f;     ///< constant co-input value
    std::uint64_t seed = 0; ///< seed for random_fixed co-inputs

    static FixedPolicy constant(float v) { return {Kind::constant, v, 0}; }
    static FixedPolicy random_fixed(std::uint64_t s) { return {Kind::random_fixed, 0.0f, s}; }
    friend bool operator==(const FixedPolicy &, const FixedPolicy &) = default;
};

struct Campaign {
    std::uint32_t m_l = 1;
    FixedPolicy fixed = FixedPolicy::constant(0.5f);
    std::uint32_t varying_index = 0;
    double lo = -2.0;
    double hi = 2.0;
    Protection protection = Protection::no_shuffle;
    std::uint64_t seed = 0; ///< drives inputs, shuffles and (absent explicit secrets) secrets
    friend bool operator==(const Campaign &, const Campaign &) = default;
};

/// A set of attack traces with one shared layout.
struct TraceSet {
    std::shared_ptr<const Layout> layout;
    std::vector<Trace> traces;
    std::vector<float> fixed_inputs; ///< full input vector; varying entry unused
    std::uint32_t varying_index = 0;
    LeakageConfig config;
    Campaign campaign;

    std::size_t size() const noexcept { return traces.size(); }
    std::uint32_t samples_per_trace() const { return layout ? layout->total_samples : 0; }
    std::vector<float> inputs() const {
        std::vector<float> a;
        a.reserve(traces.size());
        for (const auto &t : traces)
            a.push_back(t.input);
        return a;
    }
    bool has_ground_truth() const {
        return !traces.empty() && !traces.front().ground_truth.empty();
    }
    /// First `n` traces, sharing the layout.
    TraceSet prefix(std::size_t n) const {
        TraceSet out = *this;
        out.traces.resize(std::min(n, traces.size()));
        out.campaign.m_l = static_cast<std::uint32_t>(out.traces.size());
        return out;
    }
};

inline float draw_in_range(RandomSource &src, double lo, double hi) {
    return static_cast<float>(lo + (hi - lo) * src.next_unit());
}

/// Secret arrays a protected campaign uses when none are supplied.
inline SecretArrays campaign_secrets(const MlpModel &model, std::uint64_t seed) {
    RandomSource src(derive_seed(seed, 0x5EC7));
    return gen_secret_arrays(std::max<std::uint32_t>(3, model.max_input_width()), src);
}

/// Captures m_l traces with one input varying uniformly over [lo, hi] and
/// the others held by the fixed policy.
inline TraceSet collect_attack_traces(const MlpModel &model, const Campaign &campaign,
                                      const LeakageConfig &cfg,
                                      const SecretArrays *secrets = nullptr) {
    model.validate();
    cfg.validate();
    if (campaign.m_l < 1)
        throw DomainError("collect_attack_traces: m_l must be >= 1");
    if (campaign.varying_index >= model.layer_sizes[0])
        throw DimensionMismatch("collect_attack_traces: varying index outside input layer");
    if (campaign.lo > campaign.hi)
        throw DomainError("collect_attack_traces: empty varying range");

    std::optional<SecretArrays> own;
    if (campaign.protection == Protection::protected_fy && secrets == nullptr) {
        own = campaign_secrets(model, campaign.seed);
        secrets = &*own;
    }

    TraceSet set;
    set.varying_index = campaign.varying_index;
    set.config = cfg;
    set.campaign = campaign;
    set.fixed_inputs.assign(model.layer_sizes[0], campaign.fixed.value);
    if (campaign.fixed.kind == FixedPolicy::Kind::random_fixed) {
        RandomSource co(campaign.fixed.seed);
        for (auto &v : set.fixed_inputs)
            v = draw_in_range(co, campaign.lo, campaign.hi);
    }
    set.fixed_inputs[campaign.varying_index] = 0.0f;

    RandomSource input_src(derive_seed(campaign.seed, 0x1));
    set.traces.reserve(campaign.m_l);
    std::vector<float> input = set.fixed_inputs;
    for (std::uint32_t k = 0; k < campaign.m_l; ++k) {
        input[campaign.varying_index] = draw_in_range(input_src, campaign.lo, campaign.hi);
        RandomSource shuffle_src(derive_seed(derive_seed(campaign.seed, 0x2), k));
        NoiseSource noise(derive_seed(cfg.seed, k));
        Trace t = capture_inference(model, input, campaign.protection, cfg, shuffle_src, noise,
                                    secrets);
        t.input = input[campaign.varying_index];
        if (!set.layout)
            set.layout = t.layout;
        else if (*t.layout != *set.layout)
            throw LayoutError("trace layouts differ within a campaign");
        t.layout = set.layout;
        set.traces.push_back(std::move(t));
    }
    return set;
}

} // namespace shuffleguard
