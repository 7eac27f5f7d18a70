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
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "shuffleguard/cpa.hpp"
#include "shuffleguard/errors.hpp"
#include "shuffleguard/leakage.hpp"
#include "shuffleguard/random.hpp"
#include "shuffleguard/shuffle.hpp"

namespace shuffleguard {

/// Swap indices decoded from one trace's division leaks.
struct RecoveredSchedule {
    /// Per layer, j for each step in execution order (i = N-1 first).
    std::vector<std::vector<std::uint32_t>> js;
    /// Posterior probability of each decoded j, same shape as js.
    std::vector<std::vector<double>> confidence;
    std::vector<Permutation> permutations;
};

/// The j sequence a Fisher-Yates run must have used to produce `perm`.
/// Position i is final once step i has run, so j_i is wherever perm[i]
/// sits just before that step.
inline std::vector<std::uint32_t> swap_indices_of(const Permutation &perm) {
    const std::size_t n = perm.size();
    std::vector<std::uint32_t> a(n), pos(n), js;
    std::iota(a.begin(), a.end(), 0U);
    std::iota(pos.begin(), pos.end(), 0U);
    for (std::size_t i = n; i-- > 1;) {
        const std::uint32_t j = pos[perm[i]];
        js.push_back(j);
        std::swap(a[i], a[j]);
        pos[a[i]] = static_cast<std::uint32_t>(i);
        pos[a[j]] = j;
    }
    return js;
}

namespace detail {

/// Maximum-likelihood residue in [0, modulus) from bit-serial samples
/// under Gaussian noise; returns the residue and its posterior.
inline std::pair<std::uint32_t, double> decode_remainder(std::span<const float> bits,
                                                         std::uint32_t modulus, double alpha,
                                                         double sigma) {
    const double s = std::max(sigma, 1e-3 * std::max(alpha, 1e-9));
    const double inv2s2 = 1.0 / (2.0 * s * s);
    std::vector<double> ll(modulus, 0.0);
    for (std::uint32_t v = 0; v < modulus; ++v) {
        double acc = 0.0;
        for (std::size_t b = 0; b < bits.size(); ++b) {
            const double expect = ((v >> b) & 1U) ? alpha : 0.0;
            const double d = bits[b] - expect;
            acc -= d * d * inv2s2;
        }
        ll[v] = acc;
    }
    const auto best = static_cast<std::uint32_t>(std::max_element(ll.begin(), ll.end()) - ll.begin());
    double z = 0.0;
    for (double l : ll)
        z += std::exp(l - ll[best]);
    return {best, 1.0 / z};
}

/// hw_only leaks carry HW(dividend) alone. Low bits of a uniform 32-bit
/// dividend with weight h are set with probability h/32, which pins down j
/// only for power-of-two divisors; other divisors fall back to 0.
inline std::pair<std::uint32_t, double> decode_from_weight(float hw_sample, std::uint32_t modulus,
                                                           double alpha) {
    const double h = std::clamp(std::round(hw_sample / std::max(alpha, 1e-9)), 0.0, 32.0);
    if (std::has_single_bit(modulus)) {
        const double p1 = h / 32.0;
        std::uint32_t v = 0;
        double conf = 1.0;
        for (std::uint32_t b = 0; (1U << b) < modulus; ++b) {
            if (p1 > 0.5)
                v |= 1U << b;
            conf *= std::max(p1, 1.0 - p1);
        }
        return {v, conf};
    }
    return {0, 1.0 / modulus};
}

} // namespace detail

/// Decodes every shuffle step of a trace. On plain steps the remainder is
/// j itself; on masked steps it is t, which is decoded the same way and
/// (wrongly, from the attacker's standpoint) taken as j.
inline RecoveredSchedule recover_swap_indices(const Trace &trace, const LeakageConfig &cfg) {
    if (!trace.layout)
        throw LayoutError("recover_swap_indices: trace has no layout");
    const Layout &lay = *trace.layout;
    if (lay.steps.empty())
        throw LayoutError("recover_swap_indices: trace has no shuffle steps");
    if (lay.div_leak_mode == DivLeakMode::none)
        throw LayoutError("recover_swap_indices: division leakage disabled for this trace");

    RecoveredSchedule out;
    const std::size_t layers = lay.layer_sizes.size() - 1;
    out.js.resize(layers);
    out.confidence.resize(layers);
    for (const auto &step : lay.steps) {
        const std::uint32_t modulus = step.i + 1;
        std::pair<std::uint32_t, double> decoded;
        if (lay.div_leak_mode == DivLeakMode::bit_serial) {
            const std::span<const float> bits(trace.samples.data() + step.start,
                                              step.remainder_bits);
            decoded = detail::decode_remainder(bits, modulus, cfg.alpha, cfg.sigma);
        } else {
            decoded = detail::decode_from_weight(trace.samples.at(step.start), modulus, cfg.alpha);
        }
        out.js.at(step.layer).push_back(decoded.first);
        out.confidence.at(step.layer).push_back(decoded.second);
    }
    for (std::size_t l = 0; l < layers; ++l) {
        const std::uint32_t n = lay.layer_sizes[l];
        if (out.js[l].empty() && n > 1)
            throw LayoutError("recover_swap_indices: layer without shuffle steps");
        out.permutations.push_back(replay_swaps(n, out.js[l]));
    }
    return out;
}

/// Moves every multiplication window back to the slot of its input index
/// according to each trace's recovered permutations.
inline TraceSet unshuffle_traces(const TraceSet &traces,
                                 std::span<const RecoveredSchedule> schedules) {
    if (schedules.size() != traces.size())
        throw LengthMismatch("unshuffle_traces: need one schedule per trace");
    if (!traces.layout)
        throw LayoutError("unshuffle_traces: trace set has no layout");
    const Layout &lay = *traces.layout;
    const std::size_t layers = lay.layer_sizes.size() - 1;

    auto natural = std::make_shared<Layout>(lay);
    natural->natural_order = true;

    TraceSet out = traces;
    out.layout = natural;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto &src = traces.traces[k].samples;
        auto &dst = out.traces[k].samples;
        out.traces[k].layout = natural;
        if (schedules[k].permutations.size() != layers)
            throw LengthMismatch("unshuffle_traces: schedule layer count differs from layout");
        for (std::uint32_t l = 0; l < layers; ++l) {
            const auto &perm = schedules[k].permutations[l];
            const std::uint32_t n_in = lay.layer_sizes[l];
            if (perm.size() != n_in)
                throw LengthMismatch("unshuffle_traces: permutation width differs from layer");
            for (std::uint32_t o = 0; o < lay.layer_sizes[l + 1]; ++o) {
                for (std::uint32_t s = 0; s < n_in; ++s) {
                    const auto &from = lay.mul(l, o, s);
                    const auto &to = lay.mul(l, o, perm[s]);
                    std::copy(src.begin() + from.start, src.begin() + from.end,
                              dst.begin() + to.start);
                }
            }
        }
    }
    return out;
}

enum class GcdVerdict { recovered, inconclusive, uninformative };

inline std::string to_string(GcdVerdict v) {
    switch (v) {
    case GcdVerdict::recovered:
        return "recovered";
    case GcdVerdict::inconclusive:
        return "inconclusive";
    case GcdVerdict::uninformative:
        return "uninformative";
    }
    return "uninformative";
}

struct GcdResult {
    std::uint64_t value = 0;
    GcdVerdict verdict = GcdVerdict::uninformative;
};

/// Common-divisor attack on leaked multiples of a secret mask.
///
/// Plain observations lambda_k * s1 share s1 as a divisor. When the
/// observations are blinded (lambda_k * s1 + beta_k), the attack also tries
/// the gcd of successive differences, which would strip a constant offset.
/// A candidate is accepted only if it exceeds 1 and, when the modulus
/// (k + 3) is known, is coprime with it as a genuine s1 must be.
inline GcdResult gcd_attack(std::span<const std::uint64_t> observations, bool use_blinding,
                            std::uint64_t modulus = 0) {
    if (observations.empty())
        throw DomainError("gcd_attack: no observations");
    std::uint64_t g = 0;
    for (auto v : observations)
        g = std::gcd(g, v);
    if (observations.size() == 1)
        return {g, GcdVerdict::inconclusive};
    if (use_blinding && g <= 1) {
        std::uint64_t gd = 0;
        for (std::size_t k = 1; k < observations.size(); ++k) {
            const auto a = observations[k], b = observations[k - 1];
            gd = std::gcd(gd, a > b ? a - b : b - a);
        }
        g = gd;
    }
    const bool consistent = g > 1 && (modulus == 0 || std::gcd(g, modulus) == 1);
    return {g, consistent ? GcdVerdict::recovered : GcdVerdict::uninformative};
}

/// Values an attacker reads from the blinded reduction of one shuffle
/// position across inferences: r * s1 (+ r' * modulus when blinded).
inline std::vector<std::uint64_t> simulate_gcd_observations(std::uint32_t s1,
                                                            std::uint32_t modulus,
                                                            std::size_t count, bool blinded,
                                                            RandomSource &src) {
    std::vector<std::uint64_t> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::uint64_t lambda = src.next_u32();
        while (lambda == 0)
            lambda = src.next_u32();
        std::uint64_t v = lambda * s1;
        if (blinded)
            v += static_cast<std::uint64_t>(src.next_u32()) * modulus;
        out.push_back(v);
    }
    return out;
}

struct ReorderReport {
    std::size_t traces = 0;
    std::uint32_t target_layer = 0;
    std::optional<double> permutation_accuracy;     ///< exact match, target layer
    std::optional<double> all_layers_accuracy;      ///< exact match, every layer
    std::optional<double> step_accuracy;            ///< per decoded step, target layer
    std::optional<double> final_step_accuracy;      ///< the unmasked i = 1 step
    std::array<std::size_t, 10> confidence_histogram{};
    CorrelationReport cpa;
    float recovered_weight = 0.0f;
};

/// Decodes every trace's schedule, re-aligns the multiplication windows and
/// runs CPA on the window of the varying input of `neuron` in layer 0.
inline ReorderReport run_reorder_attack(const TraceSet &traces, const WeightHypothesisSet &w,
                                        std::uint32_t neuron = 0) {
    if (traces.size() == 0)
        throw DomainError("run_reorder_attack: empty trace set");
    ReorderReport rep;
    rep.traces = traces.size();

    std::vector<RecoveredSchedule> schedules;
    schedules.reserve(traces.size());
    for (const auto &t : traces.traces)
        schedules.push_back(recover_swap_indices(t, traces.config));

    for (const auto &s : schedules)
        for (const auto &layer : s.confidence)
            for (double c : layer)
                ++rep.confidence_histogram[std::min<std::size_t>(9, static_cast<std::size_t>(c * 10.0))];

    if (traces.has_ground_truth()) {
        std::size_t exact = 0, all = 0, steps_ok = 0, steps = 0, final_ok = 0;
        for (std::size_t k = 0; k < traces.size(); ++k) {
            const auto &gt = traces.traces[k].ground_truth;
            const auto &sch = schedules[k];
            if (sch.permutations[rep.target_layer] == gt[rep.target_layer])
                ++exact;
            if (sch.permutations == gt)
                ++all;
            const auto true_js = swap_indices_of(gt[rep.target_layer]);
            const auto &got = sch.js[rep.target_layer];
            for (std::size_t s = 0; s < true_js.size(); ++s) {
                steps_ok += got[s] == true_js[s];
                ++steps;
            }
            if (!true_js.empty())
                final_ok += got.back() == true_js.back();
        }
        const double n = static_cast<double>(traces.size());
        rep.permutation_accuracy = exact / n;
        rep.all_layers_accuracy = all / n;
        if (steps > 0) {
            rep.step_accuracy = static_cast<double>(steps_ok) / static_cast<double>(steps);
            rep.final_step_accuracy = final_ok / n;
        }
    }

    const TraceSet aligned = unshuffle_traces(traces, schedules);
    const auto [q_s, q_e] = aligned.layout->window_range(rep.target_layer, neuron,
                                                         traces.varying_index);
    rep.cpa = run_cpa(aligned, w, q_s, q_e);
    rep.recovered_weight = rep.cpa.weight_ranking.front().weight;
    return rep;
}

inline nlohmann::json reorder_report_to_json(const ReorderReport &rep) {
    nlohmann::json j;
    j["traces"] = rep.traces;
    j["target_layer"] = rep.target_layer;
    auto opt = [](const std::optional<double> &v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    j["permutation_accuracy"] = opt(rep.permutation_accuracy);
    j["all_layers_accuracy"] = opt(rep.all_layers_accuracy);
    j["step_accuracy"] = opt(rep.step_accuracy);
    j["final_step_accuracy"] = opt(rep.final_step_accuracy);
    nlohmann::json hist = nlohmann::json::array();
    for (std::size_t b = 0; b < rep.confidence_histogram.size(); ++b)
        hist.push_back({{"lo", b / 10.0}, {"hi", (b + 1) / 10.0},
                        {"count", rep.confidence_histogram[b]}});
    j["per_step_confidence_histogram"] = hist;
    j["cpa_outcome"] = {{"recovered_weight", rep.recovered_weight},
                        {"report", report_to_json(rep.cpa, 10)}};
    return j;
}

} // namespace shuffleguard
