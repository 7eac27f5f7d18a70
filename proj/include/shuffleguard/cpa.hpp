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
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "shuffleguard/errors.hpp"
#include "shuffleguard/float32.hpp"
#include "shuffleguard/leakage.hpp"
#include "shuffleguard/network.hpp"

namespace shuffleguard {

/// Candidate weight values, ascending.
struct WeightHypothesisSet {
    std::vector<float> values;
    std::size_t m_w() const noexcept { return values.size(); }

    /// Index of `w` in the set, if present.
    std::optional<std::size_t> index_of(float w) const {
        auto it = std::lower_bound(values.begin(), values.end(), w);
        if (it == values.end() || f32_bits(*it) != f32_bits(w))
            return std::nullopt;
        return static_cast<std::size_t>(it - values.begin());
    }
};

/// The grid {lo, lo + step, ..., hi}, each point rounded to binary32 from
/// its exact decimal value.
inline WeightHypothesisSet build_hypotheses(double lo, double hi, double step) {
    if (!(step > 0.0))
        throw DomainError("build_hypotheses: step must be positive");
    if (lo > hi)
        throw DomainError("build_hypotheses: lo must not exceed hi");
    const auto k_lo = static_cast<std::int64_t>(std::ceil(lo / step - 1e-9));
    const auto k_hi = static_cast<std::int64_t>(std::floor(hi / step + 1e-9));
    WeightHypothesisSet w;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        float v = grid_value(k, step);
        if (v == 0.0f)
            v = 0.0f; // +0, never -0
        w.values.push_back(v);
    }
    return w;
}

/// HW of the binary32 product w_j * a_i; row-major, M_w rows of M_L.
struct HypothesisMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> hw;

    std::uint8_t at(std::size_t j, std::size_t i) const { return hw[j * cols + i]; }
};

inline HypothesisMatrix hypothetical_leakage(const WeightHypothesisSet &w,
                                             std::span<const float> inputs) {
    if (inputs.empty())
        throw DomainError("hypothetical_leakage: no inputs");
    HypothesisMatrix h{w.m_w(), inputs.size(), {}};
    h.hw.resize(h.rows * h.cols);
    for (std::size_t j = 0; j < h.rows; ++j)
        for (std::size_t i = 0; i < h.cols; ++i)
            h.hw[j * h.cols + i] = static_cast<std::uint8_t>(hamming_weight(w.values[j] * inputs[i]));
    return h;
}

/// |Pearson correlation| of two equally long series; 0 when either has no
/// variance.
inline double pearson_abs(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw LengthMismatch("pearson_abs: series lengths differ");
    if (x.size() < 2)
        throw LengthMismatch("pearson_abs: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx, dy = y[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        return 0.0;
    return std::min(1.0, std::abs(sxy) / std::sqrt(sxx * syy));
}

/// |r| for every hypothesis and every time sample of [q_s, q_e].
struct CorrelationMatrix {
    std::size_t m_w = 0;
    std::size_t q = 0;
    std::uint32_t q_s = 0;
    std::uint32_t q_e = 0;
    std::vector<double> corr;

    double at(std::size_t j, std::size_t t) const { return corr[j * q + t]; }
    std::span<const double> row(std::size_t j) const { return {corr.data() + j * q, q}; }
    double row_peak(std::size_t j) const {
        auto r = row(j);
        return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
    }
};

/// Column-centred accumulation: cov[j][t] = sum_i H[j][i] * (L[t][i] - mean_t).
/// Traces are visited once; the per-trace update touches an M_w x q block.
/// Uses the first h.cols traces of the set.
inline CorrelationMatrix correlate(const HypothesisMatrix &h, const TraceSet &traces,
                                   std::uint32_t q_s, std::uint32_t q_e) {
    if (q_s > q_e || q_e >= traces.samples_per_trace())
        throw RangeError("correlate: need 0 <= q_s <= q_e < trace length");
    if (h.cols > traces.size())
        throw LengthMismatch("correlate: more hypothesis columns than traces");
    const std::size_t m_l = h.cols;
    const std::size_t m_w = h.rows;
    const std::size_t q = std::size_t{q_e} - q_s + 1;

    CorrelationMatrix cm{m_w, q, q_s, q_e, std::vector<double>(m_w * q, 0.0)};
    if (m_l < 2)
        return cm;

    std::vector<double> mean(q, 0.0), ssl(q, 0.0);
    for (std::size_t i = 0; i < m_l; ++i)
        for (std::size_t t = 0; t < q; ++t)
            mean[t] += traces.traces[i].samples[q_s + t];
    for (auto &m : mean)
        m /= static_cast<double>(m_l);

    std::vector<double> ssh(m_w, 0.0);
    for (std::size_t j = 0; j < m_w; ++j) {
        double s = 0, s2 = 0;
        for (std::size_t i = 0; i < m_l; ++i) {
            const double v = h.at(j, i);
            s += v;
            s2 += v * v;
        }
        ssh[j] = s2 - s * s / static_cast<double>(m_l);
    }

    std::vector<double> centred(q);
    std::vector<double> column(m_w);
    for (std::size_t i = 0; i < m_l; ++i) {
        const float *row = traces.traces[i].samples.data() + q_s;
        for (std::size_t t = 0; t < q; ++t) {
            centred[t] = static_cast<double>(row[t]) - mean[t];
            ssl[t] += centred[t] * centred[t];
        }
        for (std::size_t j = 0; j < m_w; ++j) {
            const double hv = h.hw[j * m_l + i];
            if (hv == 0.0)
                continue;
            double *acc = cm.corr.data() + j * q;
            for (std::size_t t = 0; t < q; ++t)
                acc[t] += hv * centred[t];
        }
    }

    for (std::size_t j = 0; j < m_w; ++j) {
        for (std::size_t t = 0; t < q; ++t) {
            double &c = cm.corr[j * q + t];
            const double denom = ssh[j] * ssl[t];
            if (ssh[j] <= 1e-12 || ssl[t] <= 1e-12 || !(denom > 0.0))
                c = 0.0;
            else
                c = std::min(1.0, std::abs(c) / std::sqrt(denom));
        }
    }
    return cm;
}

/// Per component value, the per-sample maximum |r| over hypotheses whose
/// weight carries that value.
struct ComponentGrouping {
    Component component = Component::exponent;
    std::size_t q = 0;
    std::uint32_t q_s = 0;
    std::map<std::uint32_t, std::vector<double>> r_e;

    double peak(std::uint32_t value) const {
        auto it = r_e.find(value);
        if (it == r_e.end() || it->second.empty())
            return 0.0;
        return *std::max_element(it->second.begin(), it->second.end());
    }
};

inline ComponentGrouping group_by_component(const CorrelationMatrix &cm,
                                            const WeightHypothesisSet &w, Component component) {
    if (w.m_w() != cm.m_w)
        throw LengthMismatch("group_by_component: hypothesis count differs from matrix");
    ComponentGrouping g{component, cm.q, cm.q_s, {}};
    for (std::size_t j = 0; j < cm.m_w; ++j) {
        const auto value = component_value(decompose_f32(w.values[j]), component);
        auto [it, fresh] = g.r_e.try_emplace(value, cm.q, 0.0);
        auto &best = it->second;
        for (std::size_t t = 0; t < cm.q; ++t)
            if (best[t] < cm.at(j, t))
                best[t] = cm.at(j, t);
    }
    return g;
}

struct RankedCandidate {
    std::uint32_t value = 0;
    double peak = 0.0;
};

/// Component values by peak |r|, descending; equal peaks keep the smaller
/// value first.
inline std::vector<RankedCandidate> rank_candidates(const ComponentGrouping &g) {
    if (g.r_e.empty())
        throw DomainError("rank_candidates: empty grouping");
    std::vector<RankedCandidate> out;
    out.reserve(g.r_e.size());
    for (const auto &[value, curve] : g.r_e)
        out.push_back({value, curve.empty() ? 0.0 : *std::max_element(curve.begin(), curve.end())});
    std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
        return a.peak > b.peak;
    });
    return out;
}

/// Weights ranked by their own peak |r|; ties keep the smaller weight first.
struct RankedWeight {
    float weight = 0.0f;
    double peak = 0.0;
};

inline constexpr std::size_t kUnstableTraceCount = 30;

struct ComponentResult {
    ComponentGrouping grouping;
    std::vector<RankedCandidate> ranking;

    /// 1-based rank of a value, 0 when absent.
    std::size_t rank_of(std::uint32_t value) const {
        for (std::size_t k = 0; k < ranking.size(); ++k)
            if (ranking[k].value == value)
                return k + 1;
        return 0;
    }
    /// Highest peak among values other than `value`.
    double best_other_peak(std::uint32_t value) const {
        for (const auto &c : ranking)
            if (c.value != value)
                return c.peak;
        return 0.0;
    }
};

struct CorrelationReport {
    std::size_t m_l = 0;
    std::size_t m_w = 0;
    std::uint32_t q_s = 0;
    std::uint32_t q_e = 0;
    bool unstable = false;
    std::map<Component, ComponentResult> components;
    std::vector<RankedWeight> weight_ranking;

    const ComponentResult &component(Component c) const { return components.at(c); }

    std::size_t weight_rank(float w) const {
        for (std::size_t k = 0; k < weight_ranking.size(); ++k)
            if (f32_bits(weight_ranking[k].weight) == f32_bits(w))
                return k + 1;
        return 0;
    }

    /// Weight assembled from the rank-1 value of each component. m1 and
    /// m2 both carry mantissa bit 15; m1's copy is used.
    float recovered_weight() const {
        Float32Components c;
        c.sign = component(Component::sign).ranking.front().value;
        c.exponent = component(Component::exponent).ranking.front().value;
        const auto m1 = component(Component::m1).ranking.front().value;
        const auto m2 = component(Component::m2).ranking.front().value;
        const auto m3 = component(Component::m3).ranking.front().value;
        c.raw_mantissa = (m1 << 15) | ((m2 & 0xFFU) << 7) | m3;
        return recompose_f32(c);
    }

    /// Whether the rank-1 m1 and m2 agree on their shared bit.
    bool mantissa_consistent() const {
        const auto m1 = component(Component::m1).ranking.front().value;
        const auto m2 = component(Component::m2).ranking.front().value;
        return (m1 & 1U) == (m2 >> 8);
    }

    /// True when every component's rank-1 value matches `w`.
    bool recovers(float w) const {
        const auto c = decompose_f32(w);
        for (auto comp : kAllComponents)
            if (component(comp).ranking.front().value != component_value(c, comp))
                return false;
        return true;
    }
};

inline CorrelationReport report_from_matrix(const CorrelationMatrix &cm,
                                            const WeightHypothesisSet &w, std::size_t m_l) {
    CorrelationReport rep;
    rep.m_l = m_l;
    rep.m_w = w.m_w();
    rep.q_s = cm.q_s;
    rep.q_e = cm.q_e;
    rep.unstable = m_l < kUnstableTraceCount;
    for (auto comp : kAllComponents) {
        ComponentResult res{group_by_component(cm, w, comp), {}};
        res.ranking = rank_candidates(res.grouping);
        rep.components.emplace(comp, std::move(res));
    }
    rep.weight_ranking.reserve(w.m_w());
    for (std::size_t j = 0; j < w.m_w(); ++j)
        rep.weight_ranking.push_back({w.values[j], cm.row_peak(j)});
    std::stable_sort(rep.weight_ranking.begin(), rep.weight_ranking.end(),
                     [](const auto &a, const auto &b) { return a.peak > b.peak; });
    return rep;
}

/// Hypothetical leakage, correlation over [q_s, q_e], and ranking of all
/// five weight components plus the full weights. `count` limits the
/// analysis to the first traces of the set (0 = all).
inline CorrelationReport run_cpa(const TraceSet &traces, const WeightHypothesisSet &w,
                                 std::uint32_t q_s, std::uint32_t q_e, std::size_t count = 0) {
    if (traces.size() == 0)
        throw DomainError("run_cpa: empty trace set");
    if (count == 0 || count > traces.size())
        count = traces.size();
    auto inputs = traces.inputs();
    inputs.resize(count);
    const auto h = hypothetical_leakage(w, inputs);
    const auto cm = correlate(h, traces, q_s, q_e);
    return report_from_matrix(cm, w, count);
}

/// Target range for a weight: the window of its input for natural-order
/// traces, or the whole neuron segment when the order is shuffled.
inline std::pair<std::uint32_t, std::uint32_t> target_range(const Layout &layout,
                                                            std::uint32_t layer,
                                                            std::uint32_t neuron,
                                                            std::uint32_t input_index) {
    if (layout.natural_order)
        return layout.window_range(layer, neuron, input_index);
    return layout.neuron_range(layer, neuron);
}

inline nlohmann::json report_to_json(const CorrelationReport &rep,
                                     std::size_t max_ranked = 0) {
    nlohmann::json j;
    j["m_l"] = rep.m_l;
    j["m_w"] = rep.m_w;
    j["q_s"] = rep.q_s;
    j["q_e"] = rep.q_e;
    j["unstable"] = rep.unstable;
    if (rep.unstable)
        j["warning"] = "unstable: correlation estimates unreliable below " +
                       std::to_string(kUnstableTraceCount) + " traces";
    nlohmann::json comps = nlohmann::json::object();
    for (const auto &[comp, res] : rep.components) {
        nlohmann::json ranking = nlohmann::json::array();
        const std::size_t n =
            max_ranked == 0 ? res.ranking.size() : std::min(max_ranked, res.ranking.size());
        for (std::size_t k = 0; k < n; ++k)
            ranking.push_back({{"value", res.ranking[k].value}, {"peak", res.ranking[k].peak}});
        comps[std::string(component_name(comp))] = {{"rank1", res.ranking.front().value},
                                                    {"ranking", ranking}};
    }
    j["components"] = comps;
    nlohmann::json weights = nlohmann::json::array();
    const std::size_t n = max_ranked == 0 ? rep.weight_ranking.size()
                                          : std::min(max_ranked, rep.weight_ranking.size());
    for (std::size_t k = 0; k < n; ++k)
        weights.push_back({{"weight", rep.weight_ranking[k].weight},
                           {"peak", rep.weight_ranking[k].peak}});
    j["weights"] = weights;
    j["recovered_weight"] = rep.recovered_weight();
    j["mantissa_consistent"] = rep.mantissa_consistent();
    return j;
}

/// CSV of one component's curves: a time-sample column, then one column
/// per component value (ascending), each holding max |r| in that group.
inline void write_component_csv(std::ostream &os, const ComponentGrouping &g) {
    os << "time_sample";
    for (const auto &[value, curve] : g.r_e)
        os << ',' << value;
    os << '\n';
    char buf[32];
    for (std::size_t t = 0; t < g.q; ++t) {
        os << (g.q_s + t);
        for (const auto &[value, curve] : g.r_e) {
            std::snprintf(buf, sizeof buf, ",%.6f", curve[t]);
            os << buf;
        }
        os << '\n';
    }
}

/// One row of a trace-count sweep: the correct value's peak and the best
/// incorrect peak for each component at a given number of traces.
struct SweepPoint {
    std::size_t traces = 0;
    Component component = Component::sign;
    double correct_peak = 0.0;
    double best_incorrect_peak = 0.0;
    std::size_t correct_rank = 0;
    std::size_t weight_rank = 0;
};

inline std::vector<SweepPoint> trace_count_sweep(const TraceSet &traces,
                                                 const WeightHypothesisSet &w, std::uint32_t q_s,
                                                 std::uint32_t q_e,
                                                 std::span<const std::size_t> counts,
                                                 float true_weight) {
    std::vector<SweepPoint> out;
    const auto truth = decompose_f32(true_weight);
    for (auto n : counts) {
        if (n < 2 || n > traces.size())
            throw DomainError("trace_count_sweep: count outside [2, traces]");
        const auto rep = run_cpa(traces, w, q_s, q_e, n);
        for (auto comp : kAllComponents) {
            const auto &res = rep.component(comp);
            const auto value = component_value(truth, comp);
            out.push_back({n, comp, res.grouping.peak(value), res.best_other_peak(value),
                           res.rank_of(value), rep.weight_rank(true_weight)});
        }
    }
    return out;
}

inline void write_sweep_csv(std::ostream &os, std::span<const SweepPoint> points) {
    os << "traces,component,correct_peak,best_incorrect_peak,correct_rank,weight_rank\n";
    char buf[64];
    for (const auto &p : points) {
        os << p.traces << ',' << component_name(p.component);
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f", p.correct_peak, p.best_incorrect_peak);
        os << buf << ',' << p.correct_rank << ',' << p.weight_rank << '\n';
    }
}

} // namespace shuffleguard
