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

// Acceptance suite: one PASS/FAIL line per criterion. Every threshold,
// seed and trace count is fixed below; exit status is non-zero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "shuffleguard.hpp"

using namespace shuffleguard;

namespace {

// ---------------------------------------------------------------- pinned values

constexpr std::uint64_t kBlakelyMaxN = 64;
constexpr double kBlakelySeconds = 1.0;
constexpr std::size_t kMaskedDraws = 100000;
constexpr std::size_t kMaskedInstances = 10;
constexpr std::size_t kEquivalenceTrials = 10000;
constexpr std::uint32_t kEquivalenceMaxN = 64;
constexpr double kUniformityAlpha = 0.001;
constexpr std::size_t kSamplesPerPermutation = 1000;
constexpr const char *kKeyspace20 = "46965467381760";

constexpr std::size_t kRuns = 10;
constexpr std::size_t kRunsNeeded = 9;
constexpr std::uint32_t kUnprotectedTraces = 2000;
constexpr std::uint32_t kProtectedTraces = 10000;
constexpr double kSigma = 1.0;
constexpr double kUnprotectedSeconds = 120.0;
constexpr std::size_t kSweepCounts[] = {10000, 20000, 30000, 40000, 50000};

constexpr std::uint32_t kReorderTraces = 100;
constexpr double kProtectedPermutationCeiling = 0.02;

constexpr std::size_t kGcdTrials = 100;
constexpr std::size_t kGcdObservations = 100;
constexpr std::uint32_t kGcdNMax = 20;
constexpr std::size_t kGcdPlainNeeded = 99;
constexpr std::size_t kGcdBlindedAllowed = 1;

constexpr std::size_t kBenchRepeats = 11;
constexpr double kBenchTargetSeconds = 0.02;
constexpr std::size_t kBenchNeurons[] = {100, 250, 500, 1000};
constexpr std::size_t kBenchLayers[] = {2, 3, 4, 5};
/// A later median may exceed an earlier one by at most this much.
constexpr double kMonotoneSlack = 0.02;
/// Spread across layer counts must stay within max(k * median MAD, floor).
constexpr double kLayerSpreadMads = 3.0;
constexpr double kLayerSpreadFloor = 0.05;

// ---------------------------------------------------------------- reporting

int failures = 0;

void report(int id, const std::string &title, bool pass, const std::string &detail) {
    std::printf("criterion %2d %-44s %s  (%s)\n", id, (title + ":").c_str(), pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

void note(const std::string &text) {
    std::printf("             %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class T> std::string join(const std::vector<T> &v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k)
        s += (k ? "," : "") + std::to_string(v[k]);
    return s;
}

// ---------------------------------------------------------------- 1 - 5

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t cases = 0, bad = 0;
    for (std::uint64_t n = 2; n <= kBlakelyMaxN; ++n)
        for (std::uint64_t a = 0; a < n; ++a)
            for (std::uint64_t b = 0; b < n; ++b) {
                ++cases;
                bad += blakely(n, a, b) != a * b % n;
            }
    const double s = seconds_since(t0);
    report(1, "Blakely exactness", bad == 0 && s < kBlakelySeconds,
           std::to_string(cases) + " cases, " + std::to_string(bad) + " failures, " +
               fmt("%.3f s", s));
}

void criterion_2() {
    RandomSource src(2);
    std::size_t bad = 0;
    for (std::size_t inst = 0; inst < kMaskedInstances; ++inst) {
        const auto secrets = gen_secret_arrays(1000, src);
        for (std::size_t k = 0; k < kMaskedDraws / kMaskedInstances; ++k) {
            const std::uint32_t r = src.next_u32(), rp = src.next_u32();
            const auto i = static_cast<std::uint32_t>(src.uniform_int(2, 999));
            bad += masked_reduce(r, rp, i, secrets) != r % (i + 1);
        }
    }
    report(2, "Masked-reduction identity", bad == 0,
           std::to_string(kMaskedDraws) + " draws over " + std::to_string(kMaskedInstances) +
               " secret instances, " + std::to_string(bad) + " failures");
}

void criterion_3() {
    RandomSource src(3);
    const auto secrets = gen_secret_arrays(kEquivalenceMaxN, src);
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t < kEquivalenceTrials; ++t) {
        const auto n = static_cast<std::uint32_t>(src.uniform_int(2, kEquivalenceMaxN));
        std::vector<std::uint32_t> rs, mixed;
        for (std::uint32_t i = n - 1; i >= 1; --i) {
            rs.push_back(src.next_u32());
            mixed.push_back(rs.back());
            if (i >= 2)
                mixed.push_back(src.next_u32());
        }
        ScriptedSource a(rs), b(mixed);
        mismatches += !(fisher_yates(Permutation::identity(n), a) ==
                        protected_fisher_yates(Permutation::identity(n), secrets, b));
    }
    bool uniform = true;
    std::string chi;
    for (std::uint32_t n : {3U, 4U, 5U}) {
        const std::size_t samples = kSamplesPerPermutation * stats::factorial(n);
        for (bool protect : {false, true}) {
            const auto r = stats::permutation_uniformity(
                n, samples,
                [&] {
                    return protect ? protected_fisher_yates(Permutation::identity(n), secrets, src)
                                   : fisher_yates(Permutation::identity(n), src);
                },
                kUniformityAlpha);
            uniform = uniform && r.pass();
            chi += std::string(protect ? " P" : " O") + std::to_string(n) + "=" +
                   fmt("%.1f", r.statistic) + "/" + fmt("%.1f", r.critical);
        }
    }
    report(3, "Shuffle equivalence & uniformity", mismatches == 0 && uniform,
           std::to_string(kEquivalenceTrials) + " trials, " + std::to_string(mismatches) +
               " mismatches; chi2/critical" + chi);
}

void criterion_4() {
    BigInt oracle = 1;
    for (std::uint64_t m = 3; m <= 20; ++m) {
        std::uint64_t phi = 0;
        for (std::uint64_t k = 1; k < m; ++k)
            phi += std::gcd(k, m) == 1;
        oracle *= phi;
    }
    const BigInt got = keyspace_size(20);
    const double bits = log2_big(got);
    const bool pass = got == oracle && got == BigInt(kKeyspace20) && std::abs(bits - 45.4) < 0.05;
    report(4, "Keyspace figure", pass,
           "keyspace_size(20) = " + got.str() + " = 2^" + fmt("%.2f", bits) + ", oracle " +
               oracle.str());
}

void criterion_5() {
    const auto a = decompose_f32(1.43f);
    const auto b = decompose_f32(0.99f);
    const bool pass = a.sign == 0 && a.exponent == 127 && a.m1 == 110 && a.m2 == 20 &&
                      a.m3 == 61 && b.sign == 0 && b.exponent == 126 && b.m1 == 250 &&
                      b.m2 == 225 && b.m3 == 36;
    auto tuple = [](const Float32Components &c) {
        return "(" + std::to_string(c.sign) + "," + std::to_string(c.exponent) + "," +
               std::to_string(c.m1) + "," + std::to_string(c.m2) + "," + std::to_string(c.m3) +
               ")";
    };
    report(5, "Float test vectors", pass, "1.43 -> " + tuple(a) + ", 0.99 -> " + tuple(b));
}

// ---------------------------------------------------------------- CPA campaigns

/// Where the target weight sits and how the co-inputs are chosen.
struct Variant {
    std::string name;
    float weight = 1.43f;
    std::uint32_t neuron = 0;
    std::uint32_t input = 0;
    bool random_fixed = false;
};

struct CampaignOutcome {
    bool components_rank1 = false;
    std::size_t weight_rank = 0;
    bool mantissa_below = false;
    double true_mantissa_peak = 0.0;
    double top_incorrect_peak = 0.0;
    TraceSet traces;
};

MlpModel model_for(const Variant &v, std::uint64_t run) {
    RandomSource src(derive_seed(0xA11CE, run));
    const std::vector<std::uint32_t> sizes{7, 5, 4, 3};
    MlpModel m = gen_random_model(sizes, -2.0, 2.0, 0.01, src);
    m.set_weight(0, v.neuron, v.input, v.weight);
    return m;
}

CampaignOutcome run_campaign(const Variant &v, Protection p, std::uint32_t m_l, std::uint64_t run,
                             bool keep_traces = false) {
    const MlpModel model = model_for(v, run);
    Campaign c;
    c.m_l = m_l;
    c.protection = p;
    c.varying_index = v.input;
    c.seed = derive_seed(0xCA4, run);
    c.fixed = v.random_fixed ? FixedPolicy::random_fixed(derive_seed(0xF1, run))
                             : FixedPolicy::constant(0.5f);
    LeakageConfig cfg;
    cfg.sigma = kSigma;
    cfg.seed = derive_seed(0x5E, run);
    TraceSet set = collect_attack_traces(model, c, cfg);

    const auto &w = build_hypotheses(-2.0, 2.0, 0.01);
    const auto [q_s, q_e] = target_range(*set.layout, 0, v.neuron, v.input);
    const auto rep = run_cpa(set, w, q_s, q_e);

    CampaignOutcome out;
    out.components_rank1 = rep.recovers(v.weight);
    out.weight_rank = rep.weight_rank(v.weight);
    const auto truth = decompose_f32(v.weight);
    out.mantissa_below = true;
    for (auto comp : {Component::m1, Component::m2, Component::m3}) {
        const auto &res = rep.component(comp);
        const auto value = component_value(truth, comp);
        out.true_mantissa_peak = std::max(out.true_mantissa_peak, res.grouping.peak(value));
        out.top_incorrect_peak = std::max(out.top_incorrect_peak, res.best_other_peak(value));
        out.mantissa_below = out.mantissa_below && res.grouping.peak(value) < res.best_other_peak(value);
    }
    if (keep_traces)
        out.traces = std::move(set);
    return out;
}

bool unprotected_cpa(int id, const std::string &title, const Variant &v) {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t ok = 0;
    std::vector<int> ranks;
    for (std::size_t run = 0; run < kRuns; ++run) {
        const auto o = run_campaign(v, Protection::no_shuffle, kUnprotectedTraces, run);
        ok += o.components_rank1;
        ranks.push_back(static_cast<int>(o.weight_rank));
    }
    const double s = seconds_since(t0);
    const bool pass = ok >= kRunsNeeded && s < kUnprotectedSeconds;
    if (id > 0)
        report(id, title, pass,
               std::to_string(ok) + "/" + std::to_string(kRuns) +
                   " runs with all five components at rank 1, " + fmt("%.1f s", s));
    note("unprotected, " + v.name + ": true-weight rank per run [" + join(ranks) + "]");
    return pass;
}

bool protected_cpa(int id, const std::string &title, const Variant &v) {
    std::size_t not_rank1 = 0, below = 0;
    std::vector<int> ranks;
    std::string peaks;
    for (std::size_t run = 0; run < kRuns; ++run) {
        const auto o = run_campaign(v, Protection::protected_fy, kProtectedTraces, run);
        not_rank1 += o.weight_rank != 1;
        below += o.mantissa_below;
        ranks.push_back(static_cast<int>(o.weight_rank));
        peaks += (run ? " " : "") + fmt("%.3f", o.true_mantissa_peak) + "/" +
                 fmt("%.3f", o.top_incorrect_peak);
    }

    // Trace-count sweep on one long campaign.
    const auto longest = kSweepCounts[std::size(kSweepCounts) - 1];
    auto sweep_run = run_campaign(v, Protection::protected_fy, static_cast<std::uint32_t>(longest),
                                  kRuns, true);
    const auto &set = sweep_run.traces;
    const auto [q_s, q_e] = target_range(*set.layout, 0, v.neuron, v.input);
    const std::vector<std::size_t> counts(std::begin(kSweepCounts), std::end(kSweepCounts));
    const auto points = trace_count_sweep(set, build_hypotheses(-2.0, 2.0, 0.01), q_s, q_e,
                                          counts, v.weight);
    std::vector<int> sweep_ranks;
    bool emerged = false;
    for (std::size_t k = 0; k < points.size(); k += std::size(kAllComponents)) {
        sweep_ranks.push_back(static_cast<int>(points[k].weight_rank));
        emerged = emerged || points[k].weight_rank == 1;
    }

    const bool pass = not_rank1 >= kRunsNeeded && below >= kRunsNeeded && !emerged;
    if (id > 0)
        report(id, title, pass,
               "weight not rank 1 in " + std::to_string(not_rank1) + "/" + std::to_string(kRuns) +
                   ", true mantissa peak below top incorrect in " + std::to_string(below) + "/" +
                   std::to_string(kRuns) + ", sweep rank-1 " + (emerged ? "emerges" : "absent"));
    note("protected, " + v.name + ": true-weight rank per run [" + join(ranks) + "]");
    note("protected, " + v.name + ": true mantissa peak / top incorrect peak per run: " + peaks);
    note("protected, " + v.name + ": true-weight rank at " + join(counts) + " traces: [" + join(sweep_ranks) + "]");
    return pass;
}

// ---------------------------------------------------------------- 8 - 10

void criterion_8() {
    const Variant v{"reorder", 1.43f, 0, 0, false};
    const MlpModel model = model_for(v, 0);
    const auto &w = build_hypotheses(-2.0, 2.0, 0.01);
    auto capture = [&](Protection p) {
        Campaign c;
        c.m_l = kReorderTraces;
        c.protection = p;
        c.seed = derive_seed(0x8E, 0);
        LeakageConfig cfg;
        cfg.sigma = 0.0;
        cfg.seed = derive_seed(0x8F, 0);
        return collect_attack_traces(model, c, cfg);
    };
    const auto fy = run_reorder_attack(capture(Protection::unprotected_fy), w);
    const auto pr = run_reorder_attack(capture(Protection::protected_fy), w);
    const bool pass = *fy.permutation_accuracy == 1.0 &&
                      *pr.permutation_accuracy <= kProtectedPermutationCeiling &&
                      fy.recovered_weight == 1.43f && fy.cpa.recovers(1.43f);
    report(8, "Reorder attack dichotomy", pass,
           "unprotected accuracy " + fmt("%.2f", *fy.permutation_accuracy) +
               ", protected accuracy " + fmt("%.2f", *pr.permutation_accuracy) +
               ", unshuffled CPA recovers " + fmt("%.9g", fy.recovered_weight));
    note("protected: per-step accuracy " + fmt("%.3f", *pr.step_accuracy) +
         ", unmasked final step " + fmt("%.2f", *pr.final_step_accuracy) +
         ", CPA after unshuffling gives " + fmt("%.9g", pr.recovered_weight));
}

void criterion_9() {
    RandomSource src(9);
    std::size_t plain = 0, blinded = 0;
    for (std::size_t t = 0; t < kGcdTrials; ++t) {
        const auto secrets = gen_secret_arrays(kGcdNMax, src);
        const std::size_t k = t % secrets.size();
        const auto modulus = static_cast<std::uint32_t>(k + 3);
        const auto s1 = secrets.s1[k];
        const auto a = gcd_attack(simulate_gcd_observations(s1, modulus, kGcdObservations, false, src),
                                  false, modulus);
        const auto b = gcd_attack(simulate_gcd_observations(s1, modulus, kGcdObservations, true, src),
                                  true, modulus);
        plain += a.verdict == GcdVerdict::recovered && a.value == s1;
        blinded += b.verdict == GcdVerdict::recovered && b.value == s1;
    }
    report(9, "GCD attack dichotomy", plain >= kGcdPlainNeeded && blinded <= kGcdBlindedAllowed,
           "S1 recovered in " + std::to_string(plain) + "/" + std::to_string(kGcdTrials) +
               " without blinding, " + std::to_string(blinded) + "/" + std::to_string(kGcdTrials) +
               " with blinding");
}

void criterion_10() {
    const std::vector<std::size_t> sizes{100, 1000};
    const auto shuffle_rows = bench::shuffle_bench(sizes, kBenchRepeats, 10, kBenchTargetSeconds);
    bool ratios_ok = true;
    std::string ratios;
    for (const auto &r : shuffle_rows) {
        ratios_ok = ratios_ok && std::isfinite(r.ratio) && r.ratio > 1.0;
        ratios += " N=" + std::to_string(r.n) + ":" + fmt("%.2fx", r.ratio);
    }

    const std::vector<std::size_t> neurons(std::begin(kBenchNeurons), std::end(kBenchNeurons));
    const std::vector<std::size_t> layers(std::begin(kBenchLayers), std::end(kBenchLayers));
    const auto rows = bench::network_bench(neurons, layers, kBenchRepeats, 10, kBenchTargetSeconds);

    std::vector<double> per_neuron;
    bool layers_ok = true;
    std::string spreads;
    for (std::size_t n : neurons) {
        std::vector<double> over, mads;
        for (const auto &r : rows)
            if (r.neurons == n) {
                over.push_back(r.overhead_vs_fy);
                mads.push_back(r.overhead_vs_fy_mad);
            }
        per_neuron.push_back(stats::median(over));
        const double spread = *std::max_element(over.begin(), over.end()) -
                              *std::min_element(over.begin(), over.end());
        const double band = std::max(kLayerSpreadMads * stats::median(mads), kLayerSpreadFloor);
        layers_ok = layers_ok && spread <= band;
        spreads += " " + std::to_string(n) + ":" + fmt("%.3f", spread) + "<=" + fmt("%.3f", band);
    }
    bool monotone = true;
    std::string trend;
    for (std::size_t k = 0; k < per_neuron.size(); ++k) {
        if (k > 0 && per_neuron[k] > per_neuron[k - 1] + kMonotoneSlack)
            monotone = false;
        trend += " " + std::to_string(neurons[k]) + ":" + fmt("%.1f%%", 100.0 * per_neuron[k]);
    }
    report(10, "Overhead trends", ratios_ok && monotone && layers_ok,
           "shuffle ratio" + ratios + "; protected-vs-FY overhead" + trend);
    note("spread of overhead across 2-5 layers per width:" + spreads);
}

} // namespace

int main() {
    std::printf("shuffleguard acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();

    const Variant base{"1.43 at (in 0, out 0), co-inputs 0.5", 1.43f, 0, 0, false};
    const Variant random_co{"1.43 at (in 0, out 0), random-fixed co-inputs", 1.43f, 0, 0, true};
    const Variant appendix{"0.99 at (in 3, out 1), co-inputs 0.5", 0.99f, 1, 3, false};

    unprotected_cpa(6, "Unprotected CPA succeeds", base);
    protected_cpa(7, "Protected CPA fails", base);
    criterion_8();
    criterion_9();
    criterion_10();

    bool ok11 = true;
    for (const auto &v : {random_co, appendix}) {
        ok11 = unprotected_cpa(0, "", v) && ok11;
        ok11 = protected_cpa(0, "", v) && ok11;
    }
    report(11, "Appendix robustness", ok11,
           "criteria 6-7 rerun with random-fixed co-inputs and with 0.99 at (input 3, output 1)");

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
