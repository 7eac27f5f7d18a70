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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "shuffleguard/cpa.hpp"
#include "shuffleguard/leakage.hpp"

namespace sg = shuffleguard;

namespace {

sg::MlpModel reference_model(float w = 1.43f, std::uint32_t out = 0, std::uint32_t in = 0) {
    sg::RandomSource src(1001);
    const std::vector<std::uint32_t> sizes{7, 5, 4, 3};
    auto m = sg::gen_random_model(sizes, -2.0, 2.0, 0.01, src);
    m.set_weight(0, out, in, w);
    return m;
}

sg::TraceSet campaign(sg::Protection p, std::uint32_t m_l, double sigma, std::uint64_t seed,
                      const sg::MlpModel &m = reference_model()) {
    sg::Campaign c;
    c.m_l = m_l;
    c.protection = p;
    c.seed = seed;
    sg::LeakageConfig cfg;
    cfg.sigma = sigma;
    cfg.seed = seed + 100;
    return sg::collect_attack_traces(m, c, cfg);
}

const sg::WeightHypothesisSet &grid() {
    static const auto w = sg::build_hypotheses(-2.0, 2.0, 0.01);
    return w;
}

} // namespace

// ---------------------------------------------------------------- hypotheses

TEST(Hypotheses, DefaultGridHas401Points) {
    const auto &w = grid();
    EXPECT_EQ(w.m_w(), 401U);
    EXPECT_EQ(w.values.front(), -2.0f);
    EXPECT_EQ(w.values.back(), 2.0f);
    ASSERT_TRUE(w.index_of(1.43f));
    EXPECT_EQ(*w.index_of(1.43f), 343U);
    EXPECT_TRUE(w.index_of(0.99f));
    EXPECT_FALSE(w.index_of(1.435f));
    EXPECT_TRUE(std::is_sorted(w.values.begin(), w.values.end()));
}

TEST(Hypotheses, DegenerateGrids) {
    EXPECT_EQ(sg::build_hypotheses(0, 0, 0.3).values, std::vector<float>{0.0f});
    EXPECT_EQ(sg::build_hypotheses(0, 1, 0.5).values, (std::vector<float>{0.0f, 0.5f, 1.0f}));
    EXPECT_THROW(sg::build_hypotheses(0, 1, 0), sg::DomainError);
    EXPECT_THROW(sg::build_hypotheses(1, 0, 0.1), sg::DomainError);
}

TEST(Hypotheses, ZeroIsPositiveZero) {
    const auto w = sg::build_hypotheses(-0.5, 0.5, 0.25);
    ASSERT_TRUE(w.index_of(0.0f));
    EXPECT_EQ(sg::f32_bits(w.values[*w.index_of(0.0f)]), 0U);
}

TEST(HypotheticalLeakage, Examples) {
    const sg::WeightHypothesisSet w{{0.0f, 1.0f, 1.43f}};
    const std::vector<float> in{1.0f, -2.5f};
    const auto h = sg::hypothetical_leakage(w, in);
    ASSERT_EQ(h.rows, 3U);
    ASSERT_EQ(h.cols, 2U);
    EXPECT_EQ(h.at(0, 0), 0);
    EXPECT_EQ(h.at(0, 1), 1); // 0 * -2.5 is -0.0, whose sign bit is set
    EXPECT_EQ(h.at(1, 0), 7);
    EXPECT_EQ(h.at(2, 0), 19);
    EXPECT_EQ(h.at(1, 1), sg::hamming_weight(-2.5f));
}

// ---------------------------------------------------------------- pearson

TEST(Pearson, Examples) {
    const std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{3, 2, 1}, k{5, 5, 5};
    EXPECT_DOUBLE_EQ(sg::pearson_abs(a, b), 1.0);
    EXPECT_DOUBLE_EQ(sg::pearson_abs(a, c), 1.0);
    EXPECT_EQ(sg::pearson_abs(k, a), 0.0);
    EXPECT_EQ(sg::pearson_abs(a, k), 0.0);
    EXPECT_THROW(sg::pearson_abs(a, std::vector<double>{1, 2}), sg::LengthMismatch);
}

TEST(Pearson, BoundedAndSymmetric) {
    sg::RandomSource src(2);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(50), y(50);
        for (auto &v : x)
            v = src.next_unit();
        for (std::size_t k = 0; k < y.size(); ++k)
            y[k] = 0.3 * x[k] + src.next_unit();
        const double r = sg::pearson_abs(x, y);
        ASSERT_GE(r, 0.0);
        ASSERT_LE(r, 1.0);
        ASSERT_NEAR(r, sg::pearson_abs(y, x), 1e-12);
    }
}

// ---------------------------------------------------------------- correlate

TEST(Correlate, MatchesPearsonOracle) {
    const auto set = campaign(sg::Protection::unprotected_fy, 300, 1.0, 4);
    const auto w = sg::build_hypotheses(-1.0, 1.0, 0.1);
    const auto h = sg::hypothetical_leakage(w, set.inputs());
    const auto cm = sg::correlate(h, set, 10, 40);
    ASSERT_EQ(cm.q, 31U);
    for (std::size_t j = 0; j < w.m_w(); ++j)
        for (std::size_t t = 0; t < cm.q; ++t) {
            std::vector<double> hx, ly;
            for (std::size_t i = 0; i < set.size(); ++i) {
                hx.push_back(h.at(j, i));
                ly.push_back(set.traces[i].samples[10 + t]);
            }
            ASSERT_NEAR(cm.at(j, t), sg::pearson_abs(hx, ly), 1e-9);
        }
}

TEST(Correlate, NoiselessCorrectRowIsOne) {
    const auto set = campaign(sg::Protection::no_shuffle, 200, 0.0, 1);
    const auto h = sg::hypothetical_leakage(grid(), set.inputs());
    const auto [q_s, q_e] = set.layout->window_range(0, 0, 0);
    const auto cm = sg::correlate(h, set, q_s, q_e);
    const auto j = *grid().index_of(1.43f);
    EXPECT_NEAR(cm.at(j, set.layout->leak_offset), 1.0, 1e-12);
}

TEST(Correlate, NoiseColumnStaysSmall) {
    const auto set = campaign(sg::Protection::no_shuffle, 2000, 1.0, 2);
    const auto h = sg::hypothetical_leakage(grid(), set.inputs());
    const auto [q_s, q_e] = set.layout->window_range(0, 0, 0);
    const auto cm = sg::correlate(h, set, q_s, q_s); // padding sample
    for (std::size_t j = 0; j < grid().m_w(); ++j)
        ASSERT_LT(cm.at(j, 0), 0.1);
    EXPECT_EQ(cm.q, 1U);
}

TEST(Correlate, RangeChecks) {
    const auto set = campaign(sg::Protection::no_shuffle, 10, 1.0, 2);
    const auto h = sg::hypothetical_leakage(grid(), set.inputs());
    EXPECT_THROW(sg::correlate(h, set, 5, 4), sg::RangeError);
    EXPECT_THROW(sg::correlate(h, set, 0, set.samples_per_trace()), sg::RangeError);
}

// ---------------------------------------------------------------- grouping

TEST(Grouping, MaxOverSharedValue) {
    sg::CorrelationMatrix cm{2, 2, 0, 1, {0.2, 0.7, 0.5, 0.1}};
    const sg::WeightHypothesisSet w{{1.25f, 1.5f}}; // both exponent 127
    const auto g = sg::group_by_component(cm, w, sg::Component::exponent);
    ASSERT_EQ(g.r_e.size(), 1U);
    EXPECT_EQ(g.r_e.at(127), (std::vector<double>{0.5, 0.7}));
    EXPECT_FALSE(g.r_e.contains(128));
}

TEST(Grouping, SingletonReproducesRow) {
    sg::CorrelationMatrix cm{1, 3, 0, 2, {0.1, 0.4, 0.2}};
    const sg::WeightHypothesisSet w{{-0.75f}};
    const auto g = sg::group_by_component(cm, w, sg::Component::sign);
    EXPECT_EQ(g.r_e.at(1), (std::vector<double>{0.1, 0.4, 0.2}));
    const auto r = sg::rank_candidates(g);
    ASSERT_EQ(r.size(), 1U);
    EXPECT_EQ(r[0].value, 1U);
}

TEST(Ranking, DominantPeakAndTies) {
    sg::ComponentGrouping g;
    g.r_e[126] = {0.3, 0.1};
    g.r_e[127] = {0.2, 0.9};
    g.r_e[128] = {0.25};
    EXPECT_EQ(sg::rank_candidates(g).front().value, 127U);

    sg::ComponentGrouping tie;
    tie.r_e[9] = {0.5};
    tie.r_e[4] = {0.5};
    tie.r_e[7] = {0.1};
    const auto r = sg::rank_candidates(tie);
    EXPECT_EQ(r[0].value, 4U);
    EXPECT_EQ(r[1].value, 9U);
    EXPECT_THROW(sg::rank_candidates(sg::ComponentGrouping{}), sg::DomainError);
}

/// The rank-1 value of a component is the group holding the global maximum
/// of the correlation matrix.
TEST(Ranking, RankOneHoldsGlobalMaximum) {
    sg::RandomSource src(6);
    const auto w = sg::build_hypotheses(-2.0, 2.0, 0.05);
    for (int trial = 0; trial < 50; ++trial) {
        sg::CorrelationMatrix cm{w.m_w(), 4, 0, 3, std::vector<double>(w.m_w() * 4)};
        for (auto &v : cm.corr)
            v = src.next_unit();
        const auto top = std::max_element(cm.corr.begin(), cm.corr.end()) - cm.corr.begin();
        const float best = w.values[static_cast<std::size_t>(top) / 4];
        for (auto comp : sg::kAllComponents) {
            const auto g = sg::group_by_component(cm, w, comp);
            ASSERT_EQ(sg::rank_candidates(g).front().value,
                      sg::component_value(sg::decompose_f32(best), comp));
        }
    }
}

// ---------------------------------------------------------------- run_cpa

TEST(RunCpa, UnprotectedRecoversPlantedWeight) {
    const auto set = campaign(sg::Protection::no_shuffle, 2000, 1.0, 3);
    const auto [q_s, q_e] = sg::target_range(*set.layout, 0, 0, 0);
    const auto rep = sg::run_cpa(set, grid(), q_s, q_e);
    EXPECT_EQ(rep.component(sg::Component::sign).ranking.front().value, 0U);
    EXPECT_EQ(rep.component(sg::Component::exponent).ranking.front().value, 127U);
    EXPECT_EQ(rep.component(sg::Component::m1).ranking.front().value, 110U);
    EXPECT_EQ(rep.component(sg::Component::m2).ranking.front().value, 20U);
    EXPECT_EQ(rep.component(sg::Component::m3).ranking.front().value, 61U);
    EXPECT_EQ(rep.recovered_weight(), 1.43f);
    EXPECT_TRUE(rep.mantissa_consistent());
    EXPECT_EQ(rep.weight_rank(1.43f), 1U);
    EXPECT_FALSE(rep.unstable);
}

TEST(RunCpa, ShuffledUnprotectedAlsoRecoversOverNeuronRange) {
    const auto set = campaign(sg::Protection::unprotected_fy, 2000, 1.0, 3);
    const auto [q_s, q_e] = sg::target_range(*set.layout, 0, 0, 0);
    EXPECT_EQ(std::make_pair(q_s, q_e), set.layout->neuron_range(0, 0));
    const auto rep = sg::run_cpa(set, grid(), q_s, q_e);
    EXPECT_EQ(rep.component(sg::Component::exponent).ranking.front().value, 127U);
}

TEST(RunCpa, TinyCampaignIsFlaggedUnstable) {
    const auto set = campaign(sg::Protection::no_shuffle, 3, 1.0, 3);
    const auto [q_s, q_e] = sg::target_range(*set.layout, 0, 0, 0);
    const auto rep = sg::run_cpa(set, grid(), q_s, q_e);
    EXPECT_TRUE(rep.unstable);
    const auto j = sg::report_to_json(rep);
    EXPECT_EQ(j["warning"], "unstable: correlation estimates unreliable below 30 traces");
}

TEST(RunCpa, DeterministicAndPrefixConsistent) {
    const auto set = campaign(sg::Protection::unprotected_fy, 400, 1.0, 8);
    const auto [q_s, q_e] = sg::target_range(*set.layout, 0, 0, 0);
    const auto a = sg::run_cpa(set, grid(), q_s, q_e, 250);
    const auto b = sg::run_cpa(set.prefix(250), grid(), q_s, q_e);
    EXPECT_EQ(sg::report_to_json(a).dump(), sg::report_to_json(b).dump());
    EXPECT_EQ(a.m_l, 250U);
}

TEST(RunCpa, ComponentCsvShape) {
    const auto set = campaign(sg::Protection::no_shuffle, 100, 1.0, 3);
    const auto rep = sg::run_cpa(set, grid(), 0, 7);
    std::ostringstream os;
    sg::write_component_csv(os, rep.component(sg::Component::sign).grouping);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "time_sample,0,1");
    int rows = 0;
    while (std::getline(is, line))
        ++rows;
    EXPECT_EQ(rows, 8);
}

TEST(Sweep, RowsPerCountAndComponent) {
    const auto set = campaign(sg::Protection::no_shuffle, 600, 1.0, 3);
    const auto [q_s, q_e] = sg::target_range(*set.layout, 0, 0, 0);
    const std::vector<std::size_t> counts{100, 300, 600};
    const auto pts = sg::trace_count_sweep(set, grid(), q_s, q_e, counts, 1.43f);
    ASSERT_EQ(pts.size(), 15U);
    EXPECT_EQ(pts.back().traces, 600U);
    EXPECT_EQ(pts.back().weight_rank, 1U);
    const std::vector<std::size_t> bad{601};
    EXPECT_THROW(sg::trace_count_sweep(set, grid(), q_s, q_e, bad, 1.43f), sg::DomainError);
}
