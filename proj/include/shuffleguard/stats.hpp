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
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "shuffleguard/errors.hpp"
#include "shuffleguard/shuffle.hpp"

namespace shuffleguard::stats {

/// Rank of a permutation of {0..n-1} in lexicographic order (Lehmer code).
inline std::size_t permutation_rank(const Permutation &p) {
    const std::size_t n = p.size();
    std::size_t rank = 0;
    std::vector<bool> used(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t smaller = 0;
        for (std::uint32_t v = 0; v < p[k]; ++v)
            smaller += used[v] ? 0 : 1;
        used[p[k]] = true;
        rank = rank * (n - k) + smaller;
    }
    return rank;
}

constexpr std::size_t factorial(std::size_t n) noexcept {
    std::size_t f = 1;
    for (std::size_t k = 2; k <= n; ++k)
        f *= k;
    return f;
}

/// Pearson chi-square statistic of observed counts against a uniform law.
inline double chi_square_uniform(std::span<const std::size_t> counts) {
    double total = 0;
    for (auto c : counts)
        total += static_cast<double>(c);
    const double expected = total / static_cast<double>(counts.size());
    double stat = 0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

/// Upper critical value of the chi-square law at significance `alpha`.
inline double chi_square_critical(double dof, double alpha) {
    boost::math::chi_squared dist(dof);
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

struct UniformityResult {
    std::size_t categories = 0;
    std::size_t samples = 0;
    std::size_t unseen = 0;
    double statistic = 0.0;
    double critical = 0.0;
    bool pass() const { return unseen == 0 && statistic < critical; }
};

/// Chi-square test that `draw()` yields each of the n! permutations of n
/// elements equally often.
template <class Draw>
UniformityResult permutation_uniformity(std::size_t n, std::size_t samples, Draw &&draw,
                                        double alpha = 0.001) {
    const std::size_t cats = factorial(n);
    std::vector<std::size_t> counts(cats, 0);
    for (std::size_t k = 0; k < samples; ++k)
        ++counts[permutation_rank(draw())];
    UniformityResult r;
    r.categories = cats;
    r.samples = samples;
    r.unseen = static_cast<std::size_t>(std::count(counts.begin(), counts.end(), 0U));
    r.statistic = chi_square_uniform(counts);
    r.critical = chi_square_critical(static_cast<double>(cats - 1), alpha);
    return r;
}

inline double median(std::vector<double> v) {
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Median absolute deviation from the median.
inline double mad(const std::vector<double> &v) {
    const double med = median(v);
    std::vector<double> dev;
    dev.reserve(v.size());
    for (double x : v)
        dev.push_back(std::abs(x - med));
    return median(std::move(dev));
}

/// Two-sided binomial test p-value (doubling the smaller tail).
inline double binomial_two_sided_p(std::size_t successes, std::size_t trials, double p) {
    if (p <= 0.0)
        return successes == 0 ? 1.0 : 0.0;
    if (p >= 1.0)
        return successes == trials ? 1.0 : 0.0;
    boost::math::binomial dist(static_cast<double>(trials), p);
    const double k = static_cast<double>(successes);
    const double lower = boost::math::cdf(dist, k);
    const double upper = k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, k - 1));
    return std::min(1.0, 2.0 * std::min(lower, upper));
}

/// Plug-in estimate, in bits, of the mutual information between two
/// discrete series.
template <class X, class Y>
double mutual_information(std::span<const X> x, std::span<const Y> y) {
    if (x.size() != y.size())
        throw LengthMismatch("mutual_information: series lengths differ");
    if (x.empty())
        return 0.0;
    std::map<X, double> px;
    std::map<Y, double> py;
    std::map<std::pair<X, Y>, double> pxy;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        px[x[k]] += 1.0 / n;
        py[y[k]] += 1.0 / n;
        pxy[{x[k], y[k]}] += 1.0 / n;
    }
    double mi = 0.0;
    for (const auto &[xy, p] : pxy)
        mi += p * std::log2(p / (px[xy.first] * py[xy.second]));
    return std::max(0.0, mi);
}

} // namespace shuffleguard::stats
