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

#include <chrono>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "shuffleguard/network.hpp"
#include "shuffleguard/random.hpp"
#include "shuffleguard/secret_arrays.hpp"
#include "shuffleguard/shuffle.hpp"
#include "shuffleguard/stats.hpp"

namespace shuffleguard::bench {

using Clock = std::chrono::steady_clock;

/// Keeps a value observable so timed loops are not optimised away.
template <class T> inline void keep(const T &v) { asm volatile("" : : "g"(&v) : "memory"); }

/// Seconds per call of `fn`, measured over `iters` back-to-back calls.
template <class F> double per_call(std::size_t iters, F &&fn) {
    const auto t0 = Clock::now();
    for (std::size_t k = 0; k < iters; ++k)
        fn();
    return std::chrono::duration<double>(Clock::now() - t0).count() / static_cast<double>(iters);
}

/// Calls needed for one measurement to last about `target` seconds.
template <class F> std::size_t calibrate(double target, F &&fn) {
    std::size_t iters = 1;
    for (;;) {
        const double t = per_call(iters, fn) * static_cast<double>(iters);
        if (t >= target / 4 || iters >= (std::size_t{1} << 30))
            return std::max<std::size_t>(1, static_cast<std::size_t>(
                                                static_cast<double>(iters) * target / std::max(t, 1e-9)));
        iters *= 4;
    }
}

struct ShuffleRow {
    std::size_t n = 0;
    std::size_t repeats = 0;
    double plain_seconds = 0.0;     ///< median per shuffle
    double protected_seconds = 0.0; ///< median per shuffle
    double ratio = 0.0;             ///< median of per-repetition protected/plain
};

/// Original against protected Fisher-Yates on arrays of each size.
inline std::vector<ShuffleRow> shuffle_bench(std::span<const std::size_t> sizes,
                                             std::size_t repeats, std::uint64_t seed = 1,
                                             double target_seconds = 0.02) {
    std::vector<ShuffleRow> rows;
    for (auto n : sizes) {
        RandomSource src(derive_seed(seed, n));
        const auto secrets = gen_secret_arrays(static_cast<std::uint32_t>(std::max<std::size_t>(n, 3)), src);
        const auto base = Permutation::identity(n);
        auto plain = [&] { keep(fisher_yates(base, src)); };
        auto masked = [&] { keep(protected_fisher_yates(base, secrets, src)); };
        const std::size_t iters = calibrate(target_seconds, masked);
        const std::size_t plain_iters = calibrate(target_seconds, plain);

        std::vector<double> tp, tm, ratio;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            tp.push_back(per_call(plain_iters, plain));
            tm.push_back(per_call(iters, masked));
            ratio.push_back(tm.back() / tp.back());
        }
        rows.push_back({n, repeats, stats::median(tp), stats::median(tm), stats::median(ratio)});
    }
    return rows;
}

struct NetworkRow {
    std::size_t neurons = 0;
    std::size_t layers = 0;
    std::size_t repeats = 0;
    double unprotected_seconds = 0.0; ///< median per inference, natural order
    double fy_seconds = 0.0;          ///< median, original-shuffle order
    double protected_seconds = 0.0;   ///< median, protected-shuffle order
    double overhead_vs_fy = 0.0;      ///< median of per-repetition protected/fy - 1
    double overhead_vs_fy_mad = 0.0;
    double overhead_vs_unprotected = 0.0;
};

/// Inference with `layers` layers of `neurons` each (ReLU throughout), timed
/// with natural order, original-shuffle order and protected-shuffle order.
/// The three variants are interleaved inside every repetition.
inline NetworkRow network_bench_one(std::size_t neurons, std::size_t layers, std::size_t repeats,
                                    std::uint64_t seed = 1, double target_seconds = 0.02) {
    RandomSource src(derive_seed(seed, neurons * 16 + layers));
    std::vector<std::uint32_t> sizes(layers, static_cast<std::uint32_t>(neurons));
    MlpModel model = gen_random_model(sizes, -2.0, 2.0, 0.01, src);
    for (auto &a : model.activations)
        a = Activation::relu;
    const auto secrets = gen_secret_arrays(static_cast<std::uint32_t>(std::max<std::size_t>(neurons, 3)), src);
    std::vector<float> input(neurons);
    for (auto &v : input)
        v = static_cast<float>(src.next_unit() * 2.0 - 1.0);

    NullSink sink;
    auto run = [&](ShuffleKind kind) {
        auto orders = draw_orders(model, kind, &secrets, src, sink);
        keep(infer_with_orders(model, input, orders, sink));
    };
    auto plain = [&] { run(ShuffleKind::none); };
    auto fy = [&] { run(ShuffleKind::fisher_yates); };
    auto prot = [&] { run(ShuffleKind::protected_fy); };
    const std::size_t iters = calibrate(target_seconds, fy);

    std::vector<double> tu, tf, tp, over_fy, over_u;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        tu.push_back(per_call(iters, plain));
        tf.push_back(per_call(iters, fy));
        tp.push_back(per_call(iters, prot));
        over_fy.push_back(tp.back() / tf.back() - 1.0);
        over_u.push_back(tp.back() / tu.back() - 1.0);
    }
    NetworkRow row;
    row.neurons = neurons;
    row.layers = layers;
    row.repeats = repeats;
    row.unprotected_seconds = stats::median(tu);
    row.fy_seconds = stats::median(tf);
    row.protected_seconds = stats::median(tp);
    row.overhead_vs_fy = stats::median(over_fy);
    row.overhead_vs_fy_mad = stats::mad(over_fy);
    row.overhead_vs_unprotected = stats::median(over_u);
    return row;
}

inline std::vector<NetworkRow> network_bench(std::span<const std::size_t> neurons,
                                             std::span<const std::size_t> layer_counts,
                                             std::size_t repeats, std::uint64_t seed = 1,
                                             double target_seconds = 0.02) {
    std::vector<NetworkRow> rows;
    for (auto n : neurons)
        for (auto l : layer_counts)
            rows.push_back(network_bench_one(n, l, repeats, seed, target_seconds));
    return rows;
}

inline void write_shuffle_csv(std::ostream &os, std::span<const ShuffleRow> rows) {
    os << "n,repeats,plain_median_s,protected_median_s,ratio_median\n";
    for (const auto &r : rows)
        os << r.n << ',' << r.repeats << ',' << r.plain_seconds << ',' << r.protected_seconds
           << ',' << r.ratio << '\n';
}

inline void write_network_csv(std::ostream &os, std::span<const NetworkRow> rows) {
    os << "neurons,layers,repeats,unprotected_median_s,fy_median_s,protected_median_s,"
          "overhead_vs_fy,overhead_vs_fy_mad,overhead_vs_unprotected\n";
    for (const auto &r : rows)
        os << r.neurons << ',' << r.layers << ',' << r.repeats << ',' << r.unprotected_seconds
           << ',' << r.fy_seconds << ',' << r.protected_seconds << ',' << r.overhead_vs_fy << ','
           << r.overhead_vs_fy_mad << ',' << r.overhead_vs_unprotected << '\n';
}

} // namespace shuffleguard::bench
