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
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "shuffleguard/float32.hpp"
#include "shuffleguard/modular.hpp"
#include "shuffleguard/random.hpp"
#include "shuffleguard/secret_arrays.hpp"
#include "shuffleguard/shuffle.hpp"
#include "shuffleguard/stats.hpp"

namespace shuffleguard::verify {

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;

    std::string line() const { return name + ": " + (pass ? "PASS" : "FAIL") + (detail.empty() ? "" : " (" + detail + ")"); }
};

struct Options {
    std::uint64_t seed = 1;
    /// Negative control: corrupt one s2 entry before checking.
    bool inject_fault = false;
};

namespace detail {

template <class F> SuiteResult timed(std::string name, F &&body) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r = body();
    r.name = std::move(name);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline void corrupt(SecretArrays &s, std::size_t k) {
    const std::uint32_t m = static_cast<std::uint32_t>(k + 3);
    s.s2[k] = s.s2[k] % (m - 1) + 1; // another value in [1, m-1], no longer the inverse
}

inline std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace detail

/// blakely(n, a, b) == a * b mod n for every n in [2, max_n], a, b < n.
inline SuiteResult blakely_exhaustive(std::uint64_t max_n = 64) {
    return detail::timed("blakely exhaustive n<=" + std::to_string(max_n), [&] {
        std::size_t cases = 0, failures = 0;
        for (std::uint64_t n = 2; n <= max_n; ++n)
            for (std::uint64_t a = 0; a < n; ++a)
                for (std::uint64_t b = 0; b < n; ++b, ++cases)
                    failures += blakely(n, a, b) != (a * b) % n;
        return SuiteResult{"", failures == 0,
                           std::to_string(cases) + " cases, " + std::to_string(failures) +
                               " failures"};
    });
}

/// masked_reduce(r, r', i) == r mod (i + 1) on random draws across several
/// independent secret-array instances.
inline SuiteResult masked_reduce_identity(const Options &opt, std::size_t draws = 100000,
                                          std::size_t instances = 10,
                                          std::uint32_t n_max = 64) {
    return detail::timed("masked-reduce identity", [&] {
        RandomSource src(derive_seed(opt.seed, 0xA1));
        std::size_t failures = 0;
        for (std::size_t inst = 0; inst < instances; ++inst) {
            auto secrets = gen_secret_arrays(n_max, src);
            if (opt.inject_fault)
                detail::corrupt(secrets, secrets.size() - 1);
            for (std::size_t d = 0; d < draws / instances; ++d) {
                const auto i = static_cast<std::uint32_t>(src.uniform_int(2, n_max - 1));
                const std::uint32_t r = src.next_u32(), rp = src.next_u32();
                failures += masked_reduce(r, rp, i, secrets) != r % (i + 1);
            }
        }
        return SuiteResult{"", failures == 0,
                           std::to_string(draws) + " draws over " + std::to_string(instances) +
                               " secret instances, " + std::to_string(failures) + " failures"};
    });
}

/// Protected and original shuffles produce the same permutation from the
/// same r draws, whatever the r' draws and secrets.
inline SuiteResult shuffle_equivalence(const Options &opt, std::size_t trials = 10000,
                                       std::uint32_t max_n = 64) {
    return detail::timed("shuffle equivalence", [&] {
        RandomSource src(derive_seed(opt.seed, 0xB2));
        auto secrets = gen_secret_arrays(max_n, src);
        if (opt.inject_fault)
            detail::corrupt(secrets, secrets.size() - 1);
        std::size_t mismatches = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto n = static_cast<std::uint32_t>(src.uniform_int(2, max_n));
            std::vector<std::uint32_t> rs, interleaved;
            for (std::uint32_t i = n - 1; i >= 1; --i) {
                rs.push_back(src.next_u32());
                interleaved.push_back(rs.back());
                if (i >= 2)
                    interleaved.push_back(src.next_u32());
            }
            ScriptedSource plain(rs), masked(interleaved);
            const auto a = fisher_yates(Permutation::identity(n), plain);
            const auto b = protected_fisher_yates(Permutation::identity(n), secrets, masked);
            mismatches += !(a == b);
        }
        return SuiteResult{"", mismatches == 0,
                           std::to_string(trials) + " trials, " + std::to_string(mismatches) +
                               " mismatches"};
    });
}

/// Chi-square uniformity over all n! permutations for both shuffles.
inline std::vector<SuiteResult> uniformity(const Options &opt, std::size_t per_perm = 1000,
                                           double alpha = 0.001) {
    std::vector<SuiteResult> out;
    RandomSource src(derive_seed(opt.seed, 0xC3));
    auto secrets = gen_secret_arrays(8, src);
    for (std::uint32_t n : {3U, 4U, 5U}) {
        const std::size_t samples = per_perm * stats::factorial(n);
        for (bool protect : {false, true}) {
            const std::string name = std::string(protect ? "protected" : "original") +
                                     " shuffle uniformity N=" + std::to_string(n);
            out.push_back(detail::timed(name, [&] {
                auto res = stats::permutation_uniformity(
                    n, samples,
                    [&] {
                        return protect ? protected_fisher_yates(Permutation::identity(n),
                                                                secrets, src)
                                       : fisher_yates(Permutation::identity(n), src);
                    },
                    alpha);
                return SuiteResult{"", res.pass(),
                                   "chi2=" + detail::fmt("%.2f", res.statistic) + " < " +
                                       detail::fmt("%.2f", res.critical) + ", " +
                                       std::to_string(samples) + " samples"};
            }));
        }
    }
    return out;
}

inline SuiteResult secret_invariants(const Options &opt, std::uint32_t max_n = 1000) {
    return detail::timed("secret-array invariants n_max=3.." + std::to_string(max_n), [&] {
        RandomSource src(derive_seed(opt.seed, 0xD4));
        for (std::uint32_t n = 3; n <= max_n; ++n) {
            auto s = gen_secret_arrays(n, src);
            if (opt.inject_fault && n == max_n)
                detail::corrupt(s, s.size() / 2);
            if (auto bad = s.violation())
                return SuiteResult{"", false,
                                   "n_max=" + std::to_string(n) + " violates " + *bad};
        }
        return SuiteResult{"", true, ""};
    });
}

/// Exact published keyspace for N = 20 against a gcd-counting totient.
inline SuiteResult keyspace() {
    BigInt oracle = 1;
    for (std::uint64_t k = 3; k <= 20; ++k) {
        std::uint64_t phi = 0;
        for (std::uint64_t a = 1; a < k; ++a)
            phi += std::gcd(a, k) == 1;
        oracle *= phi;
    }
    const BigInt got = keyspace_size(20);
    const BigInt expected("46965467381760");
    const double bits = log2_big(got);
    SuiteResult r;
    r.name = "keyspace_size(20) = " + got.str() + " ≈ 2^" + detail::fmt("%.1f", bits);
    r.pass = got == expected && got == oracle;
    return r;
}

inline SuiteResult float_vector(float x, const Float32Components &want, const char *label) {
    const auto c = decompose_f32(x);
    SuiteResult r;
    r.name = std::string("decompose(") + label + ") = (" + std::to_string(c.sign) + "," +
             std::to_string(c.exponent) + "," + std::to_string(c.m1) + "," +
             std::to_string(c.m2) + "," + std::to_string(c.m3) + ")";
    r.pass = c.sign == want.sign && c.exponent == want.exponent && c.m1 == want.m1 &&
             c.m2 == want.m2 && c.m3 == want.m3 && recompose_f32(c) == x;
    return r;
}

inline std::vector<SuiteResult> float_vectors() {
    Float32Components a, b;
    a.sign = 0, a.exponent = 127, a.m1 = 110, a.m2 = 20, a.m3 = 61;
    b.sign = 0, b.exponent = 126, b.m1 = 250, b.m2 = 225, b.m3 = 36;
    return {float_vector(1.43f, a, "1.43"), float_vector(0.99f, b, "0.99")};
}

/// Every suite, in reporting order.
inline std::vector<SuiteResult> run_all(const Options &opt) {
    std::vector<SuiteResult> out;
    out.push_back(blakely_exhaustive());
    out.push_back(masked_reduce_identity(opt));
    out.push_back(shuffle_equivalence(opt));
    for (auto &r : uniformity(opt))
        out.push_back(std::move(r));
    out.push_back(secret_invariants(opt));
    out.push_back(keyspace());
    for (auto &r : float_vectors())
        out.push_back(std::move(r));
    return out;
}

} // namespace shuffleguard::verify
