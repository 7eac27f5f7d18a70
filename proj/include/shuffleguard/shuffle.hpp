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
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "shuffleguard/errors.hpp"
#include "shuffleguard/modular.hpp"
#include "shuffleguard/random.hpp"
#include "shuffleguard/secret_arrays.hpp"

#ifdef SHUFFLEGUARD_CHECK_BIJECTION
#include <stdexcept>
#define SHUFFLEGUARD_KEEP_INPUT(a) const auto shuffleguard_input_copy_ = (a)
#define SHUFFLEGUARD_ASSERT_BIJECTION(a)                                                          \
    do {                                                                                           \
        if (!std::is_permutation((a).begin(), (a).end(), shuffleguard_input_copy_.begin(),       \
                                 shuffleguard_input_copy_.end()))                                \
            throw std::logic_error("shuffle output is not a rearrangement of its input");        \
    } while (false)
#else
#define SHUFFLEGUARD_KEEP_INPUT(a) ((void)0)
#define SHUFFLEGUARD_ASSERT_BIJECTION(a) ((void)0)
#endif

namespace shuffleguard {

/// Index sequence produced by a shuffle; slot s holds element indices[s].
struct Permutation {
    std::vector<std::uint32_t> indices;

    static Permutation identity(std::size_t n) {
        Permutation p;
        p.indices.resize(n);
        std::iota(p.indices.begin(), p.indices.end(), 0U);
        return p;
    }

    std::size_t size() const noexcept { return indices.size(); }
    std::uint32_t operator[](std::size_t s) const { return indices[s]; }

    bool is_bijection() const {
        std::vector<bool> seen(indices.size(), false);
        for (auto v : indices) {
            if (v >= indices.size() || seen[v])
                return false;
            seen[v] = true;
        }
        return true;
    }

    Permutation inverse() const {
        Permutation inv;
        inv.indices.resize(indices.size());
        for (std::uint32_t s = 0; s < indices.size(); ++s)
            inv.indices[indices[s]] = s;
        return inv;
    }

    friend bool operator==(const Permutation &, const Permutation &) = default;
};

/// One iteration of a shuffle, as seen by a division-leak observer.
///
/// For plain steps the division is r mod (i + 1) and its remainder is j.
/// For masked steps the division reduces the blinded sum
/// r * s1 + r' * (i + 1) and its remainder is t; j comes from Blakely.
struct ShuffleStep {
    std::uint32_t i = 0;
    std::uint32_t r = 0;
    std::uint32_t r_prime = 0;
    std::uint64_t dividend = 0;
    std::uint32_t remainder = 0;
    std::uint32_t j = 0;
    bool masked = false;

    std::uint32_t divisor() const noexcept { return i + 1; }
};

struct NoStepObserver {
    void operator()(const ShuffleStep &) const noexcept {}
};

/// Original Fisher-Yates: for i = N-1 .. 1, j = rand() mod (i + 1), swap.
/// Self-swaps are performed like any other swap.
template <U32Source Source, class Observer = NoStepObserver>
Permutation fisher_yates(Permutation array, Source &src, Observer &&on_step = {}) {
    auto &a = array.indices;
    SHUFFLEGUARD_KEEP_INPUT(a);
    for (std::size_t i = a.size(); i-- > 1;) {
        const std::uint32_t r = src.next_u32();
        const auto j = static_cast<std::uint32_t>(r % (i + 1));
        std::swap(a[i], a[j]);
        on_step(ShuffleStep{static_cast<std::uint32_t>(i), r, 0, r, j, j, false});
    }
    SHUFFLEGUARD_ASSERT_BIJECTION(array.indices);
    return array;
}

struct MaskedReduction {
    std::uint64_t blinded = 0; ///< r * s1[i-2] + r' * (i + 1)
    std::uint32_t t = 0;       ///< blinded mod (i + 1)
    std::uint32_t j = 0;       ///< t * s2[i-2] mod (i + 1)
};

/// The masked replacement for r mod (i + 1). The blinded sum is kept in
/// 128 bits; the only remaining division is the reduction producing t.
inline MaskedReduction masked_reduction(std::uint32_t r, std::uint32_t r_prime, std::uint32_t i,
                                        const SecretArrays &secrets) {
    if (i < 2 || i + 1 > secrets.n_max)
        throw DomainError("masked_reduce: i must satisfy 2 <= i <= n_max - 1");
    const std::uint32_t modulus = i + 1;
    const unsigned __int128 blinded =
        static_cast<unsigned __int128>(r) * secrets.s1[i - 2] +
        static_cast<unsigned __int128>(r_prime) * modulus;
    MaskedReduction out;
    out.blinded = static_cast<std::uint64_t>(blinded);
    out.t = static_cast<std::uint32_t>(blinded % modulus);
    out.j = static_cast<std::uint32_t>(blakely(modulus, out.t, secrets.s2[i - 2]));
    return out;
}

inline std::uint32_t masked_reduce(std::uint32_t r, std::uint32_t r_prime, std::uint32_t i,
                                   const SecretArrays &secrets) {
    return masked_reduction(r, r_prime, i, secrets).j;
}

/// Protected Fisher-Yates. Steps i = N-1 .. 2 draw r then r', compute t by
/// the blinded reduction and j = Blakely(i + 1, t, s2[i-2]); the last step
/// (i = 1) is the plain r mod 2.
template <U32Source Source, class Observer = NoStepObserver>
Permutation protected_fisher_yates(Permutation array, const SecretArrays &secrets, Source &src,
                                   Observer &&on_step = {}) {
    auto &a = array.indices;
    const std::size_t n = a.size();
    if (n < 2)
        throw DomainError("protected_fisher_yates: need at least 2 elements");
    if (secrets.n_max < n)
        throw DomainError("protected_fisher_yates: secret arrays shorter than the array");
    SHUFFLEGUARD_KEEP_INPUT(a);

    for (std::size_t i = n - 1; i >= 2; --i) {
        const std::uint32_t r = src.next_u32();
        const std::uint32_t r_prime = src.next_u32();
        const auto ii = static_cast<std::uint32_t>(i);
        const MaskedReduction m = masked_reduction(r, r_prime, ii, secrets);
        std::swap(a[i], a[m.j]);
        on_step(ShuffleStep{ii, r, r_prime, m.blinded, m.t, m.j, true});
    }
    const std::uint32_t r = src.next_u32();
    const std::uint32_t j = r % 2;
    std::swap(a[1], a[j]);
    on_step(ShuffleStep{1, r, 0, r, j, j, false});

    SHUFFLEGUARD_ASSERT_BIJECTION(array.indices);
    return array;
}

/// Rebuilds the permutation a shuffle of n elements produces from its
/// per-step swap indices, given in execution order (i = n-1 first).
inline Permutation replay_swaps(std::size_t n, const std::vector<std::uint32_t> &js) {
    if (n > 0 && js.size() != n - 1)
        throw LengthMismatch("replay_swaps: need n - 1 swap indices");
    Permutation p = Permutation::identity(n);
    std::size_t step = 0;
    for (std::size_t i = n; i-- > 1; ++step) {
        if (js[step] > i)
            throw DomainError("replay_swaps: swap index exceeds loop index");
        std::swap(p.indices[i], p.indices[js[step]]);
    }
    return p;
}

} // namespace shuffleguard
