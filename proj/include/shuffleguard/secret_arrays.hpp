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

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "shuffleguard/errors.hpp"
#include "shuffleguard/modular.hpp"
#include "shuffleguard/random.hpp"

namespace shuffleguard {

/// Paired masking arrays for the protected shuffle.
///
/// Entry k serves the reduction modulo k + 3: s1[k] is a positive value
/// coprime with k + 3 and s2[k] its inverse modulo k + 3, so s2[k] lies in
/// [1, k + 2]. One pair of arrays sized for the widest layer serves every
/// layer of a network.
struct SecretArrays {
    std::uint32_t n_max = 0;
    std::vector<std::uint32_t> s1;
    std::vector<std::uint32_t> s2;

    std::size_t size() const noexcept { return s1.size(); }

    /// Storage for both arrays, in bytes, at 32 bits per entry.
    std::size_t memory_bytes() const noexcept {
        return (s1.size() + s2.size()) * sizeof(std::uint32_t);
    }

    /// Description of the first violated invariant, if any.
    std::optional<std::string> violation() const {
        if (n_max < 3)
            return "n_max >= 3";
        if (s1.size() != n_max - 2U || s2.size() != n_max - 2U)
            return "length(s1) = length(s2) = n_max - 2";
        for (std::size_t k = 0; k < s1.size(); ++k) {
            const std::uint64_t m = k + 3;
            const std::string at = " at k=" + std::to_string(k);
            if (s1[k] == 0)
                return "s1[k] > 0" + at;
            if (std::gcd<std::uint64_t, std::uint64_t>(s1[k], m) != 1)
                return "gcd(s1[k], k+3) = 1" + at;
            if (s2[k] < 1 || s2[k] > m - 1)
                return "1 <= s2[k] <= k+2" + at;
            if ((static_cast<std::uint64_t>(s1[k]) * s2[k]) % m != 1)
                return "s1[k] * s2[k] mod (k+3) = 1" + at;
        }
        return std::nullopt;
    }
};

/// Largest value drawn for an s1 entry.
inline constexpr std::uint32_t kSecretBound = 1U << 16;

template <U32Source Source>
SecretArrays gen_secret_arrays(std::uint32_t n_max, Source &src) {
    if (n_max < 3)
        throw DomainError("gen_secret_arrays: n_max must be >= 3");
    SecretArrays out;
    out.n_max = n_max;
    out.s1.resize(n_max - 2);
    out.s2.resize(n_max - 2);
    for (std::uint32_t k = 0; k + 2 < n_max; ++k) {
        const std::uint32_t m = k + 3;
        std::uint32_t candidate;
        do {
            candidate = (src.next_u32() & (kSecretBound - 1)) + 1;
        } while (std::gcd(candidate, m) != 1);
        out.s1[k] = candidate;
        out.s2[k] = static_cast<std::uint32_t>(mod_inverse(candidate % m, m));
    }
    return out;
}

inline void to_json(nlohmann::json &j, const SecretArrays &s) {
    j = nlohmann::json{{"n_max", s.n_max}, {"s1", s.s1}, {"s2", s.s2}};
}

inline void from_json(const nlohmann::json &j, SecretArrays &s) {
    j.at("n_max").get_to(s.n_max);
    j.at("s1").get_to(s.s1);
    j.at("s2").get_to(s.s2);
    if (auto bad = s.violation())
        throw FormatError("secret arrays violate invariant: " + *bad);
}

} // namespace shuffleguard
