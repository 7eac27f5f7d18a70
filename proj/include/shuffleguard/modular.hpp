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

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "shuffleguard/errors.hpp"

namespace shuffleguard {

using BigInt = boost::multiprecision::cpp_int;

/// Modular multiplication (a * b) mod n by Blakely's bit-serial method.
///
/// Walks the bits of `a` from the most significant one down, doubling the
/// accumulator and adding `b` when the bit is set. Since R < n before each
/// step, 2R + b <= 3n - 3, so two conditional subtractions restore R < n.
/// No division or remainder instruction is used.
constexpr std::uint64_t blakely(std::uint64_t n, std::uint64_t a, std::uint64_t b) {
    if (n < 2)
        throw DomainError("blakely: modulus must be >= 2");
    if (a >= n || b >= n)
        throw DomainError("blakely: operands must be < modulus");
    if (n > (UINT64_MAX / 4))
        throw DomainError("blakely: modulus too large for 64-bit accumulator");

    std::uint64_t acc = 0;
    for (int bit = std::bit_width(a) - 1; bit >= 0; --bit) {
        acc = 2 * acc + (((a >> bit) & 1U) ? b : 0);
        if (acc >= n)
            acc -= n;
        if (acc >= n)
            acc -= n;
    }
    return acc;
}

/// x in [1, m-1] with (a * x) mod m == 1, by the extended Euclidean algorithm.
constexpr std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
    if (m < 2)
        throw DomainError("mod_inverse: modulus must be >= 2");
    if (a == 0)
        throw DomainError("mod_inverse: value must be positive");

    std::int64_t old_r = static_cast<std::int64_t>(a % m), r = static_cast<std::int64_t>(m);
    std::int64_t old_s = 1, s = 0;
    while (r != 0) {
        const std::int64_t q = old_r / r;
        std::int64_t tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
    }
    if (old_r != 1)
        throw NotCoprime("mod_inverse: " + std::to_string(a) + " and " + std::to_string(m) +
                         " are not coprime");
    std::int64_t x = old_s % static_cast<std::int64_t>(m);
    if (x < 0)
        x += static_cast<std::int64_t>(m);
    return static_cast<std::uint64_t>(x);
}

/// Euler's totient by trial division.
constexpr std::uint64_t totient(std::uint64_t n) {
    if (n == 0)
        return 0;
    std::uint64_t result = n;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            while (n % p == 0)
                n /= p;
            result -= result / p;
        }
    }
    if (n > 1)
        result -= result / n;
    return result;
}

/// Number of admissible S2 arrays for shuffles of up to n elements:
/// the product of phi(k) for k = 3..n.
inline BigInt keyspace_size(std::uint64_t n) {
    if (n < 3)
        throw DomainError("keyspace_size: n must be >= 3");
    BigInt product = 1;
    for (std::uint64_t k = 3; k <= n; ++k)
        product *= totient(k);
    return product;
}

inline double log2_big(const BigInt &value) {
    if (value <= 0)
        return -std::numeric_limits<double>::infinity();
    const auto bits = boost::multiprecision::msb(value);
    if (bits < 52)
        return std::log2(value.convert_to<double>());
    const BigInt top = value >> (bits - 52);
    return static_cast<double>(bits - 52) + std::log2(top.convert_to<double>());
}

} // namespace shuffleguard
