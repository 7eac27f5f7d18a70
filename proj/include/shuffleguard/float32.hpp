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

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "shuffleguard/errors.hpp"

namespace shuffleguard {

inline std::uint32_t f32_bits(float x) noexcept { return std::bit_cast<std::uint32_t>(x); }

/// Hamming weight of the binary32 encoding.
inline int hamming_weight(float x) noexcept { return std::popcount(f32_bits(x)); }

/// Fields a weight-recovery attack targets separately.
///
/// The mantissa split follows the published recovery vectors: m1 is bits
/// 22..15 (eight bits), m2 bits 15..7 (nine bits, sharing bit 15 with m1),
/// m3 bits 6..0.
struct Float32Components {
    std::uint32_t sign = 0;
    std::uint32_t exponent = 0;
    std::uint32_t m1 = 0;
    std::uint32_t m2 = 0;
    std::uint32_t m3 = 0;
    std::uint32_t raw_mantissa = 0;

    friend bool operator==(const Float32Components &, const Float32Components &) = default;
};

enum class Component { sign, exponent, m1, m2, m3 };

inline constexpr std::array<Component, 5> kAllComponents{Component::sign, Component::exponent,
                                                          Component::m1, Component::m2,
                                                          Component::m3};

constexpr std::string_view component_name(Component c) noexcept {
    switch (c) {
    case Component::sign:
        return "sign";
    case Component::exponent:
        return "exponent";
    case Component::m1:
        return "m1";
    case Component::m2:
        return "m2";
    case Component::m3:
        return "m3";
    }
    return "?";
}

/// Number of distinct values a component can take.
constexpr std::uint32_t component_cardinality(Component c) noexcept {
    switch (c) {
    case Component::sign:
        return 2;
    case Component::exponent:
    case Component::m1:
        return 256;
    case Component::m2:
        return 512;
    case Component::m3:
        return 128;
    }
    return 0;
}

constexpr Float32Components decompose_bits(std::uint32_t bits) noexcept {
    Float32Components c;
    c.sign = bits >> 31;
    c.exponent = (bits >> 23) & 0xFFU;
    c.raw_mantissa = bits & 0x7FFFFFU;
    c.m1 = c.raw_mantissa >> 15;
    c.m2 = (c.raw_mantissa >> 7) & 0x1FFU;
    c.m3 = c.raw_mantissa & 0x7FU;
    return c;
}

inline Float32Components decompose_f32(float x) {
    if (!std::isfinite(x))
        throw DomainError("decompose_f32: value must be finite");
    return decompose_bits(f32_bits(x));
}

inline float recompose_f32(const Float32Components &c) noexcept {
    return std::bit_cast<float>((c.sign << 31) | (c.exponent << 23) | c.raw_mantissa);
}

constexpr std::uint32_t component_value(const Float32Components &c, Component which) noexcept {
    switch (which) {
    case Component::sign:
        return c.sign;
    case Component::exponent:
        return c.exponent;
    case Component::m1:
        return c.m1;
    case Component::m2:
        return c.m2;
    case Component::m3:
        return c.m3;
    }
    return 0;
}

/// Distance in units in the last place between two finite floats.
inline std::uint32_t ulp_distance(float a, float b) noexcept {
    auto ordered = [](float v) {
        const auto bits = static_cast<std::int64_t>(f32_bits(v));
        return bits & 0x80000000LL ? 0x80000000LL - bits : bits;
    };
    const std::int64_t d = ordered(a) - ordered(b);
    return static_cast<std::uint32_t>(d < 0 ? -d : d);
}

} // namespace shuffleguard
