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

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace shuffleguard {

/// Anything the shuffles can draw rand() values from.
template <class S>
concept U32Source = requires(S &s) {
    { s.next_u32() } -> std::same_as<std::uint32_t>;
};

/// Deterministic SplitMix64 generator (Steele, Lea, Flood 2014).
///
/// State is a single 64-bit counter advanced by the golden-ratio increment;
/// each output is the finalizer of the new counter value. The sequence is
/// fully specified by integer arithmetic, so it is bit-identical on every
/// platform. next_u32 returns the upper 32 bits of one 64-bit output.
class RandomSource {
  public:
    explicit constexpr RandomSource(std::uint64_t seed) noexcept
        : seed_(seed), state_(seed) {}

    constexpr std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    constexpr std::uint32_t next_u32() noexcept {
        return static_cast<std::uint32_t>(next_u64() >> 32);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [lo, hi], rejection sampled (no modulo bias).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi < lo)
            throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0)
            return static_cast<std::int64_t>(next_u64());
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span) - 1;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v > limit);
        return lo + static_cast<std::int64_t>(v % span);
    }

    constexpr void skip(std::uint64_t n) noexcept { state_ += n * 0x9E3779B97F4A7C15ULL; }

    constexpr std::uint64_t seed() const noexcept { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

/// Independent child seed for stream `index` of a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    RandomSource mix(parent ^ (index * 0xD1B54A32D192ED03ULL));
    mix.next_u64();
    return mix.next_u64();
}

/// Replays a fixed list of values; used to script step-through tests.
class ScriptedSource {
  public:
    explicit ScriptedSource(std::vector<std::uint32_t> values)
        : values_(std::move(values)) {}

    std::uint32_t next_u32() {
        if (pos_ >= values_.size())
            throw std::out_of_range("ScriptedSource exhausted");
        return values_[pos_++];
    }

    std::size_t consumed() const noexcept { return pos_; }

  private:
    std::vector<std::uint32_t> values_;
    std::size_t pos_ = 0;
};

/// Gaussian noise via Box-Muller over a RandomSource. Uses only
/// portable arithmetic on the uniform draws (std::normal_distribution is
/// implementation-defined).
class NoiseSource {
  public:
    explicit NoiseSource(std::uint64_t seed) : src_(seed) {}

    double standard_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = src_.next_unit();
        while (u1 <= 0.0)
            u1 = src_.next_unit();
        const double u2 = src_.next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double gaussian(double sigma) { return sigma == 0.0 ? 0.0 : sigma * standard_normal(); }

  private:
    RandomSource src_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace shuffleguard
