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

#include <stdexcept>
#include <string>

namespace shuffleguard {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Modular inverse requested for a value sharing a factor with the modulus.
class NotCoprime : public DomainError {
  public:
    using DomainError::DomainError;
};

class DimensionMismatch : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class LengthMismatch : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Time-sample range outside the traces.
class RangeError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Trace layout lacks the segments an analysis needs.
class LayoutError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable file.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace shuffleguard
