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

#include "shuffleguard/bench.hpp"
#include "shuffleguard/config.hpp"
#include "shuffleguard/cpa.hpp"
#include "shuffleguard/errors.hpp"
#include "shuffleguard/float32.hpp"
#include "shuffleguard/leakage.hpp"
#include "shuffleguard/modular.hpp"
#include "shuffleguard/network.hpp"
#include "shuffleguard/random.hpp"
#include "shuffleguard/reorder.hpp"
#include "shuffleguard/secret_arrays.hpp"
#include "shuffleguard/shuffle.hpp"
#include "shuffleguard/stats.hpp"
#include "shuffleguard/trace_io.hpp"
#include "shuffleguard/verify.hpp"
