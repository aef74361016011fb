/*
 * Copyright 2026 The skipland Authors
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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "skipland/models.hpp"

namespace skipland {

/// Text checkpoint layout:
///
///   skipland-checkpoint 1
///   family skip|two-layer|linear
///   dims <name> <value> ...
///   inner <count> <size> ...        (skip and linear only)
///   matrices <K>
///   matrix <name> <rows> <cols>
///   <row-major entries, %.17g>
///
/// Reading back a written checkpoint reproduces every entry bit for bit.
using AnyParams = std::variant<SkipNetParams, TwoLayerParams, LinearSkipParams>;

std::string family_name(const AnyParams& p);

void write_checkpoint(std::ostream& out, const AnyParams& p);
AnyParams read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const AnyParams& p);
AnyParams load_checkpoint(const std::filesystem::path& path);

/// Typed loads; InvalidInput when the file holds a different family.
SkipNetParams load_skip_checkpoint(const std::filesystem::path& path);
TwoLayerParams load_two_layer_checkpoint(const std::filesystem::path& path);
LinearSkipParams load_linear_checkpoint(const std::filesystem::path& path);

}  // namespace skipland
