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

#include <iosfwd>

namespace skipland {

/// Entry point of the skipland tool. Returns 0 on success, 1 on invalid
/// input or configuration, 2 on numerical failure. Every input is read and
/// validated and every result computed before the output directory is touched.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skipland
