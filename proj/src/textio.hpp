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

// Token-level helpers shared by the dataset, checkpoint and config readers.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <string>

#include "skipland/errors.hpp"

namespace skipland::textio {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& tok, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  // Underflow to a subnormal is accepted; overflow is caught by the finiteness test.
  if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v)) {
    throw InvalidInput("bad number for " + what + ": '" + tok + "'");
  }
  return v;
}

inline long long parse_int(const std::string& tok, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE) {
    throw InvalidInput("bad integer for " + what + ": '" + tok + "'");
  }
  return v;
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next(const std::string& what) {
    std::string tok;
    if (!(in_ >> tok)) throw InvalidInput("unexpected end of input reading " + what);
    return tok;
  }

  void expect(const std::string& keyword) {
    const std::string tok = next(keyword);
    if (tok != keyword) {
      throw InvalidInput("expected '" + keyword + "', found '" + tok + "'");
    }
  }

  double real(const std::string& what) { return parse_double(next(what), what); }

  long long integer(const std::string& what) { return parse_int(next(what), what); }

  long long count(const std::string& what) {
    const long long v = integer(what);
    if (v < 0) throw InvalidInput(what + " must be non-negative");
    return v;
  }

  /// True if only whitespace remains.
  bool at_end() {
    in_ >> std::ws;
    return in_.peek() == std::char_traits<char>::eof();
  }

 private:
  std::istream& in_;
};

}  // namespace skipland::textio
