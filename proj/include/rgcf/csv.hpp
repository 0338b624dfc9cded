/*
 * Copyright 2026 The RGCF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef RGCF_CSV_HPP
#define RGCF_CSV_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

#include "rgcf/core_types.hpp"

namespace rgcf {

/// Nine significant digits; "nan", "inf" and "-inf" for non-finite values.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
      : out_(path, std::ios::trunc), path_(path) {
    if (!out_) throw Error(ErrorKind::Io, "cannot write " + path.string());
    bool first = true;
    for (auto h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  CsvWriter& cell(std::string_view v) {
    if (!row_empty_) out_ << ',';
    out_ << v;
    row_empty_ = false;
    return *this;
  }
  CsvWriter& cell(double v) { return cell(format_double(v)); }
  CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }
  CsvWriter& cell(long long v) { return cell(std::to_string(v)); }

  void end_row() {
    out_ << '\n';
    row_empty_ = true;
  }
  void flush() {
    out_.flush();
    if (!out_) throw Error(ErrorKind::Io, "write failed for " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  bool row_empty_ = true;
};

}  // namespace rgcf

#endif  // RGCF_CSV_HPP
