// Copyright 2026 The Coinvest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COINVEST_OUTPUT_HPP
#define COINVEST_OUTPUT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace coinvest {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double x) {
  if (x == 0.0) return "0";  // also folds -0
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

/// RFC 4180 field: quoted when it contains a comma, quote, CR or LF.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Accumulates CSV text with CRLF line breaks.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::initializer_list<std::string_view> header) { row(header); }

  void row(std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (std::string_view f : fields) {
      if (!first) text_ += ',';
      text_ += csv_field(f);
      first = false;
    }
    text_ += "\r\n";
  }

  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `content` to a temporary file next to `path`, then renames it into
/// place, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw OutputError("failed writing '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError("cannot move output into place at '" + path.string() + "'");
  }
}

/// `out` with its extension replaced, e.g. run.csv -> run_nu.csv for ("_nu", ".csv").
inline std::filesystem::path sibling(const std::filesystem::path& out, std::string_view suffix,
                                     std::string_view extension) {
  return out.parent_path() / (out.stem().string() + std::string(suffix) + std::string(extension));
}

}  // namespace coinvest

#endif  // COINVEST_OUTPUT_HPP
