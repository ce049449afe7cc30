// Copyright 2026 The mfc Authors
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

#include "mfc/csv.h"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace mfc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> columns)
    : out_(out), ncols_(columns.size()) {
  for (size_t i = 0; i < columns.size(); ++i) {
    out_ << (i ? "," : "") << columns[i];
  }
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(int64_t v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (filled_ == ncols_) throw std::logic_error("csv row overflow");
  out_ << (filled_ ? "," : "") << v;
  ++filled_;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != ncols_) throw std::logic_error("csv row underflow");
  out_ << '\n';
  filled_ = 0;
}

void write_provenance(std::ostream& out, const std::string& config_hash) {
  out << "# mfc_version=" << MFC_VERSION << ", config_hash=" << config_hash
      << '\n';
}

}  // namespace mfc
