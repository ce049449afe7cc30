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

#ifndef MFC_CSV_H_
#define MFC_CSV_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace mfc {

// Shortest text that round-trips the double.
std::string format_double(double v);

// Writes "# key=value, ..." provenance lines, one header row, then rows.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> columns);

  CsvWriter& cell(double v);
  CsvWriter& cell(int64_t v);
  CsvWriter& cell(int v) { return cell(static_cast<int64_t>(v)); }
  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(const char* v) { return cell(std::string(v)); }
  void end_row();

 private:
  std::ostream& out_;
  size_t ncols_;
  size_t filled_ = 0;
};

// "# mfc_version=..., config_hash=..." comment line every emitted CSV starts
// with.
void write_provenance(std::ostream& out, const std::string& config_hash);

}  // namespace mfc

#endif  // MFC_CSV_H_
