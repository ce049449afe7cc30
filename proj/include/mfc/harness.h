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

#ifndef MFC_HARNESS_H_
#define MFC_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

namespace mfc {

// Process exit codes of the command-line tool.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDiverged = 3;

struct ExperimentConfig {
  std::string command;
  uint64_t seed = 0;
  int threads = 1;
  nlohmann::json doc;  // full document after overrides, used for hashing
};

// Validates the top-level schema. Command-specific sections are checked by
// the command itself. Overrides replace the document's seed and threads.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              std::optional<uint64_t> seed_override = {},
                              std::optional<int> threads_override = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<uint64_t> seed_override = {},
                             std::optional<int> threads_override = {});

// FNV-1a 64 over the canonical dump without "threads", as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

struct RunResult {
  int exit_code = kExitPass;
  nlohmann::json summary;
};

RunResult run_verify_appendix_m(const ExperimentConfig& cfg,
                                const std::filesystem::path& out);
RunResult run_gap_sweep(const ExperimentConfig& cfg,
                        const std::filesystem::path& out);
RunResult run_lemma_certify(const ExperimentConfig& cfg,
                            const std::filesystem::path& out);
RunResult run_npg(const ExperimentConfig& cfg,
                  const std::filesystem::path& out);
RunResult run_bound_table(const ExperimentConfig& cfg,
                          const std::filesystem::path& out);

// Dispatches on cfg.command, writes summary.json next to the CSVs and maps
// library errors onto exit codes.
RunResult run_command(const ExperimentConfig& cfg,
                      const std::filesystem::path& out);

// dim * E|Bin(n_pop, 1/dim)/n_pop - 1/dim|, by direct summation.
double appendix_m_exact(int dim, int64_t n_pop);

}  // namespace mfc

#endif  // MFC_HARNESS_H_
