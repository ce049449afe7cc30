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

#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "mfc/error.h"
#include "mfc/harness.h"

int main(int argc, char** argv) {
  CLI::App app{"Multi-class mean-field control toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> threads;

  static const std::pair<const char*, const char*> kCommands[] = {
      {"verify-appendix-m", "Counterexample deviations vs the sqrt(|U|) bound"},
      {"gap-sweep", "N-agent vs mean-field value gap over a population sweep"},
      {"lemma-certify", "Continuity and deviation inequalities on built-in envs"},
      {"npg-run", "Natural policy gradient training"},
      {"bound-table", "Closed-form approximation bounds and their orderings"}};
  for (const auto& [name, help] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--threads", threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Overrides the config seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mfc::kExitConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  mfc::ExperimentConfig cfg;
  try {
    cfg = mfc::load_config(config_path, seed, threads);
  } catch (const mfc::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mfc::kExitConfigError;
  }
  if (cfg.command != command) {
    std::cerr << "config error: config is for '" << cfg.command
              << "' but the subcommand is '" << command << "'\n";
    return mfc::kExitConfigError;
  }

  const mfc::RunResult result = mfc::run_command(cfg, out_dir);
  const auto& r = result.summary["result"];
  if (r.contains("error")) {
    std::cerr << r["error"].get<std::string>() << ": "
              << r["message"].get<std::string>() << "\n";
  } else {
    std::cout << r.dump() << "\n";
  }
  return result.exit_code;
}
