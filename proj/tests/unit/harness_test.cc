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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mfc/error.h"
#include "mfc/harness.h"

using namespace mfc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mfc_harness_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(MFC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_json(const fs::path& dir, const std::string& name,
                    const json& doc) {
  fs::path p = dir / name;
  std::ofstream(p) << doc.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind parse_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInvalidState;
}

json bound_table_doc() {
  return json::parse(R"({
    "command": "bound-table",
    "seed": 1,
    "bound_table": {
      "constants": {"m_r": 1.0, "l_r": 0.5, "l_p": 0.2, "l_q": 0.0,
                    "gamma": 0.5, "nx": 4, "nu": 4},
      "populations": [[100], [50, 50]]
    }
  })");
}

}  // namespace

TEST_CASE("schema errors are config errors") {
  json ok = bound_table_doc();
  CHECK_NOTHROW(parse_config(ok));

  json unknown = ok;
  unknown["colour"] = "blue";
  CHECK(parse_error(unknown) == ErrorKind::kConfigError);

  json no_seed = ok;
  no_seed.erase("seed");
  CHECK(parse_error(no_seed) == ErrorKind::kConfigError);

  json bad_command = ok;
  bad_command["command"] = "fly";
  CHECK(parse_error(bad_command) == ErrorKind::kConfigError);

  CHECK(parse_error(json::array()) == ErrorKind::kConfigError);
}

TEST_CASE("overrides replace seed and threads") {
  ExperimentConfig c = parse_config(bound_table_doc(), 99, 4);
  CHECK(c.seed == 99);
  CHECK(c.threads == 4);
  CHECK(c.doc["seed"] == 99);
}

TEST_CASE("config hash ignores threads and tracks everything else") {
  json a = bound_table_doc();
  json b = a;
  b["threads"] = 8;
  CHECK(config_hash(a) == config_hash(b));
  json c = a;
  c["seed"] = 2;
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
  // Key order in the source text does not matter.
  json d = json::parse(R"({"seed": 1, "command": "bound-table",
    "bound_table": {"populations": [[100], [50, 50]],
      "constants": {"nu": 4, "nx": 4, "gamma": 0.5, "l_q": 0.0, "l_p": 0.2,
                    "l_r": 0.5, "m_r": 1.0}}})");
  CHECK(config_hash(a) == config_hash(d));
}

TEST_CASE("exact binomial deviation") {
  CHECK(appendix_m_exact(1, 50) == doctest::Approx(0.0));
  // dim = 2, n = 2: |k/2 - 1/2| is 1/2 w.p. 1/2, so 2 * 1/4.
  CHECK(appendix_m_exact(2, 2) == doctest::Approx(0.5));
  CHECK(appendix_m_exact(32, 200) == doctest::Approx(0.3147366692963361).epsilon(1e-12));
}

TEST_CASE("run_command maps bad sections to exit code 2") {
  json doc = bound_table_doc();
  doc["bound_table"]["populations"] = "many";
  fs::path out = scratch("bad_section");
  RunResult r = run_command(parse_config(doc), out);
  CHECK(r.exit_code == kExitConfigError);
  CHECK(fs::exists(out / "summary.json"));
}

TEST_CASE("cli smoke runs") {
  fs::path dir = scratch("cli");
  fs::path cfg = write_json(dir, "bt.json", bound_table_doc());

  CHECK(run_cli("bound-table --config " + cfg.string() + " --out " +
                (dir / "a").string()) == 0);
  CHECK(fs::exists(dir / "a" / "bound_table.csv"));
  json summary = json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary.contains("wall_seconds"));

  // Same run twice gives identical CSV bytes.
  CHECK(run_cli("bound-table --config " + cfg.string() + " --out " +
                (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "bound_table.csv") == slurp(dir / "b" / "bound_table.csv"));

  // Subcommand and config disagree.
  CHECK(run_cli("npg-run --config " + cfg.string() + " --out " +
                (dir / "c").string()) == kExitConfigError);
  // Missing file and missing options.
  CHECK(run_cli("bound-table --config " + (dir / "nope.json").string() +
                " --out " + (dir / "d").string()) != 0);
  CHECK(run_cli("bound-table") != 0);

  // Malformed JSON.
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(run_cli("bound-table --config " + (dir / "broken.json").string() +
                " --out " + (dir / "e").string()) == kExitConfigError);
}

TEST_CASE("shipped configs parse") {
  for (const char* name :
       {"verify_appendix_m.json", "gap_sweep_congestion.json",
        "lemma_certify.json", "npg_bandit.json", "npg_congestion.json",
        "bound_table.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(fs::path(MFC_CONFIG_DIR) / name));
  }
}

TEST_CASE("small npg run through the cli") {
  fs::path dir = scratch("npg");
  json doc = json::parse(R"({
    "command": "npg-run", "seed": 3,
    "env": {"name": "bandit", "params": {"rewards": [0.2, 1.0]}},
    "policy": {"kind": "zeros"},
    "npg": {"eta": 8.0, "alpha": 0.1, "J": 5, "L": 32}
  })");
  fs::path cfg = write_json(dir, "npg.json", doc);
  CHECK(run_cli("npg-run --config " + cfg.string() + " --out " +
                (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "npg_iterates.csv"));
  CHECK(fs::exists(dir / "out" / "final_policy.json"));

  doc["npg"]["alpha"] = 1e4;
  doc["npg"]["L"] = 64;
  cfg = write_json(dir, "npg_div.json", doc);
  CHECK(run_cli("npg-run --config " + cfg.string() + " --out " +
                (dir / "div").string()) == kExitDiverged);
}
