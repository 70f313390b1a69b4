// prosody-cli.cc

// Copyright 2026  The prosody-asr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "prosody/commands.h"
#include "prosody/run-config.h"

int main(int argc, char *argv[]) {
  using namespace prosody;
  const char *usage =
      "Joint ASR and pitch-accent detection pipeline.\n"
      "Commands: prepare, train, decode, score, selftrain, report.\n"
      "Output directory precedence: --out, then $PROSODY_OUT_DIR, then\n"
      "[paths] out.\n";
  CLI::App app(usage, "prosody-cli");
  std::string command, config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  app.add_option("command", command, "prepare|train|decode|score|selftrain|report")
      ->required();
  app.add_option("--config", config_path, "INI run configuration");
  app.add_option("--seed", seed, "Overrides [run] seed");
  app.add_option("--out", out, "Overrides the output directory");
  app.add_option("--workers", workers, "Overrides [run] workers")
      ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (!IsCommand(command)) {
    std::cerr << "prosody-cli: unknown command '" << command << "'\n"
              << app.help();
    return kExitUsage;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = RunConfig::Load(config_path);
    if (seed) cfg.seed = *seed;
    if (const char *env = std::getenv(kOutDirEnv); env && *env) cfg.out = env;
    if (out) cfg.out = *out;
    if (workers) cfg.workers = *workers;
    cfg.Validate();
  } catch (const ConfigError &e) {
    std::cerr << "prosody-cli: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    RunCommand(command, cfg, std::cerr);
  } catch (const ConfigError &e) {
    std::cerr << "prosody-cli " << command << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "prosody-cli " << command << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
