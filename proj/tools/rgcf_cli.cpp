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
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rgcf/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "experiment seed (overrides the config)");
  cmd->add_option("--out", opt.out, "output directory (overrides the config)");
  cmd->add_option("--set", opt.sets, "override one key, e.g. --set steps=2000")->type_name("KEY=VALUE");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust SGD lab: gradient filter, robust aggregators, attacks"};
  app.require_subcommand(1);
  Options opt;
  const char* commands[][2] = {
      {"train-filter", "train a gradient filter and save it"},
      {"run", "one training run with the filter or an aggregation rule"},
      {"bench", "time filtering and aggregation decisions"},
      {"compare", "convergence grid over methods, attacks and Byzantine fractions"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(rgcf::ExitCode::Validation);
  }

  rgcf::ExperimentConfig cfg;
  try {
    if (!opt.config.empty()) cfg.load_file(opt.config);
    for (const auto& s : opt.sets) cfg.set_assignment(s);
    if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
    if (!opt.out.empty()) cfg.set("out", opt.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(rgcf::ExitCode::Validation);
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return static_cast<int>(rgcf::run_command(command, cfg, std::cout, std::cerr));
}
