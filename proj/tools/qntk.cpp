/* Copyright 2026 The qntk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qntk/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitContract = 3;
constexpr int kExitFailure = 1;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qntk::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Line and column of a byte offset reported by the JSON parser.
std::string position_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

qntk::json parse_config(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return qntk::json::parse(text);
  } catch (const qntk::json::parse_error& e) {
    throw qntk::ConfigError(path + ": " + position_of(text, e.byte) + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qntk: quantum neural tangent kernel experiments"};
  app.set_version_flag("--version", std::string(qntk::kVersion));
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool print_config = false;

  std::string names;
  for (const auto& n : qntk::experiments::names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "Experiment to run: " + names)->required();
  app.add_option("--config", config_path, "JSON config file (keys override the defaults)");
  app.add_option("--seed", seed, "Master seed, overrides the config");
  app.add_option("--out", out_dir, "Output directory, overrides the config");
  app.add_flag("--print-config", print_config, "Print the resolved config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (!qntk::experiments::is_known(experiment))
      throw qntk::ConfigError("unknown experiment '" + experiment + "' (expected one of: " + names + ")");
    qntk::json user = qntk::json::object();
    if (!config_path.empty()) {
      user = parse_config(config_path);
    } else if (!print_config) {
      throw qntk::ConfigError("--config is required (use --print-config for a template)");
    }
    qntk::json resolved = qntk::experiments::resolve_config(experiment, user);
    if (seed) resolved["seed"] = *seed;
    if (!out_dir.empty()) resolved["output_dir"] = out_dir;
    if (print_config) {
      std::cout << resolved.dump(2) << "\n";
      return 0;
    }
    const auto result = qntk::experiments::run(resolved);
    std::cout << result.summary.dump(2) << "\n";
    std::cerr << "wrote " << result.files.size() + 1 << " files to "
              << resolved.at("output_dir").get<std::string>() << "\n";
    return 0;
  } catch (const qntk::ConfigError& e) {
    std::cerr << "config error [" << experiment << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qntk::json::exception& e) {
    std::cerr << "config error [" << experiment << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qntk::ContractViolation& e) {
    std::cerr << "numerical contract violation [" << experiment << "]: " << e.what() << "\n";
    return kExitContract;
  } catch (const qntk::StepSizeError& e) {
    std::cerr << "numerical contract violation [" << experiment << "]: " << e.what() << "\n";
    return kExitContract;
  } catch (const qntk::Error& e) {
    std::cerr << "config error [" << experiment << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error [" << experiment << "]: " << e.what() << "\n";
    return kExitFailure;
  }
}
