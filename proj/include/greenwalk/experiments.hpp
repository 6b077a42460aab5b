#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace greenwalk::experiments {

using nlohmann::json;

inline constexpr const char* kSchema = "greenwalk/1";

struct ExperimentInfo {
  std::string name;
  std::string doc;
  // Library operations the experiment calls.
  std::vector<std::string> operations;
  bool stochastic = false;
};

/// All experiments, sorted by name.
std::vector<ExperimentInfo> registry();
const ExperimentInfo& find(const std::string& name);

/// Validates a config and fills every default. The result is a fixed point:
/// resolving it again returns it unchanged.
json resolve_config(const json& config);

/// Small config for `name` that passes validation.
json example_config(const std::string& name);

struct RunResult {
  json summary;
  std::vector<std::filesystem::path> files;
};

/// Runs one experiment. Relative output prefixes are placed under out_dir.
RunResult run(const json& config, const std::filesystem::path& out_dir = ".");

/// One line per experiment: name, two spaces, doc.
std::string listing();

}  // namespace greenwalk::experiments
