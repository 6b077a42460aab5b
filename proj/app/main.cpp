#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "greenwalk.h"

using nlohmann::json;

namespace {

struct Failure {
  int code;
  std::string message;
};

void check(gw_status s) {
  if (s != GW_OK) throw Failure{static_cast<int>(s), gw_last_error()};
}

std::string take(char* s) {
  std::string out(s ? s : "");
  gw_string_free(s);
  return out;
}

json read_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Failure{GW_IO_ERROR, "cannot open " + path};
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Failure{GW_CONFIG_ERROR, path + ": " + e.what()};
  }
}

bool is_stochastic(const std::string& name) {
  char* raw = nullptr;
  check(gw_list_experiments(&raw));
  for (const auto& e : json::parse(take(raw))) {
    if (e.at("name") == name) return e.at("stochastic").get<bool>();
  }
  return false;
}

// GREENWALK_SEED replaces mc.seed for stochastic experiments.
void apply_seed_override(json& cfg) {
  const char* env = std::getenv("GREENWALK_SEED");
  if (!env || !*env) return;
  std::uint64_t seed = 0;
  try {
    std::size_t used = 0;
    seed = std::stoull(env, &used, 10);
    if (used != std::strlen(env)) throw std::invalid_argument(env);
  } catch (const std::exception&) {
    throw Failure{GW_CONFIG_ERROR, std::string("GREENWALK_SEED is not an unsigned integer: ") + env};
  }
  if (!cfg.is_object() || !cfg.contains("experiment") || !cfg["experiment"].is_string()) return;
  if (!is_stochastic(cfg["experiment"].get<std::string>())) return;
  cfg["mc"]["seed"] = seed;
}

int report(const Failure& f) {
  const json err = {{"error", gw_status_name(static_cast<gw_status>(f.code))},
                    {"code", f.code},
                    {"message", f.message}};
  std::cout << err.dump(2) << '\n';
  return f.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"greenwalk: Green measures of compound Poisson processes and their time changes"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int threads = 1;
  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "directory for relative output prefixes");

  bool list_json = false;
  auto* list = app.add_subcommand("list", "list experiments");
  list->add_flag("--json", list_json, "machine-readable listing");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config and print it fully resolved");
  validate->add_option("config", validate_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      char* raw = nullptr;
      check(gw_list_experiments(&raw));
      const json items = json::parse(take(raw));
      if (list_json) {
        std::cout << items.dump(2) << '\n';
        return 0;
      }
      std::size_t width = 0;
      for (const auto& e : items) width = std::max(width, e.at("name").get<std::string>().size());
      for (const auto& e : items) {
        const std::string name = e.at("name");
        std::cout << name << std::string(width - name.size() + 2, ' ')
                  << e.at("doc").get<std::string>() << '\n';
      }
      return 0;
    }

    if (*validate) {
      json cfg = read_config(validate_path);
      apply_seed_override(cfg);
      char* resolved = nullptr;
      check(gw_validate_config(cfg.dump().c_str(), &resolved));
      std::cout << take(resolved) << '\n';
      return 0;
    }

    json cfg = read_config(config_path);
    apply_seed_override(cfg);
    check(gw_set_threads(threads));
    std::cerr << "greenwalk: " << cfg.value("experiment", std::string("?")) << " (threads "
              << threads << ")\n";
    const auto start = std::chrono::steady_clock::now();
    char* summary = nullptr;
    check(gw_run_experiment(cfg.dump().c_str(), out_dir.c_str(), &summary));
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::cerr << "greenwalk: done in " << elapsed.count() << " s\n";
    std::cout << take(summary) << '\n';
    return 0;
  } catch (const Failure& f) {
    return report(f);
  }
}
