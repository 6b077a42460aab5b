#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "greenwalk.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(GREENWALK_TEST_DIR) / "cli_work";

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

// Runs the CLI; returns its exit status, stdout in `out`.
int cli(const std::string& args, std::string* out = nullptr, const std::string& env = "") {
  const fs::path capture = kWork / "stdout.txt";
  const std::string cmd = env + " \"" GREENWALK_CLI "\" " + args + " > \"" + capture.string() +
                          "\" 2> \"" + (kWork / "stderr.txt").string() + "\"";
  const int raw = std::system(cmd.c_str());
  if (out) *out = slurp(capture);
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

json listing() {
  char* raw = nullptr;
  REQUIRE(gw_list_experiments(&raw) == GW_OK);
  const json j = json::parse(raw);
  gw_string_free(raw);
  return j;
}

std::set<std::string> files_in(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), dir).string());
  }
  return out;
}

struct Setup {
  Setup() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};
const Setup setup;

}  // namespace

TEST_CASE("every library operation is reachable from an experiment") {
  const char* ops[] = {
      "validate_kernel", "boundary_density", "fit_small_k_expansion", "fourier_complement",
      "convolve_power", "KernelOnGrid", "green_regular_series", "green_regular_fourier",
      "check_green_existence", "require_green_existence", "apply_generator", "evolve_semigroup",
      "potential", "PotentialOperator", "potential_spectral", "semigroup_pointwise",
      "truncation_tail_estimate", "box_integral", "cl_norm", "sample_cpp_path", "walk_intervals",
      "sample_jump", "mc_expectation", "block_monte_carlo", "sample_random_potential",
      "mc_truncated_potential", "empirical_random_green_measure", "mc_random_green_measure",
      "block_histogram", "check_H", "check_admissible", "sample_increment",
      "sample_inverse_subordinator", "sample_inverse_subordinator_path", "RhoDensity",
      "rho_density", "talbot_inverse", "time_averaged_ratio", "sample_memory_kernel", "gfd_apply",
      "subordinated_solution", "mc_time_changed_expectation", "normalization_N",
      "capped_subordinator_mean", "require_renormalization_hypotheses",
      "renormalized_potential_curve", "renormalized_green_histogram", "fke_residual",
      "field_binary", "field_csv", "resolvent_metadata", "subordinator_json"};
  std::set<std::string> reached;
  for (const auto& e : listing()) {
    for (const auto& op : e["operations"]) reached.insert(op.get<std::string>());
  }
  for (const char* op : ops) {
    CAPTURE(op);
    CHECK(reached.count(op) == 1);
  }
}

TEST_CASE("list is sorted, stable and has at least 13 experiments") {
  std::string a, b;
  REQUIRE(cli("list", &a) == 0);
  REQUIRE(cli("list", &b) == 0);
  CHECK(a == b);
  const json items = listing();
  CHECK(items.size() >= 13);
  std::string prev;
  for (const auto& e : items) {
    const std::string name = e["name"];
    CHECK(prev < name);
    CHECK(a.find(name) != std::string::npos);
    prev = name;
  }
}

TEST_CASE("every experiment name round-trips through validation") {
  for (const auto& e : listing()) {
    const std::string name = e["name"];
    CAPTURE(name);
    json cfg = {{"schema", "greenwalk/1"}, {"experiment", name}};
    if (e["stochastic"].get<bool>()) cfg["mc"] = {{"seed", 1}};
    char* resolved = nullptr;
    REQUIRE(gw_validate_config(cfg.dump().c_str(), &resolved) == GW_OK);
    const std::string once = resolved;
    gw_string_free(resolved);
    REQUIRE(gw_validate_config(once.c_str(), &resolved) == GW_OK);
    CHECK(once == resolved);
    gw_string_free(resolved);
  }
}

TEST_CASE("d = 1 potential exits with the divergence code") {
  put(kWork / "p1.json",
      R"({"schema":"greenwalk/1","experiment":"potential","kernel":{"family":"gaussian","dim":1}})");
  std::string out;
  CHECK(cli("run \"" + (kWork / "p1.json").string() + "\"", &out) == GW_DIVERGENT_GREEN_MEASURE);
  const json err = json::parse(out);
  CHECK(err["error"] == "DivergentGreenMeasure");
  CHECK(err["code"] == 5);
  CHECK(err["message"].get<std::string>().find("d = 1") != std::string::npos);
}

TEST_CASE("config errors are machine readable") {
  put(kWork / "bad.json", R"({"schema":"greenwalk/1","experiment":"rho","colour":"red"})");
  put(kWork / "unknown.json", R"({"schema":"greenwalk/1","experiment":"teleport"})");
  put(kWork / "broken.json", "{not json");
  std::string out;
  CHECK(cli("run \"" + (kWork / "bad.json").string() + "\"", &out) == GW_CONFIG_ERROR);
  CHECK(json::parse(out)["message"].get<std::string>().find("colour") != std::string::npos);
  CHECK(cli("validate \"" + (kWork / "unknown.json").string() + "\"") == GW_UNKNOWN_EXPERIMENT);
  CHECK(cli("run \"" + (kWork / "broken.json").string() + "\"") == GW_CONFIG_ERROR);
  CHECK(cli("run \"" + (kWork / "missing.json").string() + "\"") == GW_IO_ERROR);
}

TEST_CASE("stochastic runs are byte identical and reproducible from the manifest") {
  const char* configs[] = {
      R"({"schema":"greenwalk/1","experiment":"mc-expectation","mc":{"n":3000,"seed":11},"output":"mc"})",
      R"({"schema":"greenwalk/1","experiment":"sample-path","mc":{"n":4,"seed":5},"kernel":{"family":"cauchy"},"point":[0.5],"output":"sp/path"})",
      R"({"schema":"greenwalk/1","experiment":"inverse-subordinator","mc":{"n":3000,"seed":2},"params":{"ds":0.01},"output":"inv"})",
      R"({"schema":"greenwalk/1","experiment":"renorm-histogram","mc":{"n":300,"seed":9},"horizons":{"T":50},"output":"rh"})",
  };
  int i = 0;
  for (const char* text : configs) {
    CAPTURE(text);
    const fs::path dir = kWork / ("det" + std::to_string(i++));
    put(dir / "cfg.json", text);
    const std::string cfg = "\"" + (dir / "cfg.json").string() + "\"";
    REQUIRE(cli("run " + cfg + " --out \"" + (dir / "a").string() + "\"") == 0);
    REQUIRE(cli("run " + cfg + " --threads 2 --out \"" + (dir / "b").string() + "\"") == 0);
    const auto files = files_in(dir / "a");
    CHECK(files == files_in(dir / "b"));
    for (const auto& f : files) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

    // rerun from the emitted manifest
    const std::string prefix = json::parse(text)["output"];
    const fs::path manifest = dir / "a" / (prefix + ".manifest.json");
    REQUIRE(fs::exists(manifest));
    REQUIRE(cli("run \"" + manifest.string() + "\" --out \"" + (dir / "c").string() + "\"") == 0);
    CHECK(files_in(dir / "c") == files);
    for (const auto& f : files) CHECK(slurp(dir / "a" / f) == slurp(dir / "c" / f));
  }
}

TEST_CASE("GREENWALK_SEED overrides the config seed") {
  put(kWork / "seed.json",
      R"({"schema":"greenwalk/1","experiment":"mc-expectation","mc":{"n":500,"seed":1},"output":"s"})");
  const std::string cfg = "\"" + (kWork / "seed.json").string() + "\"";
  REQUIRE(cli("run " + cfg + " --out \"" + (kWork / "s1").string() + "\"", nullptr,
              "GREENWALK_SEED=77") == 0);
  const json manifest = json::parse(slurp(kWork / "s1" / "s.manifest.json"));
  CHECK(manifest["mc"]["seed"] == 77);
  REQUIRE(cli("run " + cfg + " --out \"" + (kWork / "s2").string() + "\"") == 0);
  CHECK(slurp(kWork / "s1" / "s.csv") != slurp(kWork / "s2" / "s.csv"));
  CHECK(cli("run " + cfg, nullptr, "GREENWALK_SEED=abc") == GW_CONFIG_ERROR);
}

TEST_CASE("green-compare CSV columns") {
  put(kWork / "gc.json",
      R"({"schema":"greenwalk/1","experiment":"green-compare","grid":{"N":32,"L":20},"output":"gc"})");
  REQUIRE(cli("run \"" + (kWork / "gc.json").string() + "\" --out \"" + kWork.string() + "\"") == 0);
  const std::string csv = slurp(kWork / "gc.csv");
  CHECK(csv.rfind("x,G0_series,G0_fourier,rel_diff\n", 0) == 0);
}

TEST_CASE("C API handles and status codes") {
  CHECK(std::string(gw_status_name(GW_DIVERGENT_GREEN_MEASURE)) == "DivergentGreenMeasure");
  gw_kernel* k = nullptr;
  REQUIRE(gw_kernel_gaussian(3, &k) == GW_OK);
  int dim = 0;
  CHECK(gw_kernel_dim(k, &dim) == GW_OK);
  CHECK(dim == 3);
  const double origin[3] = {0, 0, 0};
  double v = 0.0;
  CHECK(gw_kernel_density(k, origin, &v) == GW_OK);
  CHECK(v == doctest::Approx(std::pow(4.0 * M_PI, -1.5)).epsilon(1e-14));
  CHECK(gw_kernel_density(k, nullptr, &v) == GW_INVALID_ARGUMENT);
  CHECK(std::string(gw_last_error()).find("null") != std::string::npos);

  gw_grid* g = nullptr;
  REQUIRE(gw_grid_create(3, 16, 10.0, &g) == GW_OK);
  gw_field* f = nullptr;
  REQUIRE(gw_convolve_power(k, 2, g, &f) == GW_OK);
  const std::string path = (kWork / "field.bin").string();
  CHECK(gw_field_save(f, path.c_str()) == GW_OK);
  gw_field* back = nullptr;
  REQUIRE(gw_field_load(path.c_str(), &back) == GW_OK);
  std::size_t n = 0, m = 0;
  gw_field_size(f, &n);
  gw_field_size(back, &m);
  REQUIRE(n == 4096);
  REQUIRE(m == n);
  std::vector<double> a(n), b(n);
  gw_field_values(f, a.data(), n);
  gw_field_values(back, b.data(), n);
  CHECK(a == b);

  gw_kernel* k1 = nullptr;
  REQUIRE(gw_kernel_gaussian(1, &k1) == GW_OK);
  gw_function* fk = nullptr;
  REQUIRE(gw_function_kernel_density(k1, &fk) == GW_OK);
  CHECK(gw_potential(k1, fk, origin, &v) == GW_DIVERGENT_GREEN_MEASURE);
  int exists = -1;
  CHECK(gw_kernel_green_existence(k1, &exists) == GW_OK);
  CHECK(exists == 1);

  gw_subordinator* s = nullptr;
  REQUIRE(gw_subordinator_stable(0.5, &s) == GW_OK);
  CHECK(gw_rho_density(s, 1.0, 0.0, &v) == GW_OK);
  CHECK(v == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-12));
  CHECK(gw_set_threads(0) == GW_INVALID_ARGUMENT);

  gw_subordinator_free(s);
  gw_function_free(fk);
  gw_kernel_free(k1);
  gw_field_free(back);
  gw_field_free(f);
  gw_grid_free(g);
  gw_kernel_free(k);
}
