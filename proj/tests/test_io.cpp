#include "doctest.h"

#include <charconv>
#include <cmath>
#include <cstring>
#include <set>

#include "greenwalk/errors.hpp"
#include "greenwalk/experiments.hpp"
#include "greenwalk/io.hpp"

using namespace greenwalk;
using nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{0};
}

json base(const char* experiment) { return {{"schema", "greenwalk/1"}, {"experiment", experiment}}; }

}  // namespace

TEST_CASE("shortest round-trip number formatting") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(-2.5e-300) == "-2.5e-300");
  for (double v : {1.0 / 3.0, std::sqrt(2.0), 6.02214076e23, 5e-324}) {
    const std::string txt = io::format_double(v);
    double back = 0.0;
    std::from_chars(txt.data(), txt.data() + txt.size(), back);
    CHECK(back == v);
  }
  io::CsvWriter csv({"a", "b"});
  csv.row({1.0, 0.25});
  CHECK(csv.str() == "a,b\n1,0.25\n");
  CHECK(code_of([&] { csv.row({1.0}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("field binary layout and round trip") {
  const GridSpec g(2, 8, 3.5);
  const FieldGrid f = FieldGrid::sample(g, [](std::span<const double> x) { return x[0] - 2 * x[1]; });
  const std::string bytes = io::field_binary(f);
  REQUIRE(bytes.size() == 16 + 8 * 64);
  std::uint32_t d, n;
  double L, first;
  std::memcpy(&d, bytes.data(), 4);
  std::memcpy(&n, bytes.data() + 4, 4);
  std::memcpy(&L, bytes.data() + 8, 8);
  std::memcpy(&first, bytes.data() + 16, 8);
  CHECK(d == 2);
  CHECK(n == 8);
  CHECK(L == 3.5);
  CHECK(first == f[0]);
  const FieldGrid back = io::parse_field_binary(bytes);
  CHECK(back.grid() == g);
  CHECK(max_abs_difference(back, f) == 0.0);
  CHECK(code_of([&] { io::parse_field_binary(bytes.substr(0, 100)); }) == ErrorCode::kIoError);
}

TEST_CASE("field CSV columns") {
  const GridSpec g(1, 8, 4.0);
  const FieldGrid f = FieldGrid::constant(g, 2.0);
  const std::string csv = io::field_csv(f, io::axis_line(g));
  CHECK(csv.rfind("i0,x0,value\n0,-4,2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("subordinator JSON round trip") {
  const auto s = make_gamma_subordinator(2.0, 0.5);
  const json j = io::subordinator_json(s);
  CHECK(j["family"] == "gamma");
  const auto back = io::subordinator_from_json(j);
  CHECK(back.phi(3.0) == s.phi(3.0));
  CHECK(code_of([] { io::subordinator_from_json({{"family", "stable"}, {"params", {{"beta", 1}}}}); }) ==
        ErrorCode::kConfigError);
}

TEST_CASE("config resolution is strict and idempotent") {
  for (const auto& e : experiments::registry()) {
    CAPTURE(e.name);
    const json ex = experiments::example_config(e.name);
    CHECK(experiments::resolve_config(ex) == ex);
  }

  auto code = [](const json& cfg) { return code_of([&] { experiments::resolve_config(cfg); }); };
  json c = base("potential");
  CHECK(code(c) == ErrorCode{0});
  c["colour"] = 1;
  CHECK(code(c) == ErrorCode::kConfigError);
  c = base("potential");
  c["kernel"] = {{"family", "gaussian"}, {"dim", 3}, {"shape", 2}};
  CHECK(code(c) == ErrorCode::kConfigError);
  c = base("potential");
  c["params"] = {{"lambda", 1.0}};
  CHECK(code(c) == ErrorCode::kConfigError);
  c = base("potential");
  c["tolerances"] = {{"tol", -1.0}};
  CHECK(code(c) == ErrorCode::kConfigError);
  c = base("potential");
  c["subordinator"] = json::object();
  CHECK(code(c) == ErrorCode::kConfigError);
  c = base("potential");
  c["schema"] = "greenwalk/0";
  CHECK(code(c) == ErrorCode::kConfigError);
  CHECK(code(base("no-such-thing")) == ErrorCode::kUnknownExperiment);
  // stochastic experiments need a seed
  CHECK(code(base("mc-expectation")) == ErrorCode::kConfigError);
  c = base("mc-expectation");
  c["mc"] = {{"seed", 7}};
  CHECK(code(c) == ErrorCode{0});
  c["horizons"] = {{"T", 1.0}};
  CHECK(code(c) == ErrorCode::kConfigError);
  c["horizons"] = {{"T_grid", {2.0, 1.0}}};
  CHECK(code(c) == ErrorCode::kConfigError);
  c = base("green-compare");
  c["kernel"] = {{"family", "cauchy"}, {"dim", 2}};
  CHECK(code(c) == ErrorCode::kInvalidDimension);
}

TEST_CASE("registry listing") {
  const auto reg = experiments::registry();
  CHECK(reg.size() >= 13);
  std::set<std::string> names;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    names.insert(reg[i].name);
    if (i) CHECK(reg[i - 1].name < reg[i].name);
  }
  CHECK(names.size() == reg.size());
  CHECK(experiments::listing() == experiments::listing());
}
