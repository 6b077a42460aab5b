#include "greenwalk/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "greenwalk/errors.hpp"

namespace greenwalk::io {

static_assert(std::endian::native == std::endian::little, "binary field format assumes little-endian");

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ += ',';
    out_ += header[i];
  }
  out_ += '\n';
}

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
  require(values.size() == columns_, ErrorCode::kInvalidArgument, "CSV row has the wrong width");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ += ',';
    out_ += format_double(values[i]);
  }
  out_ += '\n';
  return *this;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) fail(ErrorCode::kIoError, "write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

namespace {

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  require(pos + sizeof(T) <= in.size(), ErrorCode::kIoError, "truncated field file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string field_binary(const FieldGrid& field) {
  const auto& g = field.grid();
  std::string out;
  out.reserve(16 + 8 * field.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_axis()));
  put<double>(out, g.half_width());
  for (double v : field.values()) put<double>(out, v);
  return out;
}

FieldGrid parse_field_binary(const std::string& bytes) {
  std::size_t pos = 0;
  const auto d = get<std::uint32_t>(bytes, pos);
  const auto n = get<std::uint32_t>(bytes, pos);
  const auto L = get<double>(bytes, pos);
  GridSpec grid(static_cast<int>(d), n, L);
  require(bytes.size() == pos + 8 * grid.size(), ErrorCode::kIoError,
          "field file size does not match its header");
  std::vector<double> values(grid.size());
  for (auto& v : values) v = get<double>(bytes, pos);
  return FieldGrid(grid, std::move(values));
}

std::string field_csv(const FieldGrid& field, const std::vector<std::size_t>& flat) {
  const auto& g = field.grid();
  const int d = g.dim();
  std::vector<std::string> header;
  for (int a = 0; a < d; ++a) header.push_back("i" + std::to_string(a));
  for (int a = 0; a < d; ++a) header.push_back("x" + std::to_string(a));
  header.push_back("value");
  CsvWriter csv(header);
  std::vector<std::size_t> idx(d);
  std::vector<double> x(d), row(2 * d + 1);
  auto emit = [&](std::size_t m) {
    g.unflatten(m, idx);
    g.point(m, x);
    for (int a = 0; a < d; ++a) {
      row[a] = static_cast<double>(idx[a]);
      row[d + a] = x[a];
    }
    row[2 * d] = field[m];
    csv.row(row);
  };
  if (flat.empty()) {
    for (std::size_t m = 0; m < g.size(); ++m) emit(m);
  } else {
    for (std::size_t m : flat) emit(m);
  }
  return csv.str();
}

std::vector<std::size_t> axis_line(const GridSpec& grid) {
  std::vector<std::size_t> idx(grid.dim(), grid.points_per_axis() / 2);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.points_per_axis(); ++i) {
    idx[0] = i;
    out.push_back(grid.flatten(idx));
  }
  return out;
}

json resolvent_metadata(const ResolventKernel& g) {
  json j;
  j["lambda"] = g.lambda;
  j["d"] = g.kernel.dim();
  const auto& tp = g.kernel.tail_params();
  j["alpha"] = tp ? json(tp->alpha) : json(nullptr);
  j["A"] = tp ? json(tp->A) : json(nullptr);
  j["tol"] = g.tol;
  j["n_terms"] = g.n_terms;
  j["singular_weight"] = g.singular_weight;
  j["tail_estimate"] = g.tail_estimate;
  j["extrapolated"] = g.extrapolated;
  j["grid"] = {{"N", g.regular_part.grid().points_per_axis()},
               {"L", g.regular_part.grid().half_width()}};
  return j;
}

std::string histogram_csv(const OccupationHistogram& h) {
  const int d = h.bins.dim();
  std::vector<std::string> header{"bin"};
  for (int a = 0; a < d; ++a) header.push_back("c" + std::to_string(a));
  header.push_back("mass");
  header.push_back("std_error");
  CsvWriter csv(header);
  for (std::size_t b = 0; b < h.bins.size(); ++b) {
    std::vector<double> row{static_cast<double>(b)};
    for (double c : h.bins.center(b)) row.push_back(c);
    row.push_back(h.masses[b]);
    row.push_back(h.std_errors[b]);
    csv.row(row);
  }
  return csv.str();
}

json histogram_metadata(const OccupationHistogram& h) {
  return {{"lower", h.bins.lower()},   {"width", h.bins.width()},
          {"per_axis", h.bins.per_axis()}, {"horizon", h.horizon},
          {"n_paths", h.n_paths},      {"seed", h.seed},
          {"escaped", h.escaped},      {"total", h.total()}};
}

json subordinator_json(const SubordinatorSpec& spec) {
  return {{"family", spec.family()}, {"params", spec.params()}};
}

SubordinatorSpec subordinator_from_json(const json& j) {
  require(j.is_object() && j.contains("family") && j["family"].is_string(),
          ErrorCode::kConfigError, "subordinator needs a string 'family'");
  const auto family = j["family"].get<std::string>();
  const json params = j.value("params", json::object());
  require(params.is_object(), ErrorCode::kConfigError, "subordinator 'params' must be an object");
  auto number = [&](const char* key) {
    require(params.contains(key) && params[key].is_number(), ErrorCode::kConfigError,
            "subordinator '" + family + "' needs numeric parameter '" + key + "'");
    return params[key].get<double>();
  };
  auto only = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : params.items()) {
      bool known = false;
      for (const char* key : keys) known = known || k == key;
      require(known, ErrorCode::kConfigError, "unknown subordinator parameter '" + k + "'");
    }
  };
  if (family == "stable") {
    only({"alpha"});
    return make_stable_subordinator(number("alpha"));
  }
  if (family == "gamma") {
    only({"a", "b"});
    return make_gamma_subordinator(number("a"), number("b"));
  }
  fail(ErrorCode::kConfigError, "unknown subordinator family '" + family + "'");
}

std::string renorm_csv(const RenormCurve& c) {
  CsvWriter csv({"T", "N", "value", "target", "rel_gap"});
  for (std::size_t i = 0; i < c.T_grid.size(); ++i) {
    csv.row({c.T_grid[i], c.N_values[i], c.values[i], c.target, c.rel_gaps[i]});
  }
  return csv.str();
}

}  // namespace greenwalk::io
