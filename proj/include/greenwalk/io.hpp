#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenwalk/green.hpp"
#include "greenwalk/renorm.hpp"
#include "greenwalk/simulate.hpp"
#include "greenwalk/subordinate.hpp"

namespace greenwalk::io {

using nlohmann::json;

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Header plus rows, comma separated, '\n' line ends.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  CsvWriter& row(const std::vector<double>& values);
  const std::string& str() const noexcept { return out_; }

 private:
  std::size_t columns_;
  std::string out_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Little-endian: u32 dim, u32 N, f64 L, then N^d f64 values.
std::string field_binary(const FieldGrid& field);
FieldGrid parse_field_binary(const std::string& bytes);

/// Columns i0.., x0.., value. `flat` selects a subset of nodes (all when empty).
std::string field_csv(const FieldGrid& field, const std::vector<std::size_t>& flat = {});
/// Nodes on the line through the grid centre along the first axis.
std::vector<std::size_t> axis_line(const GridSpec& grid);

json resolvent_metadata(const ResolventKernel& g);

std::string histogram_csv(const OccupationHistogram& h);
json histogram_metadata(const OccupationHistogram& h);

json subordinator_json(const SubordinatorSpec& spec);
SubordinatorSpec subordinator_from_json(const json& j);

std::string renorm_csv(const RenormCurve& c);

}  // namespace greenwalk::io
