#include "greenwalk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"

namespace greenwalk {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidDimension: return "InvalidDimension";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kAliasingViolation: return "AliasingViolation";
    case ErrorCode::kDivergentGreenMeasure: return "DivergentGreenMeasure";
    case ErrorCode::kUnknownTailParams: return "UnknownTailParams";
    case ErrorCode::kNegativeSample: return "NegativeSample";
    case ErrorCode::kAsymmetricTable: return "AsymmetricTable";
    case ErrorCode::kZeroMass: return "ZeroMass";
    case ErrorCode::kDegenerateFit: return "DegenerateFit";
    case ErrorCode::kTruncationCap: return "TruncationCap";
    case ErrorCode::kQuadratureFailure: return "QuadratureFailure";
    case ErrorCode::kInversionInstability: return "InversionInstability";
    case ErrorCode::kStepCapExceeded: return "StepCapExceeded";
    case ErrorCode::kAdmissibilityFailure: return "AdmissibilityFailure";
    case ErrorCode::kInvalidKernel: return "InvalidKernel";
    case ErrorCode::kNotSupported: return "NotSupported";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kUnknownExperiment: return "UnknownExperiment";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

GridSpec::GridSpec(int dim, std::size_t points_per_axis, double half_width,
                   std::size_t max_points)
    : dim_(dim), n_(points_per_axis), half_width_(half_width) {
  require(dim >= 1, ErrorCode::kInvalidDimension, "grid dimension must be >= 1");
  require(points_per_axis >= 8 && (points_per_axis & (points_per_axis - 1)) == 0,
          ErrorCode::kInvalidArgument,
          "points_per_axis must be a power of two >= 8, got " +
              std::to_string(points_per_axis));
  require(std::isfinite(half_width) && half_width > 0.0, ErrorCode::kInvalidArgument,
          "half_width must be positive");
  size_ = 1;
  for (int a = 0; a < dim; ++a) {
    require(size_ <= max_points / n_, ErrorCode::kInvalidArgument,
            "grid exceeds the point budget of " + std::to_string(max_points));
    size_ *= n_;
  }
  spacing_ = 2.0 * half_width / static_cast<double>(n_);
  cell_volume_ = std::pow(spacing_, dim);
}

double GridSpec::coordinate(std::size_t i) const noexcept {
  return -half_width_ + static_cast<double>(i) * spacing_;
}

double GridSpec::wrapped_coordinate(std::size_t i) const noexcept {
  const auto signed_i = i < n_ / 2 ? static_cast<double>(i)
                                   : static_cast<double>(i) - static_cast<double>(n_);
  return signed_i * spacing_;
}

void GridSpec::unflatten(std::size_t flat, std::span<std::size_t> out) const noexcept {
  for (int a = dim_ - 1; a >= 0; --a) {
    out[a] = flat % n_;
    flat /= n_;
  }
}

std::size_t GridSpec::flatten(std::span<const std::size_t> idx) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + idx[a];
  return flat;
}

void GridSpec::point(std::size_t flat, std::span<double> out) const noexcept {
  for (int a = dim_ - 1; a >= 0; --a) {
    out[a] = coordinate(flat % n_);
    flat /= n_;
  }
}

void GridSpec::wrapped_point(std::size_t flat, std::span<double> out) const noexcept {
  for (int a = dim_ - 1; a >= 0; --a) {
    out[a] = wrapped_coordinate(flat % n_);
    flat /= n_;
  }
}

std::size_t GridSpec::center_index() const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + n_ / 2;
  return flat;
}

std::size_t GridSpec::node_index(std::span<const double> x, double tol) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) {
    const double u = (x[a] + half_width_) / spacing_;
    const double r = std::round(u);
    if (std::abs(u - r) > tol || r < 0.0 || r >= static_cast<double>(n_)) return size_;
    flat = flat * n_ + static_cast<std::size_t>(r);
  }
  return flat;
}

std::size_t GridSpec::mirror_index(std::size_t flat) const noexcept {
  std::size_t out = 0;
  std::size_t stride = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    const std::size_t i = flat % n_;
    flat /= n_;
    out += ((n_ - i) % n_) * stride;
    stride *= n_;
  }
  return out;
}

bool GridSpec::on_boundary(std::size_t flat) const noexcept {
  for (int a = 0; a < dim_; ++a) {
    if (flat % n_ == 0) return true;
    flat /= n_;
  }
  return false;
}

bool GridSpec::operator==(const GridSpec& o) const noexcept {
  return dim_ == o.dim_ && n_ == o.n_ && half_width_ == o.half_width_;
}

FieldGrid::FieldGrid(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorCode::kGridMismatch,
          "field length " + std::to_string(values_.size()) + " does not match grid size " +
              std::to_string(grid_.size()));
  for (double v : values_) {
    require(std::isfinite(v), ErrorCode::kInvalidArgument, "field values must be finite");
  }
}

FieldGrid FieldGrid::sample(const GridSpec& grid, const ScalarFunction& fn) {
  std::vector<double> values(grid.size());
  Point x(grid.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    values[i] = fn(x);
  }
  return FieldGrid(grid, std::move(values));
}

FieldGrid FieldGrid::constant(const GridSpec& grid, double value) {
  return FieldGrid(grid, std::vector<double>(grid.size(), value));
}

double FieldGrid::integral() const {
  return grid_.cell_volume() * pairwise_sum(values_);
}

double FieldGrid::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double FieldGrid::l1_norm() const {
  std::vector<double> abs_values(values_.size());
  std::transform(values_.begin(), values_.end(), abs_values.begin(),
                 [](double v) { return std::abs(v); });
  return grid_.cell_volume() * pairwise_sum(abs_values);
}

double FieldGrid::at_point(std::span<const double> x) const {
  const std::size_t idx = grid_.node_index(x);
  require(idx < grid_.size(), ErrorCode::kInvalidArgument, "point is not a grid node");
  return values_[idx];
}

FieldGrid FieldGrid::operator+(const FieldGrid& other) const {
  require(grid_ == other.grid_, ErrorCode::kGridMismatch, "fields live on different grids");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] + other.values_[i];
  return FieldGrid(grid_, std::move(out));
}

FieldGrid FieldGrid::operator-(const FieldGrid& other) const {
  require(grid_ == other.grid_, ErrorCode::kGridMismatch, "fields live on different grids");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] - other.values_[i];
  return FieldGrid(grid_, std::move(out));
}

FieldGrid FieldGrid::scaled(double factor) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= factor;
  return FieldGrid(grid_, std::move(out));
}

double max_abs_difference(const FieldGrid& a, const FieldGrid& b) {
  require(a.grid() == b.grid(), ErrorCode::kGridMismatch, "fields live on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace greenwalk
