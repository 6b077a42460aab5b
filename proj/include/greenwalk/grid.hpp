#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace greenwalk {

using Point = std::vector<double>;
using ScalarFunction = std::function<double(std::span<const double>)>;

/// Uniform periodic box grid on [-L, L)^d with N points per axis.
///
/// Flat indices are lexicographic with the first axis slowest, which is the
/// row-major layout FFTW expects. Node j on an axis sits at -L + j*h, so the
/// origin is node N/2.
class GridSpec {
 public:
  static constexpr std::size_t kDefaultMaxPoints = std::size_t{1} << 24;

  GridSpec(int dim, std::size_t points_per_axis, double half_width,
           std::size_t max_points = kDefaultMaxPoints);

  int dim() const noexcept { return dim_; }
  std::size_t points_per_axis() const noexcept { return n_; }
  double half_width() const noexcept { return half_width_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return size_; }
  /// h^d, the trapezoidal cell volume.
  double cell_volume() const noexcept { return cell_volume_; }

  double coordinate(std::size_t axis_index) const noexcept;
  /// Coordinate of node `axis_index` when the origin is moved to node 0
  /// (wrapped layout used for convolution kernels).
  double wrapped_coordinate(std::size_t axis_index) const noexcept;

  void unflatten(std::size_t flat, std::span<std::size_t> out) const noexcept;
  std::size_t flatten(std::span<const std::size_t> idx) const noexcept;
  void point(std::size_t flat, std::span<double> out) const noexcept;
  void wrapped_point(std::size_t flat, std::span<double> out) const noexcept;

  std::size_t center_index() const noexcept;
  /// Flat index of the node at `x`, or size() if `x` is not a node.
  std::size_t node_index(std::span<const double> x, double tol = 1e-9) const noexcept;
  /// Flat index of the mirror node -x (periodic).
  std::size_t mirror_index(std::size_t flat) const noexcept;
  /// True if any coordinate of the node equals -L.
  bool on_boundary(std::size_t flat) const noexcept;

  bool operator==(const GridSpec& other) const noexcept;

 private:
  int dim_;
  std::size_t n_;
  double half_width_;
  double spacing_;
  std::size_t size_;
  double cell_volume_;
};

/// Real samples on a GridSpec. Immutable in spirit: operations return new fields.
class FieldGrid {
 public:
  FieldGrid(GridSpec grid, std::vector<double> values);

  static FieldGrid sample(const GridSpec& grid, const ScalarFunction& fn);
  static FieldGrid constant(const GridSpec& grid, double value);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  double integral() const;
  double sup_norm() const;
  double l1_norm() const;
  double at_point(std::span<const double> x) const;

  FieldGrid operator+(const FieldGrid& other) const;
  FieldGrid operator-(const FieldGrid& other) const;
  FieldGrid scaled(double factor) const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

double max_abs_difference(const FieldGrid& a, const FieldGrid& b);

}  // namespace greenwalk
