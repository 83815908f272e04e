#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dacc/errors.hpp"

namespace dacc {

struct ImageSize {
  std::size_t width = 0;
  std::size_t height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Head centres in source-image pixel coordinates; every point lies in
/// [0, width) x [0, height).
class HeadAnnotations {
 public:
  HeadAnnotations() = default;
  /// Throws ValidationError on out-of-bounds points.
  HeadAnnotations(ImageSize source_size, std::vector<Point> points);

  const ImageSize& source_size() const { return size_; }
  const std::vector<Point>& points() const { return points_; }
  std::size_t count() const { return points_.size(); }

 private:
  ImageSize size_{};
  std::vector<Point> points_;
};

/// Row-major 2-D field; Tag keeps density, count and class maps apart.
template <typename V, typename Tag>
class Field {
 public:
  using value_type = V;

  Field() = default;
  Field(std::size_t rows, std::size_t cols, V fill = V(0)) : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Field(std::size_t rows, std::size_t cols, std::vector<V> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) throw ShapeError("field data length does not match its extents");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  V& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  V at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<V> values() { return values_; }
  std::span<const V> values() const { return values_; }

  double sum() const {
    double acc = 0;
    for (V v : values_) acc += static_cast<double>(v);
    return acc;
  }

  Field flipped_horizontal() const {
    Field out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out.at(r, cols_ - 1 - c) = at(r, c);
    return out;
  }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<V> values_;
};

using DensityMap = Field<double, struct DensityTag>;
using CountMap = Field<double, struct CountTag>;
using ClassMap = Field<std::uint8_t, struct ClassTag>;

/// H x W grid over the image; both extents must divide the pixel extents.
struct GridSpec {
  std::size_t rows = 8;
  std::size_t cols = 8;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SigmaMode {
  enum class Kind { fixed, geometry_adaptive };
  Kind kind = Kind::fixed;
  double sigma = 4.0;    ///< fixed spread, and fallback for adaptive mode
  std::size_t k = 3;     ///< neighbours for adaptive mode
  double beta = 0.3;     ///< sigma = beta * mean kNN distance

  static SigmaMode fixed(double sigma) { return {Kind::fixed, sigma, 3, 0.3}; }
  static SigmaMode adaptive(std::size_t k, double beta, double fallback_sigma = 4.0) {
    return {Kind::geometry_adaptive, fallback_sigma, k, beta};
  }
};

/// Per-head spread for geometry-adaptive kernels: beta times the mean distance
/// to the min(k, n-1) nearest neighbours. Heads with a zero mean distance, or
/// sets of fewer than two heads, get `fallback`.
std::vector<double> adaptive_sigmas(std::span<const Point> points, std::size_t k, double beta, double fallback);

/// Sum of unit-mass discrete Gaussians, one per head, truncated to a disk of
/// radius 3 sigma. Points are rescaled from the annotation's source size to
/// `out_size` first. Mass falling outside the image is dropped.
DensityMap density_map(const HeadAnnotations& ann, ImageSize out_size, const SigmaMode& mode);

/// Block sums of the density map. Throws ValidationError if the grid does
/// not divide the map extents.
CountMap count_map(const DensityMap& density, GridSpec grid);

/// 0 where count <= th, 1 otherwise.
ClassMap class_map(const CountMap& counts, double th);

/// Median of every strictly positive cell pooled across the maps (mean of the
/// two middle values for an even pool). Throws ValidationError when no cell
/// is positive.
double calibrate_threshold(std::span<const CountMap> maps);

/// `override_th` when set, otherwise calibrate_threshold(maps).
double resolve_threshold(std::optional<double> override_th, std::span<const CountMap> maps);

/// Annotations mirrored left-to-right: x -> width - x.
HeadAnnotations flip_horizontal(const HeadAnnotations& ann);

}  // namespace dacc
