#include "dacc/groundtruth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dacc {

namespace {

// Coordinates are snapped to 1/256 px before rasterising so that mirrored
// inputs give bit-identical offsets (x -> W - x is exact on this lattice).
constexpr double kLattice = 256.0;

double snap(double v) { return std::round(v * kLattice) / kLattice; }

// Sums a row from both ends inward; a reversed row yields the identical result.
template <typename Get>
double mirror_stable_sum(long lo, long hi, Get get) {
  double acc = 0.0;
  while (lo < hi) {
    acc += get(lo) + get(hi);
    ++lo;
    --hi;
  }
  if (lo == hi) acc += get(lo);
  return acc;
}

}  // namespace

HeadAnnotations::HeadAnnotations(ImageSize source_size, std::vector<Point> points)
    : size_(source_size), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point& p = points_[i];
    const bool inside = p.x >= 0.0 && p.y >= 0.0 && p.x < static_cast<double>(size_.width) &&
                        p.y < static_cast<double>(size_.height);
    if (!inside) {
      throw ValidationError("head " + std::to_string(i) + " at (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ") lies outside the " + std::to_string(size_.width) + "x" +
                            std::to_string(size_.height) + " image");
    }
  }
}

std::vector<double> adaptive_sigmas(std::span<const Point> points, std::size_t k, double beta, double fallback) {
  const std::size_t n = points.size();
  std::vector<double> sigmas(n, fallback);
  if (n < 2 || k == 0) return sigmas;
  const std::size_t neighbours = std::min(k, n - 1);
  std::vector<double> dist;
  dist.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      dist.push_back(dx * dx + dy * dy);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(neighbours), dist.end());
    double mean = 0.0;
    for (std::size_t j = 0; j < neighbours; ++j) mean += std::sqrt(dist[j]);
    mean /= static_cast<double>(neighbours);
    if (mean > 0.0) sigmas[i] = beta * mean;
  }
  return sigmas;
}

DensityMap density_map(const HeadAnnotations& ann, ImageSize out_size, const SigmaMode& mode) {
  if (out_size.width == 0 || out_size.height == 0) throw ValidationError("density map size must be positive");
  if (!(mode.sigma > 0.0)) throw ValidationError("density map sigma must be positive");
  DensityMap map(out_size.height, out_size.width);
  if (ann.count() == 0) return map;

  const ImageSize src = ann.source_size();
  const double sx = static_cast<double>(out_size.width) / static_cast<double>(src.width);
  const double sy = static_cast<double>(out_size.height) / static_cast<double>(src.height);
  std::vector<Point> pts;
  pts.reserve(ann.count());
  for (const Point& p : ann.points()) pts.push_back({snap(p.x * sx), snap(p.y * sy)});

  std::vector<double> sigmas(pts.size(), mode.sigma);
  if (mode.kind == SigmaMode::Kind::geometry_adaptive) sigmas = adaptive_sigmas(pts, mode.k, mode.beta, mode.sigma);

  const long width = static_cast<long>(out_size.width);
  const long height = static_cast<long>(out_size.height);
  std::vector<double> gx;
  for (std::size_t h = 0; h < pts.size(); ++h) {
    const double sigma = sigmas[h];
    const double radius = 3.0 * sigma;
    const double r2 = radius * radius;
    const double inv = 1.0 / (2.0 * sigma * sigma);
    const Point c = pts[h];
    // pixel p has centre p + 0.5
    const long y0 = static_cast<long>(std::ceil(c.y - 0.5 - radius));
    const long y1 = static_cast<long>(std::floor(c.y - 0.5 + radius));
    const long x0 = static_cast<long>(std::ceil(c.x - 0.5 - radius));
    const long x1 = static_cast<long>(std::floor(c.x - 0.5 + radius));

    auto dx_of = [&](long px) { return (static_cast<double>(px) + 0.5) - c.x; };
    auto dy_of = [&](long py) { return (static_cast<double>(py) + 0.5) - c.y; };
    auto row_span = [&](long py, long& lo, long& hi) {
      const double dy = dy_of(py);
      lo = x1 + 1;
      hi = x0 - 1;
      for (long px = x0; px <= x1; ++px) {
        const double dx = dx_of(px);
        if (dx * dx + dy * dy <= r2) {
          lo = std::min(lo, px);
          hi = std::max(hi, px);
        }
      }
    };

    gx.assign(static_cast<std::size_t>(std::max<long>(0, x1 - x0 + 1)), 0.0);
    for (long px = x0; px <= x1; ++px) {
      const double dx = dx_of(px);
      gx[static_cast<std::size_t>(px - x0)] = std::exp(-dx * dx * inv);
    }

    double norm = 0.0;
    for (long py = y0; py <= y1; ++py) {
      long lo = 0, hi = 0;
      row_span(py, lo, hi);
      if (lo > hi) continue;
      const double dy = dy_of(py);
      const double gy = std::exp(-dy * dy * inv);
      norm += gy * mirror_stable_sum(lo, hi, [&](long px) { return gx[static_cast<std::size_t>(px - x0)]; });
    }
    if (!(norm > 0.0)) continue;

    for (long py = std::max<long>(y0, 0); py <= std::min<long>(y1, height - 1); ++py) {
      long lo = 0, hi = 0;
      row_span(py, lo, hi);
      const double dy = dy_of(py);
      const double gy = std::exp(-dy * dy * inv);
      for (long px = std::max<long>(lo, 0); px <= std::min<long>(hi, width - 1); ++px) {
        map.at(static_cast<std::size_t>(py), static_cast<std::size_t>(px)) +=
            gx[static_cast<std::size_t>(px - x0)] * gy / norm;
      }
    }
  }
  return map;
}

CountMap count_map(const DensityMap& density, GridSpec grid) {
  if (grid.rows == 0 || grid.cols == 0 || density.rows() % grid.rows != 0 || density.cols() % grid.cols != 0) {
    throw ValidationError("grid " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                          " does not divide density map " + std::to_string(density.rows()) + "x" +
                          std::to_string(density.cols()));
  }
  const std::size_t bh = density.rows() / grid.rows;
  const std::size_t bw = density.cols() / grid.cols;
  CountMap counts(grid.rows, grid.cols);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) {
      double acc = 0.0;
      for (std::size_t y = r * bh; y < (r + 1) * bh; ++y) {
        const long lo = static_cast<long>(c * bw);
        const long hi = static_cast<long>((c + 1) * bw) - 1;
        acc += mirror_stable_sum(lo, hi, [&](long x) { return density.at(y, static_cast<std::size_t>(x)); });
      }
      counts.at(r, c) = acc;
    }
  }
  return counts;
}

ClassMap class_map(const CountMap& counts, double th) {
  if (!(th >= 0.0)) throw ValidationError("threshold must be non-negative");
  ClassMap classes(counts.rows(), counts.cols());
  for (std::size_t i = 0; i < counts.size(); ++i) classes.values()[i] = counts.values()[i] <= th ? 0 : 1;
  return classes;
}

double calibrate_threshold(std::span<const CountMap> maps) {
  std::vector<double> positive;
  for (const CountMap& m : maps)
    for (double v : m.values())
      if (v > 0.0) positive.push_back(v);
  if (positive.empty()) throw ValidationError("cannot calibrate threshold: no positive cell in the corpus");
  std::sort(positive.begin(), positive.end());
  const std::size_t n = positive.size();
  if (n % 2 == 1) return positive[n / 2];
  return 0.5 * (positive[n / 2 - 1] + positive[n / 2]);
}

double resolve_threshold(std::optional<double> override_th, std::span<const CountMap> maps) {
  if (override_th) {
    if (!(*override_th >= 0.0)) throw ValidationError("threshold override must be non-negative");
    return *override_th;
  }
  return calibrate_threshold(maps);
}

HeadAnnotations flip_horizontal(const HeadAnnotations& ann) {
  const double w = static_cast<double>(ann.source_size().width);
  std::vector<Point> pts;
  pts.reserve(ann.count());
  for (const Point& p : ann.points()) {
    double x = w - p.x;
    if (x >= w) x = std::nextafter(w, 0.0);  // x == 0 has no mirror inside [0, w)
    pts.push_back({x, p.y});
  }
  return HeadAnnotations(ann.source_size(), std::move(pts));
}

}  // namespace dacc
