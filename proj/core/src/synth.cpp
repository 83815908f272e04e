#include "dacc/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "dacc/annotations.hpp"
#include "dacc/errors.hpp"
#include "dacc/random.hpp"

namespace dacc {

namespace {


std::vector<Point> low_regime_points(Rng& rng, double size) {
  const std::size_t n = rng.integer(kLowHeads.first, kLowHeads.second);
  const double margin = 4.0 * size / 256.0;
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(margin, size - margin), rng.uniform(margin, size - margin)});
  return pts;
}

std::vector<Point> high_regime_points(Rng& rng, double size) {
  const std::size_t n = rng.integer(kHighHeads.first, kHighHeads.second);
  struct Component {
    Point centre;
    double spread;
  };
  Component comp[2];
  for (auto& c : comp) {
    c.centre = {rng.uniform(0.3 * size, 0.7 * size), rng.uniform(0.3 * size, 0.7 * size)};
    c.spread = rng.uniform(0.2, 0.35) * size;
  }
  const double weight = rng.uniform(0.3, 0.7);
  std::vector<Point> pts;
  while (pts.size() < n) {
    const Component& c = rng.uniform() < weight ? comp[0] : comp[1];
    const Point p{c.centre.x + c.spread * rng.normal(), c.centre.y + c.spread * rng.normal()};
    if (p.x >= 1.0 && p.y >= 1.0 && p.x < size - 1.0 && p.y < size - 1.0) pts.push_back(p);
  }
  return pts;
}

std::vector<double> nearest_neighbour_distance(const std::vector<Point>& pts, double fallback) {
  std::vector<double> out(pts.size(), fallback);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      const double dx = pts[i].x - pts[j].x;
      const double dy = pts[i].y - pts[j].y;
      best = std::min(best, dx * dx + dy * dy);
    }
    if (std::isfinite(best)) out[i] = std::sqrt(best);
  }
  return out;
}

}  // namespace

std::uint64_t synth_image_seed(std::uint64_t corpus_seed, std::size_t index) {
  return derive_seed(corpus_seed, static_cast<std::uint64_t>(index));
}

Regime synth_regime(std::uint64_t corpus_seed, std::size_t index) {
  const std::size_t block = index / kRegimeBlock;
  Rng rng(derive_seed(corpus_seed ^ 0x7265676dULL, static_cast<std::uint64_t>(block)));
  std::array<std::size_t, kRegimeBlock> order;
  for (std::size_t i = 0; i < kRegimeBlock; ++i) order[i] = i;
  rng.shuffle(order.begin(), order.end());
  const std::size_t slot = index % kRegimeBlock;
  return std::find(order.begin(), order.begin() + kLowPerBlock, slot) != order.begin() + kLowPerBlock ? Regime::low
                                                                                                       : Regime::high;
}

SynthImage synth_image(std::uint64_t image_seed, Regime regime, const SynthOptions& options) {
  if (options.size < 16) throw ValidationError("synthetic image size must be at least 16");
  Rng rng(image_seed);
  const double size = static_cast<double>(options.size);
  const double unit = size / 256.0;
  std::vector<Point> pts = regime == Regime::low ? low_regime_points(rng, size) : high_regime_points(rng, size);

  // background: base level, per-channel tint, low-frequency waves, pixel noise
  const double base = options.shifted ? rng.uniform(0.30, 0.45) : rng.uniform(0.55, 0.75);
  double tint[3];
  for (double& t : tint) t = rng.uniform(-0.05, 0.05);
  struct Wave {
    double fx, fy, phase, amp;
  };
  Wave waves[3];
  for (auto& w : waves) {
    w = {rng.uniform(0.5, 3.0) / size, rng.uniform(0.5, 3.0) / size, rng.uniform(0.0, 2.0 * std::numbers::pi),
         rng.uniform(0.02, 0.06)};
  }
  const std::size_t n = options.size;
  std::vector<double> canvas(n * n * 3);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      double tex = 0.0;
      for (const auto& w : waves) {
        tex += w.amp * std::sin(2.0 * std::numbers::pi * (w.fx * static_cast<double>(x) + w.fy * static_cast<double>(y)) + w.phase);
      }
      for (std::size_t c = 0; c < 3; ++c) canvas[(y * n + x) * 3 + c] = base + tint[c] + tex + 0.03 * rng.normal();
    }
  }

  // heads: multiplicative dark splats
  const auto spacing = nearest_neighbour_distance(pts, 20.0 * unit);
  const double radius_gain = options.shifted ? 0.45 : 0.35;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double rho = std::clamp(radius_gain * spacing[i], 1.2 * unit, (options.shifted ? 6.0 : 5.0) * unit);
    const double depth = options.shifted ? rng.uniform(0.30, 0.50) : rng.uniform(0.55, 0.85);
    const double reach = 3.0 * rho;
    const long x0 = std::max<long>(0, static_cast<long>(std::floor(pts[i].x - reach)));
    const long x1 = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(std::ceil(pts[i].x + reach)));
    const long y0 = std::max<long>(0, static_cast<long>(std::floor(pts[i].y - reach)));
    const long y1 = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(std::ceil(pts[i].y + reach)));
    for (long y = y0; y <= y1; ++y) {
      for (long x = x0; x <= x1; ++x) {
        const double dx = static_cast<double>(x) + 0.5 - pts[i].x;
        const double dy = static_cast<double>(y) + 0.5 - pts[i].y;
        const double f = 1.0 - depth * std::exp(-(dx * dx + dy * dy) / (2.0 * rho * rho));
        for (std::size_t c = 0; c < 3; ++c) canvas[(static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x)) * 3 + c] *= f;
      }
    }
  }

  RgbImage img(n, n);
  for (std::size_t i = 0; i < canvas.size(); ++i) {
    img.rgb[i] = static_cast<std::uint8_t>(std::lround(std::clamp(canvas[i], 0.0, 1.0) * 255.0));
  }
  return {std::move(img), HeadAnnotations({n, n}, std::move(pts)), regime};
}

std::vector<SynthImage> synth_images(std::size_t n, const SynthOptions& options, std::uint64_t seed) {
  if (n == 0) throw ValidationError("synthetic corpus needs at least one image");
  std::vector<SynthImage> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(synth_image(synth_image_seed(seed, i), synth_regime(seed, i), options));
  return out;
}

DatasetManifest synth_corpus(std::size_t n, const SynthOptions& options, std::uint64_t seed,
                             const std::filesystem::path& out_dir) {
  if (!(options.test_fraction >= 0.0 && options.test_fraction <= 1.0)) {
    throw ValidationError("test fraction must lie in [0, 1]");
  }
  auto images = synth_images(n, options, seed);
  std::filesystem::create_directories(out_dir);
  DatasetManifest manifest;
  manifest.root = out_dir;
  const auto n_test = static_cast<std::size_t>(std::llround(options.test_fraction * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "img_%04zu", i);
    const std::string image = std::string(stem) + ".ppm";
    const std::string ann = std::string(stem) + ".txt";
    write_ppm(out_dir / image, images[i].image);
    write_annotations(images[i].heads, out_dir / ann);
    manifest.entries.push_back({image, ann, i + n_test >= n ? Split::test : Split::train});
  }
  write_manifest(manifest);
  return manifest;
}

Tensor4<float> to_tensor(const RgbImage& image) {
  Tensor4<float> t({1, 3, image.height, image.width});
  for (std::size_t y = 0; y < image.height; ++y)
    for (std::size_t x = 0; x < image.width; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        t.at(0, c, y, x) = std::min(1.0f, static_cast<float>(image.rgb[(y * image.width + x) * 3 + c]) / 255.0f);
  return t;
}

}  // namespace dacc
