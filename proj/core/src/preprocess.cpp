#include "dacc/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "dacc/errors.hpp"

namespace dacc {

PreprocessTransform make_transform(ImageSize size, std::size_t target) {
  if (size.width == 0 || size.height == 0) throw ValidationError("cannot preprocess a zero-extent image");
  if (target == 0) throw ValidationError("target size must be positive");
  const double t = static_cast<double>(target);
  const double scale = std::min(t / static_cast<double>(size.width), t / static_cast<double>(size.height));
  auto extent = [&](std::size_t v) {
    const auto e = static_cast<std::size_t>(std::llround(static_cast<double>(v) * scale));
    return std::clamp<std::size_t>(e, 1, target);
  };
  PreprocessTransform tr;
  tr.scale = scale;
  tr.target = target;
  tr.content = {extent(size.width), extent(size.height)};
  return tr;
}

Preprocessed preprocess(const Tensor4<float>& image, const HeadAnnotations& ann, std::size_t target) {
  const Shape4 s = image.shape();
  if (s.n != 1 || s.c != 3) throw ShapeError("preprocess expects a (1,3,h,w) image, got " + s.to_string());
  const ImageSize size{s.w, s.h};
  const PreprocessTransform tr = make_transform(size, target);
  if (ann.source_size() != size) {
    throw ValidationError("annotation size " + std::to_string(ann.source_size().width) + "x" +
                          std::to_string(ann.source_size().height) + " does not match image " + std::to_string(s.w) +
                          "x" + std::to_string(s.h));
  }

  Tensor4<float> out({1, 3, target, target});
  if (tr.content == size) {
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x) out.at(0, c, y, x) = image.at(0, c, y, x);
  } else {
    // half-pixel-centre bilinear sampling
    const double inv = 1.0 / tr.scale;
    for (std::size_t y = 0; y < tr.content.height; ++y) {
      const double sy = std::clamp((static_cast<double>(y) + 0.5) * inv - 0.5, 0.0, static_cast<double>(s.h - 1));
      const auto y0 = static_cast<std::size_t>(sy);
      const std::size_t y1 = std::min(y0 + 1, s.h - 1);
      const double fy = sy - static_cast<double>(y0);
      for (std::size_t x = 0; x < tr.content.width; ++x) {
        const double sx = std::clamp((static_cast<double>(x) + 0.5) * inv - 0.5, 0.0, static_cast<double>(s.w - 1));
        const auto x0 = static_cast<std::size_t>(sx);
        const std::size_t x1 = std::min(x0 + 1, s.w - 1);
        const double fx = sx - static_cast<double>(x0);
        for (std::size_t c = 0; c < 3; ++c) {
          const double top = (1 - fx) * image.at(0, c, y0, x0) + fx * image.at(0, c, y0, x1);
          const double bottom = (1 - fx) * image.at(0, c, y1, x0) + fx * image.at(0, c, y1, x1);
          out.at(0, c, y, x) = static_cast<float>((1 - fy) * top + fy * bottom);
        }
      }
    }
  }

  std::vector<Point> pts;
  pts.reserve(ann.count());
  const double limit = static_cast<double>(target);
  for (const Point& p : ann.points()) {
    Point q = tr.apply(p);
    if (q.x >= limit) q.x = std::nextafter(limit, 0.0);
    if (q.y >= limit) q.y = std::nextafter(limit, 0.0);
    pts.push_back(q);
  }
  return {std::move(out), HeadAnnotations({target, target}, std::move(pts)), tr};
}

}  // namespace dacc
