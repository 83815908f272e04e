#pragma once

#include "dacc/groundtruth.hpp"
#include "dacc/tensor.hpp"

namespace dacc {

/// Aspect-preserving resize into a square canvas, content anchored at the
/// top-left and the remainder zero-padded.
struct PreprocessTransform {
  double scale = 1.0;
  std::size_t pad_left = 0;
  std::size_t pad_top = 0;
  std::size_t target = 0;
  ImageSize content{};

  Point apply(Point p) const { return {p.x * scale + static_cast<double>(pad_left), p.y * scale + static_cast<double>(pad_top)}; }
};

struct Preprocessed {
  Tensor4<float> image;  ///< (1, 3, target, target)
  HeadAnnotations annotations;
  PreprocessTransform transform;
};

/// Scale factor min(target/w, target/h) for an image of `size`.
PreprocessTransform make_transform(ImageSize size, std::size_t target);

/// Bilinear resize + zero padding; annotations go through the same affine
/// map and the head count is unchanged. Throws ValidationError for a
/// zero-extent image or an annotation size that differs from the image.
Preprocessed preprocess(const Tensor4<float>& image, const HeadAnnotations& ann, std::size_t target);

}  // namespace dacc
