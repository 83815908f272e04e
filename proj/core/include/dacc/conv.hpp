#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "dacc/tensor.hpp"

namespace dacc {

enum class ConvAlgorithm {
  direct,  ///< nested loops; the reference path
  im2col,  ///< patch matrix + GEMM
};

/// Geometry of a 2-D cross-correlation. Kernel extents come from the weight.
struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t padding = 0;
  ConvAlgorithm algorithm = ConvAlgorithm::im2col;
};

/// floor((in + 2p - d(k-1) - 1)/s) + 1, or nullopt when that is < 1.
std::optional<std::size_t> conv_output_extent(std::size_t in, std::size_t kernel, const ConvGeometry& g);

/// Padding that keeps the spatial extent at stride 1: d(k-1)/2.
constexpr std::size_t same_padding(std::size_t kernel, std::size_t dilation) {
  return dilation * (kernel - 1) / 2;
}

/// Forward cross-correlation. weight is (out, in, kh, kw); bias is (out,1,1,1).
/// Throws ShapeError naming both shapes on mismatch.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& weight, const Tensor4<T>& bias,
                          const ConvGeometry& g);

/// Accumulates d(loss)/d(input, weight, bias) given d(loss)/d(output).
/// Null targets are skipped.
template <typename T>
void conv2d_backward(const Tensor4<T>& input, const Tensor4<T>& weight, const Tensor4<T>& grad_out,
                     const ConvGeometry& g, Tensor4<T>* grad_input, Tensor4<T>* grad_weight,
                     Tensor4<T>* grad_bias);

}  // namespace dacc
