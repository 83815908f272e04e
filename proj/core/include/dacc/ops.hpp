#pragma once

#include "dacc/autodiff.hpp"
#include "dacc/conv.hpp"

namespace dacc {

/// Cross-correlation with stride, dilation and zero padding. Differentiable
/// w.r.t. input, weight and bias.
template <typename T>
Variable<T> conv2d(const Variable<T>& input, const Variable<T>& weight, const Variable<T>& bias,
                   const ConvGeometry& geometry);

/// max(0, x); the subgradient at 0 is 0.
template <typename T>
Variable<T> relu(const Variable<T>& input);

/// Per-(n, y, x) softmax across channels, stabilised by max subtraction.
template <typename T>
Variable<T> softmax_channels(const Variable<T>& input);

/// Scalar sum of every element, shape (1,1,1,1).
template <typename T>
Variable<T> sum(const Variable<T>& input);

template <typename T>
Variable<T> add(const Variable<T>& a, const Variable<T>& b);

template <typename T>
Variable<T> scale(const Variable<T>& input, T factor);

}  // namespace dacc
