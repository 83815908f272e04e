#include "dacc/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "dacc/errors.hpp"

namespace dacc {

std::string Shape4::to_string() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, T fill) : shape_(shape), values_(shape.size(), fill) {}

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, const std::vector<T>& values)
    : Tensor4(shape, AlignedVector<T>(values.begin(), values.end())) {}

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, AlignedVector<T> values) : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw ShapeError("tensor data length " + std::to_string(values_.size()) +
                     " does not match shape " + shape_.to_string());
  }
}

template <typename T>
void Tensor4<T>::fill(T v) {
  std::fill(values_.begin(), values_.end(), v);
}

template <typename T>
bool Tensor4<T>::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
T Tensor4<T>::sum() const {
  T acc = 0;
  for (T v : values_) acc += v;
  return acc;
}

template <typename T>
Tensor4<T> Tensor4<T>::slice_batch(std::size_t n) const {
  if (n >= shape_.n) throw ShapeError("batch index out of range for shape " + shape_.to_string());
  auto src = item(n);
  return Tensor4<T>({1, shape_.c, shape_.h, shape_.w}, AlignedVector<T>(src.begin(), src.end()));
}

template <typename T>
Tensor4<T> stack_batch(std::span<const Tensor4<T>> items) {
  if (items.empty()) throw ShapeError("cannot stack an empty batch");
  const Shape4 first = items.front().shape();
  if (first.n != 1) throw ShapeError("stack_batch expects (1,c,h,w) items, got " + first.to_string());
  AlignedVector<T> values;
  values.reserve(first.size() * items.size());
  for (const auto& t : items) {
    if (t.shape() != first) {
      throw ShapeError("stack_batch shape mismatch: " + first.to_string() + " vs " +
                       t.shape().to_string());
    }
    values.insert(values.end(), t.values().begin(), t.values().end());
  }
  return Tensor4<T>({items.size(), first.c, first.h, first.w}, std::move(values));
}

template <typename T>
Tensor4<T> flip_horizontal(const Tensor4<T>& t) {
  Tensor4<T> out(t.shape());
  const auto& s = t.shape();
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x) out.at(n, c, y, s.w - 1 - x) = t.at(n, c, y, x);
  return out;
}

template class Tensor4<float>;
template class Tensor4<double>;
template Tensor4<float> stack_batch(std::span<const Tensor4<float>>);
template Tensor4<double> stack_batch(std::span<const Tensor4<double>>);
template Tensor4<float> flip_horizontal(const Tensor4<float>&);
template Tensor4<double> flip_horizontal(const Tensor4<double>&);

}  // namespace dacc
