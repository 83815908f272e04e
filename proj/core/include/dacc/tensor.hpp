#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace dacc {

/// Cache-line aligned allocation. Eigen kernels pick their peeling by
/// pointer alignment, so equal alignment keeps results bit-reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t n) noexcept { ::operator delete(p, n * sizeof(T), kAlignment); }

  template <typename U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Extents of a rank-4 tensor in (batch, channel, height, width) order.
struct Shape4 {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t size() const { return n * c * h * w; }
  constexpr std::size_t plane() const { return h * w; }
  friend constexpr bool operator==(const Shape4&, const Shape4&) = default;

  std::string to_string() const;
};

/// Dense NCHW array. Gradients are not stored here; see Variable.
template <typename T>
class Tensor4 {
 public:
  using value_type = T;

  Tensor4() = default;
  explicit Tensor4(Shape4 shape, T fill = T(0));
  Tensor4(Shape4 shape, AlignedVector<T> values);
  Tensor4(Shape4 shape, const std::vector<T>& values);

  const Shape4& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<T> data() { return values_; }
  std::span<const T> data() const { return values_; }
  const AlignedVector<T>& values() const { return values_; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return values_[offset(n, c, y, x)];
  }
  T at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return values_[offset(n, c, y, x)];
  }
  T& operator[](std::size_t i) { return values_[i]; }
  T operator[](std::size_t i) const { return values_[i]; }

  /// Contiguous (h, w) plane for one (batch, channel) pair.
  std::span<T> plane(std::size_t n, std::size_t c) {
    return std::span<T>(values_).subspan(offset(n, c, 0, 0), shape_.plane());
  }
  std::span<const T> plane(std::size_t n, std::size_t c) const {
    return std::span<const T>(values_).subspan(offset(n, c, 0, 0), shape_.plane());
  }
  /// All channels of one batch item.
  std::span<T> item(std::size_t n) {
    const std::size_t len = shape_.c * shape_.plane();
    return std::span<T>(values_).subspan(n * len, len);
  }
  std::span<const T> item(std::size_t n) const {
    const std::size_t len = shape_.c * shape_.plane();
    return std::span<const T>(values_).subspan(n * len, len);
  }

  void fill(T v);
  bool all_finite() const;
  T sum() const;

  /// Copy of batch item n as a (1, c, h, w) tensor.
  Tensor4 slice_batch(std::size_t n) const;

  template <typename U>
  Tensor4<U> cast() const {
    AlignedVector<U> out(values_.begin(), values_.end());
    return Tensor4<U>(shape_, std::move(out));
  }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_{};
  AlignedVector<T> values_;
};

/// Stacks (1, c, h, w) tensors of equal shape along the batch axis.
template <typename T>
Tensor4<T> stack_batch(std::span<const Tensor4<T>> items);

/// Mirrors every plane left-to-right.
template <typename T>
Tensor4<T> flip_horizontal(const Tensor4<T>& t);

extern template class Tensor4<float>;
extern template class Tensor4<double>;

}  // namespace dacc
