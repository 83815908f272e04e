#pragma once

#include <cstdint>
#include <vector>

#include "dacc/autodiff.hpp"

namespace dacc {

struct AdamOptions {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. step() consumes and clears parameter grads.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Variable<T>> params, AdamOptions options);

  /// Throws ValidationError if any parameter has no gradient.
  void step();

  std::uint64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Tensor4<T>>& first_moments() const { return m_; }
  const std::vector<Tensor4<T>>& second_moments() const { return v_; }

 private:
  std::vector<Variable<T>> params_;
  AdamOptions options_;
  std::vector<Tensor4<T>> m_;
  std::vector<Tensor4<T>> v_;
  std::uint64_t step_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace dacc
