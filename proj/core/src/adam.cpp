#include "dacc/adam.hpp"

#include <cmath>

#include "dacc/errors.hpp"
#include "dacc/params.hpp"

namespace dacc {

std::string_view to_string(ParamRole role) {
  switch (role) {
    case ParamRole::base: return "base";
    case ParamRole::density_head: return "density-head";
    case ParamRole::count_head: return "count-head";
    case ParamRole::class_head: return "class-head";
  }
  return "unknown";
}

template <typename T>
Adam<T>::Adam(std::vector<Variable<T>> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  if (!(options_.learning_rate > 0.0) || !std::isfinite(options_.learning_rate)) {
    throw ValidationError("Adam learning rate must be positive and finite");
  }
  if (options_.beta1 < 0.0 || options_.beta1 >= 1.0 || options_.beta2 < 0.0 || options_.beta2 >= 1.0) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (!(options_.epsilon > 0.0)) throw ValidationError("Adam epsilon must be positive");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.shape());
    v_.emplace_back(p.shape());
  }
}

template <typename T>
void Adam<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) {
      throw ValidationError("Adam step: parameter " + std::to_string(i) + " of shape " +
                            params_[i].shape().to_string() + " has no gradient");
    }
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const T lr = static_cast<T>(options_.learning_rate);
  const T eps = static_cast<T>(options_.epsilon);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor4<T>& value = params_[i].mutable_value();
    const Tensor4<T>& grad = params_[i].grad();
    Tensor4<T>& m = m_[i];
    Tensor4<T>& v = v_[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      const T g = grad[k];
      m[k] = static_cast<T>(b1) * m[k] + static_cast<T>(1.0 - b1) * g;
      v[k] = static_cast<T>(b2) * v[k] + static_cast<T>(1.0 - b2) * g * g;
      const T m_hat = m[k] / static_cast<T>(c1);
      const T v_hat = v[k] / static_cast<T>(c2);
      value[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
    params_[i].clear_grad();
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace dacc
