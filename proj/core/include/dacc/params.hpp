#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dacc/autodiff.hpp"

namespace dacc {

enum class ParamRole : std::uint32_t {
  base = 0,
  density_head = 1,
  count_head = 2,
  class_head = 3,
};

std::string_view to_string(ParamRole role);

template <typename T>
struct NamedParam {
  std::string name;
  ParamRole role;
  Variable<T> var;
};

/// Named, role-tagged parameters of one network, in a fixed order.
template <typename T>
class ParamSet {
 public:
  void add(std::string name, ParamRole role, Variable<T> var) {
    params_.push_back({std::move(name), role, std::move(var)});
  }

  const std::vector<NamedParam<T>>& entries() const { return params_; }
  std::size_t size() const { return params_.size(); }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.var.value().size();
    return total;
  }

  std::size_t parameter_count(ParamRole role) const {
    std::size_t total = 0;
    for (const auto& p : params_)
      if (p.role == role) total += p.var.value().size();
    return total;
  }

  const NamedParam<T>* find(std::string_view name) const {
    for (const auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }

  std::vector<Variable<T>> variables() const {
    std::vector<Variable<T>> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.var);
    return out;
  }

  void clear_grads() const {
    for (auto p : params_) p.var.clear_grad();
  }

 private:
  std::vector<NamedParam<T>> params_;
};

}  // namespace dacc
