#pragma once

#include <cstdint>

#include "dacc/autodiff.hpp"
#include "dacc/network.hpp"

namespace dacc {

/// Which class of cells a counter is trained on.
enum class DensityDomain : std::uint8_t { low = 0, high = 1 };

struct LossWeights {
  double dan = 1.0;
  double lcn = 1.0;
  double hcn = 1.0;

  /// Throws ValidationError unless every weight is finite and >= 0.
  void validate() const;
  double for_kind(NetworkKind kind) const;
};

/// Probability clamp applied before taking logs in class_loss.
inline constexpr double kProbabilityClamp = 1e-7;

/// (1 / 2N) * sum_i ||pred_i - target_i||^2 over a batch of N density maps.
template <typename T>
Variable<T> density_loss(const Variable<T>& pred, const Tensor4<T>& target);

/// (1 / N) * sum of |pred - target| over cells. When `classes` is given, only
/// cells whose class equals `domain` contribute. Subgradient at 0 is 0.
template <typename T>
Variable<T> count_loss(const Variable<T>& pred, const Tensor4<T>& target, const Tensor4<T>* classes = nullptr,
                       DensityDomain domain = DensityDomain::low);

/// Mean binary cross-entropy between channel 1 of (n, 2, H, W) probabilities
/// and a (n, 1, H, W) 0/1 class map, with probabilities clamped to
/// [1e-7, 1 - 1e-7].
template <typename T>
Variable<T> class_loss(const Variable<T>& probs, const Tensor4<T>& target);

template <typename T>
struct LossParts {
  Variable<T> density;   ///< required for every kind
  Variable<T> specific;  ///< class loss (DAN) or count loss (LCN/HCN); unused for base
};

/// density + lambda_kind * specific. Base networks use the density part only.
/// Throws ValidationError when a part required by the kind is missing.
template <typename T>
Variable<T> composite_loss(NetworkKind kind, const LossParts<T>& parts, const LossWeights& weights);

}  // namespace dacc
