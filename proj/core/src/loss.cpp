#include "dacc/loss.hpp"

#include <algorithm>
#include <cmath>

#include "dacc/errors.hpp"
#include "dacc/ops.hpp"

namespace dacc {

void LossWeights::validate() const {
  for (double v : {dan, lcn, hcn}) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("loss weights must be finite and non-negative");
  }
}

double LossWeights::for_kind(NetworkKind kind) const {
  switch (kind) {
    case NetworkKind::dan: return dan;
    case NetworkKind::lcn: return lcn;
    case NetworkKind::hcn: return hcn;
    case NetworkKind::base: return 0.0;
  }
  return 0.0;
}

namespace {

template <typename T>
void require_same_shape(const char* what, const Shape4& a, const Shape4& b) {
  if (a != b) throw ShapeError(std::string(what) + " shape mismatch: prediction " + a.to_string() + " vs target " + b.to_string());
}

}  // namespace

template <typename T>
Variable<T> density_loss(const Variable<T>& pred, const Tensor4<T>& target) {
  require_same_shape<T>("density_loss", pred.shape(), target.shape());
  const T n = static_cast<T>(pred.shape().n);
  const Tensor4<T>& p = pred.value();
  T acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const T d = p[i] - target[i];
    acc += d * d;
  }
  Tensor4<T> out({1, 1, 1, 1}, acc / (T(2) * n));
  return record<T>(std::move(out), {pred}, [pred, target, n](const Tensor4<T>& grad_out, GradSink<T>& sink) {
    Tensor4<T>* g = sink.grad_for(0);
    if (g == nullptr) return;
    const Tensor4<T>& p = pred.value();
    const T k = grad_out[0] / n;
    for (std::size_t i = 0; i < p.size(); ++i) (*g)[i] += k * (p[i] - target[i]);
  });
}

template <typename T>
Variable<T> count_loss(const Variable<T>& pred, const Tensor4<T>& target, const Tensor4<T>* classes,
                       DensityDomain domain) {
  require_same_shape<T>("count_loss", pred.shape(), target.shape());
  if (classes != nullptr) require_same_shape<T>("count_loss mask", pred.shape(), classes->shape());
  const T n = static_cast<T>(pred.shape().n);
  const T wanted = static_cast<T>(static_cast<std::uint8_t>(domain));
  std::vector<std::uint8_t> active(pred.value().size(), 1);
  if (classes != nullptr) {
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = (*classes)[i] == wanted ? 1 : 0;
  }
  const Tensor4<T>& p = pred.value();
  T acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (active[i]) acc += std::abs(p[i] - target[i]);
  Tensor4<T> out({1, 1, 1, 1}, acc / n);
  return record<T>(std::move(out), {pred},
                   [pred, target, n, active = std::move(active)](const Tensor4<T>& grad_out, GradSink<T>& sink) {
                     Tensor4<T>* g = sink.grad_for(0);
                     if (g == nullptr) return;
                     const Tensor4<T>& p = pred.value();
                     const T k = grad_out[0] / n;
                     for (std::size_t i = 0; i < p.size(); ++i) {
                       if (!active[i]) continue;
                       const T d = p[i] - target[i];
                       if (d > T(0)) (*g)[i] += k;
                       else if (d < T(0)) (*g)[i] -= k;
                     }
                   });
}

template <typename T>
Variable<T> class_loss(const Variable<T>& probs, const Tensor4<T>& target) {
  const Shape4 s = probs.shape();
  if (s.c != 2) throw ShapeError("class_loss expects (n,2,H,W) probabilities, got " + s.to_string());
  require_same_shape<T>("class_loss", Shape4{s.n, 1, s.h, s.w}, target.shape());
  const T lo = static_cast<T>(kProbabilityClamp);
  const T hi = T(1) - lo;
  const T cells = static_cast<T>(s.n * s.h * s.w);
  const Tensor4<T>& p = probs.value();
  T acc = 0;
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t y = 0; y < s.h; ++y) {
      for (std::size_t x = 0; x < s.w; ++x) {
        const T q = std::clamp(p.at(n, 1, y, x), lo, hi);
        const T t = target.at(n, 0, y, x);
        acc -= t * std::log(q) + (T(1) - t) * std::log(T(1) - q);
      }
    }
  }
  Tensor4<T> out({1, 1, 1, 1}, acc / cells);
  return record<T>(std::move(out), {probs},
                   [probs, target, cells, lo, hi](const Tensor4<T>& grad_out, GradSink<T>& sink) {
                     Tensor4<T>* g = sink.grad_for(0);
                     if (g == nullptr) return;
                     const Tensor4<T>& p = probs.value();
                     const Shape4 s = p.shape();
                     const T k = grad_out[0] / cells;
                     for (std::size_t n = 0; n < s.n; ++n) {
                       for (std::size_t y = 0; y < s.h; ++y) {
                         for (std::size_t x = 0; x < s.w; ++x) {
                           const T q = p.at(n, 1, y, x);
                           if (q < lo || q > hi) continue;  // clamp is flat there
                           const T t = target.at(n, 0, y, x);
                           g->at(n, 1, y, x) += k * (-(t / q) + (T(1) - t) / (T(1) - q));
                         }
                       }
                     }
                   });
}

template <typename T>
Variable<T> composite_loss(NetworkKind kind, const LossParts<T>& parts, const LossWeights& weights) {
  weights.validate();
  if (!parts.density.defined()) throw ValidationError("composite loss is missing its density part");
  if (kind == NetworkKind::base) return parts.density;
  if (!parts.specific.defined()) {
    throw ValidationError(std::string("composite loss for ") + std::string(to_string(kind)) +
                          " is missing its " + (kind == NetworkKind::dan ? "class" : "count") + " part");
  }
  return add(parts.density, scale(parts.specific, static_cast<T>(weights.for_kind(kind))));
}

#define DACC_INSTANTIATE_LOSS(T)                                                                      \
  template Variable<T> density_loss(const Variable<T>&, const Tensor4<T>&);                          \
  template Variable<T> count_loss(const Variable<T>&, const Tensor4<T>&, const Tensor4<T>*, DensityDomain); \
  template Variable<T> class_loss(const Variable<T>&, const Tensor4<T>&);                            \
  template Variable<T> composite_loss(NetworkKind, const LossParts<T>&, const LossWeights&);

DACC_INSTANTIATE_LOSS(float)
DACC_INSTANTIATE_LOSS(double)

#undef DACC_INSTANTIATE_LOSS

}  // namespace dacc
