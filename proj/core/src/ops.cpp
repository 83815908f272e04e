#include "dacc/ops.hpp"

#include <algorithm>
#include <cmath>

#include "dacc/errors.hpp"

namespace dacc {

template <typename T>
Variable<T> conv2d(const Variable<T>& input, const Variable<T>& weight, const Variable<T>& bias,
                   const ConvGeometry& geometry) {
  Tensor4<T> out = conv2d_forward(input.value(), weight.value(), bias.value(), geometry);
  const bool need_input_grad = input.requires_grad();
  return record<T>(std::move(out), {input, weight, bias},
                   [input, weight, geometry, need_input_grad](const Tensor4<T>& grad_out, GradSink<T>& sink) {
                     Tensor4<T>* gi = need_input_grad ? sink.grad_for(0) : nullptr;
                     conv2d_backward(input.value(), weight.value(), grad_out, geometry, gi, sink.grad_for(1),
                                     sink.grad_for(2));
                   });
}

template <typename T>
Variable<T> relu(const Variable<T>& input) {
  const Tensor4<T>& x = input.value();
  Tensor4<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  return record<T>(std::move(out), {input}, [input](const Tensor4<T>& grad_out, GradSink<T>& sink) {
    Tensor4<T>* gi = sink.grad_for(0);
    if (gi == nullptr) return;
    const Tensor4<T>& x = input.value();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] > T(0)) (*gi)[i] += grad_out[i];
    }
  });
}

template <typename T>
Variable<T> softmax_channels(const Variable<T>& input) {
  const Tensor4<T>& x = input.value();
  const Shape4 s = x.shape();
  if (s.c < 2) throw ShapeError("softmax_channels needs at least 2 channels, got " + s.to_string());
  Tensor4<T> out(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t p = 0; p < s.plane(); ++p) {
      const std::size_t base = n * s.c * s.plane() + p;
      T peak = x[base];
      for (std::size_t c = 1; c < s.c; ++c) peak = std::max(peak, x[base + c * s.plane()]);
      T total = 0;
      for (std::size_t c = 0; c < s.c; ++c) {
        const T e = std::exp(x[base + c * s.plane()] - peak);
        out[base + c * s.plane()] = e;
        total += e;
      }
      for (std::size_t c = 0; c < s.c; ++c) out[base + c * s.plane()] /= total;
    }
  }
  Tensor4<T> probs = out;
  return record<T>(std::move(out), {input},
                   [probs = std::move(probs)](const Tensor4<T>& grad_out, GradSink<T>& sink) {
                     Tensor4<T>* gi = sink.grad_for(0);
                     if (gi == nullptr) return;
                     const Shape4 s = probs.shape();
                     // dx_c = p_c * (g_c - sum_k g_k p_k)
                     for (std::size_t n = 0; n < s.n; ++n) {
                       for (std::size_t p = 0; p < s.plane(); ++p) {
                         const std::size_t base = n * s.c * s.plane() + p;
                         T dot = 0;
                         for (std::size_t c = 0; c < s.c; ++c) {
                           dot += grad_out[base + c * s.plane()] * probs[base + c * s.plane()];
                         }
                         for (std::size_t c = 0; c < s.c; ++c) {
                           const std::size_t i = base + c * s.plane();
                           (*gi)[i] += probs[i] * (grad_out[i] - dot);
                         }
                       }
                     }
                   });
}

template <typename T>
Variable<T> sum(const Variable<T>& input) {
  Tensor4<T> out({1, 1, 1, 1}, input.value().sum());
  return record<T>(std::move(out), {input}, [](const Tensor4<T>& grad_out, GradSink<T>& sink) {
    Tensor4<T>* gi = sink.grad_for(0);
    if (gi == nullptr) return;
    for (auto& g : gi->data()) g += grad_out[0];
  });
}

template <typename T>
Variable<T> add(const Variable<T>& a, const Variable<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add shape mismatch: " + a.shape().to_string() + " vs " + b.shape().to_string());
  }
  Tensor4<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return record<T>(std::move(out), {a, b}, [](const Tensor4<T>& grad_out, GradSink<T>& sink) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor4<T>* g = sink.grad_for(k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += grad_out[i];
      }
    }
  });
}

template <typename T>
Variable<T> scale(const Variable<T>& input, T factor) {
  Tensor4<T> out = input.value();
  for (auto& v : out.data()) v *= factor;
  return record<T>(std::move(out), {input}, [factor](const Tensor4<T>& grad_out, GradSink<T>& sink) {
    if (Tensor4<T>* g = sink.grad_for(0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += factor * grad_out[i];
    }
  });
}

#define DACC_INSTANTIATE_OPS(T)                                                                     \
  template Variable<T> conv2d(const Variable<T>&, const Variable<T>&, const Variable<T>&,          \
                              const ConvGeometry&);                                                 \
  template Variable<T> relu(const Variable<T>&);                                                    \
  template Variable<T> softmax_channels(const Variable<T>&);                                        \
  template Variable<T> sum(const Variable<T>&);                                                     \
  template Variable<T> add(const Variable<T>&, const Variable<T>&);                                 \
  template Variable<T> scale(const Variable<T>&, T);

DACC_INSTANTIATE_OPS(float)
DACC_INSTANTIATE_OPS(double)

#undef DACC_INSTANTIATE_OPS

}  // namespace dacc
