#include "dacc/conv.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "dacc/errors.hpp"

namespace dacc {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMatrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMatrix<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

struct Plan {
  std::size_t batch, in_c, in_h, in_w;
  std::size_t out_c, kh, kw;
  std::size_t out_h, out_w;
  std::size_t stride, dilation, padding;

  std::size_t patch() const { return in_c * kh * kw; }
  std::size_t positions() const { return out_h * out_w; }
};

template <typename T>
Plan make_plan(const Tensor4<T>& input, const Tensor4<T>& weight, const Tensor4<T>& bias,
               const ConvGeometry& g) {
  const Shape4& in = input.shape();
  const Shape4& w = weight.shape();
  if (g.stride == 0 || g.dilation == 0) {
    throw ValidationError("conv2d stride and dilation must be positive");
  }
  if (in.c != w.c) {
    throw ShapeError("conv2d channel mismatch: input " + in.to_string() + " vs kernel " + w.to_string());
  }
  if (bias.shape() != Shape4{w.n, 1, 1, 1}) {
    throw ShapeError("conv2d bias " + bias.shape().to_string() + " does not match kernel " + w.to_string());
  }
  auto oh = conv_output_extent(in.h, w.h, g);
  auto ow = conv_output_extent(in.w, w.w, g);
  if (!oh || !ow) {
    throw ShapeError("conv2d output would be empty: input " + in.to_string() + " vs kernel " + w.to_string());
  }
  return Plan{in.n, in.c, in.h, in.w, w.n, w.h, w.w, *oh, *ow, g.stride, g.dilation, g.padding};
}

// Source coordinate for output index o and kernel tap k, or -1 if it falls in padding.
inline long source_index(std::size_t o, std::size_t k, const Plan& p, std::size_t extent) {
  const long v = static_cast<long>(o * p.stride + k * p.dilation) - static_cast<long>(p.padding);
  return (v < 0 || v >= static_cast<long>(extent)) ? -1 : v;
}

// Patch matrix (in_c*kh*kw, (oy1-oy0)*out_w) for output rows [oy0, oy1) of
// one batch item.
template <typename T>
void im2col(std::span<const T> image, const Plan& p, std::size_t oy0, std::size_t oy1, AlignedVector<T>& cols) {
  const std::size_t positions = (oy1 - oy0) * p.out_w;
  cols.assign(p.patch() * positions, T(0));
  for (std::size_t c = 0; c < p.in_c; ++c) {
    const T* plane = image.data() + c * p.in_h * p.in_w;
    for (std::size_t ky = 0; ky < p.kh; ++ky) {
      for (std::size_t kx = 0; kx < p.kw; ++kx) {
        T* row = cols.data() + ((c * p.kh + ky) * p.kw + kx) * positions;
        for (std::size_t oy = oy0; oy < oy1; ++oy) {
          const long iy = source_index(oy, ky, p, p.in_h);
          if (iy < 0) continue;
          const T* src = plane + static_cast<std::size_t>(iy) * p.in_w;
          T* dst = row + (oy - oy0) * p.out_w;
          if (p.stride == 1) {
            // contiguous run of valid columns
            const long shift = static_cast<long>(kx * p.dilation) - static_cast<long>(p.padding);
            const long lo = std::max<long>(0, -shift);
            const long hi = std::min<long>(static_cast<long>(p.out_w), static_cast<long>(p.in_w) - shift);
            if (hi > lo) std::copy(src + lo + shift, src + hi + shift, dst + lo);
          } else {
            for (std::size_t ox = 0; ox < p.out_w; ++ox) {
              const long ix = source_index(ox, kx, p, p.in_w);
              if (ix >= 0) dst[ox] = src[ix];
            }
          }
        }
      }
    }
  }
}

// Scatter-add of a patch matrix for output rows [oy0, oy1) back into an image.
template <typename T>
void col2im(const AlignedVector<T>& cols, const Plan& p, std::size_t oy0, std::size_t oy1, std::span<T> image) {
  const std::size_t positions = (oy1 - oy0) * p.out_w;
  for (std::size_t c = 0; c < p.in_c; ++c) {
    T* plane = image.data() + c * p.in_h * p.in_w;
    for (std::size_t ky = 0; ky < p.kh; ++ky) {
      for (std::size_t kx = 0; kx < p.kw; ++kx) {
        const T* row = cols.data() + ((c * p.kh + ky) * p.kw + kx) * positions;
        for (std::size_t oy = oy0; oy < oy1; ++oy) {
          const long iy = source_index(oy, ky, p, p.in_h);
          if (iy < 0) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * p.in_w;
          const T* src = row + (oy - oy0) * p.out_w;
          if (p.stride == 1) {
            const long shift = static_cast<long>(kx * p.dilation) - static_cast<long>(p.padding);
            const long lo = std::max<long>(0, -shift);
            const long hi = std::min<long>(static_cast<long>(p.out_w), static_cast<long>(p.in_w) - shift);
            for (long ox = lo; ox < hi; ++ox) dst[ox + shift] += src[ox];
          } else {
            for (std::size_t ox = 0; ox < p.out_w; ++ox) {
              const long ix = source_index(ox, kx, p, p.in_w);
              if (ix >= 0) dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }
}

// Output rows per im2col block, keeping the patch matrix around 1 MB.
template <typename T>
std::size_t block_rows(const Plan& p) {
  constexpr std::size_t kBlockBytes = std::size_t{1} << 20;
  const std::size_t row_bytes = p.patch() * p.out_w * sizeof(T);
  return std::clamp<std::size_t>(kBlockBytes / std::max<std::size_t>(row_bytes, 1), 1, p.out_h);
}

template <typename T>
void forward_direct(const Tensor4<T>& input, const Tensor4<T>& weight, const Tensor4<T>& bias,
                    const Plan& p, Tensor4<T>& out) {
  for (std::size_t n = 0; n < p.batch; ++n) {
    for (std::size_t oc = 0; oc < p.out_c; ++oc) {
      for (std::size_t oy = 0; oy < p.out_h; ++oy) {
        for (std::size_t ox = 0; ox < p.out_w; ++ox) {
          T acc = bias[oc];
          for (std::size_t ic = 0; ic < p.in_c; ++ic) {
            for (std::size_t ky = 0; ky < p.kh; ++ky) {
              const long iy = source_index(oy, ky, p, p.in_h);
              if (iy < 0) continue;
              for (std::size_t kx = 0; kx < p.kw; ++kx) {
                const long ix = source_index(ox, kx, p, p.in_w);
                if (ix < 0) continue;
                acc += weight.at(oc, ic, ky, kx) *
                       input.at(n, ic, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
              }
            }
          }
          out.at(n, oc, oy, ox) = acc;
        }
      }
    }
  }
}

template <typename T>
void forward_im2col(const Tensor4<T>& input, const Tensor4<T>& weight, const Tensor4<T>& bias,
                    const Plan& p, Tensor4<T>& out) {
  AlignedVector<T> cols;
  ConstMatMap<T> w(weight.data().data(), p.out_c, p.patch());
  const std::size_t rows = block_rows<T>(p);
  const auto positions = static_cast<Eigen::Index>(p.positions());
  for (std::size_t n = 0; n < p.batch; ++n) {
    MatMap<T> o(out.item(n).data(), p.out_c, p.positions());
    for (std::size_t oy0 = 0; oy0 < p.out_h; oy0 += rows) {
      const std::size_t oy1 = std::min(p.out_h, oy0 + rows);
      const auto width = static_cast<Eigen::Index>((oy1 - oy0) * p.out_w);
      im2col(input.item(n), p, oy0, oy1, cols);
      ConstMatMap<T> c(cols.data(), p.patch(), width);
      StridedMap<T> ob(o.data() + oy0 * p.out_w, p.out_c, width, Eigen::OuterStride<>(positions));
      ob.noalias() = w * c;
    }
    for (std::size_t oc = 0; oc < p.out_c; ++oc) o.row(oc).array() += bias[oc];
  }
}

}  // namespace

std::optional<std::size_t> conv_output_extent(std::size_t in, std::size_t kernel, const ConvGeometry& g) {
  if (g.stride == 0 || g.dilation == 0 || kernel == 0) return std::nullopt;
  const long numerator = static_cast<long>(in + 2 * g.padding) - static_cast<long>(g.dilation * (kernel - 1)) - 1;
  if (numerator < 0) return std::nullopt;
  return static_cast<std::size_t>(numerator) / g.stride + 1;
}

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& weight, const Tensor4<T>& bias,
                          const ConvGeometry& g) {
  const Plan p = make_plan(input, weight, bias, g);
  Tensor4<T> out({p.batch, p.out_c, p.out_h, p.out_w});
  if (g.algorithm == ConvAlgorithm::direct) {
    forward_direct(input, weight, bias, p, out);
  } else {
    forward_im2col(input, weight, bias, p, out);
  }
  return out;
}

template <typename T>
void conv2d_backward(const Tensor4<T>& input, const Tensor4<T>& weight, const Tensor4<T>& grad_out,
                     const ConvGeometry& g, Tensor4<T>* grad_input, Tensor4<T>* grad_weight,
                     Tensor4<T>* grad_bias) {
  const Tensor4<T> no_bias({weight.shape().n, 1, 1, 1});
  const Plan p = make_plan(input, weight, no_bias, g);
  if (grad_out.shape() != Shape4{p.batch, p.out_c, p.out_h, p.out_w}) {
    throw ShapeError("conv2d backward: output gradient " + grad_out.shape().to_string() +
                     " does not match forward output");
  }
  AlignedVector<T> cols;
  AlignedVector<T> grad_cols;
  ConstMatMap<T> w(weight.data().data(), p.out_c, p.patch());
  const std::size_t rows = block_rows<T>(p);
  const auto positions = static_cast<Eigen::Index>(p.positions());
  for (std::size_t n = 0; n < p.batch; ++n) {
    ConstMatMap<T> go(grad_out.item(n).data(), p.out_c, p.positions());
    if (grad_bias != nullptr) {
      for (std::size_t oc = 0; oc < p.out_c; ++oc) (*grad_bias)[oc] += go.row(oc).sum();
    }
    if (grad_weight == nullptr && grad_input == nullptr) continue;
    for (std::size_t oy0 = 0; oy0 < p.out_h; oy0 += rows) {
      const std::size_t oy1 = std::min(p.out_h, oy0 + rows);
      const auto width = static_cast<Eigen::Index>((oy1 - oy0) * p.out_w);
      ConstStridedMap<T> gob(go.data() + oy0 * p.out_w, p.out_c, width, Eigen::OuterStride<>(positions));
      if (grad_weight != nullptr) {
        im2col(input.item(n), p, oy0, oy1, cols);
        ConstMatMap<T> c(cols.data(), p.patch(), width);
        MatMap<T> gw(grad_weight->data().data(), p.out_c, p.patch());
        gw.noalias() += gob * c.transpose();
      }
      if (grad_input != nullptr) {
        grad_cols.resize(p.patch() * static_cast<std::size_t>(width));
        MatMap<T> gc(grad_cols.data(), p.patch(), width);
        gc.noalias() = w.transpose() * gob;
        col2im(grad_cols, p, oy0, oy1, grad_input->item(n));
      }
    }
  }
}

template Tensor4<float> conv2d_forward(const Tensor4<float>&, const Tensor4<float>&, const Tensor4<float>&,
                                       const ConvGeometry&);
template Tensor4<double> conv2d_forward(const Tensor4<double>&, const Tensor4<double>&, const Tensor4<double>&,
                                        const ConvGeometry&);
template void conv2d_backward(const Tensor4<float>&, const Tensor4<float>&, const Tensor4<float>&,
                              const ConvGeometry&, Tensor4<float>*, Tensor4<float>*, Tensor4<float>*);
template void conv2d_backward(const Tensor4<double>&, const Tensor4<double>&, const Tensor4<double>&,
                              const ConvGeometry&, Tensor4<double>*, Tensor4<double>*, Tensor4<double>*);

}  // namespace dacc
