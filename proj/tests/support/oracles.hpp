#pragma once

// Independent reference implementations shared by the unit and acceptance
// tests. Nothing here calls into the code under test except to build inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "dacc/autodiff.hpp"
#include "dacc/groundtruth.hpp"
#include "dacc/random.hpp"
#include "dacc/tensor.hpp"

namespace dacc::testing {

template <typename T = double>
Tensor4<T> random_tensor(Shape4 shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor4<T> t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

/// Nested-loop cross-correlation, written from the definition.
inline Tensor4<double> reference_conv(const Tensor4<double>& x, const Tensor4<double>& w, const Tensor4<double>& b,
                                      std::size_t stride, std::size_t dilation, std::size_t padding) {
  const Shape4 xs = x.shape();
  const Shape4 ws = w.shape();
  const long oh = (static_cast<long>(xs.h + 2 * padding) - static_cast<long>(dilation * (ws.h - 1)) - 1) /
                      static_cast<long>(stride) + 1;
  const long ow = (static_cast<long>(xs.w + 2 * padding) - static_cast<long>(dilation * (ws.w - 1)) - 1) /
                      static_cast<long>(stride) + 1;
  Tensor4<double> out({xs.n, ws.n, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)});
  for (std::size_t n = 0; n < xs.n; ++n)
    for (std::size_t o = 0; o < ws.n; ++o)
      for (long y = 0; y < oh; ++y)
        for (long xx = 0; xx < ow; ++xx) {
          double acc = b[o];
          for (std::size_t c = 0; c < xs.c; ++c)
            for (std::size_t ky = 0; ky < ws.h; ++ky)
              for (std::size_t kx = 0; kx < ws.w; ++kx) {
                const long iy = y * static_cast<long>(stride) + static_cast<long>(ky * dilation) - static_cast<long>(padding);
                const long ix = xx * static_cast<long>(stride) + static_cast<long>(kx * dilation) - static_cast<long>(padding);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(xs.h) || ix >= static_cast<long>(xs.w)) continue;
                acc += w.at(o, c, ky, kx) * x.at(n, c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
              }
          out.at(n, o, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)) = acc;
        }
  return out;
}

/// Block sums over a (rows x cols) grid of one plane.
inline std::vector<double> block_sums(std::span<const double> plane, std::size_t h, std::size_t w, std::size_t rows,
                                      std::size_t cols) {
  std::vector<double> out(rows * cols, 0.0);
  const std::size_t bh = h / rows;
  const std::size_t bw = w / cols;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t y = r * bh; y < (r + 1) * bh; ++y)
        for (std::size_t x = c * bw; x < (c + 1) * bw; ++x) acc += plane[y * w + x];
      out[r * cols + c] = acc;
    }
  return out;
}

/// Eq. 1 from its statement: low (0) when count <= th.
inline std::uint8_t scalar_class(double count, double th) { return count <= th ? 0 : 1; }

/// Per-cell select-and-sum: take hcn where the gate is 1, lcn otherwise.
inline double select_and_sum(std::span<const double> lcn, std::span<const double> hcn,
                             std::span<const std::uint8_t> gate) {
  double total = 0.0;
  for (std::size_t i = 0; i < gate.size(); ++i) total += gate[i] ? hcn[i] : lcn[i];
  return total;
}

/// Median by full sort of the strictly positive values.
inline double sorted_positive_median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !(v > 0.0); });
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct GradCheck {
  double max_rel = 0.0;  ///< worst per-tensor relative error
  std::size_t checked = 0;
};

/// Central finite differences of `loss` (a scalar function of `params`)
/// against the analytic gradients from backward(). Per tensor the error is
/// ||analytic - numeric|| / max(||analytic||, ||numeric||, floor) over the
/// probed coordinates. Tensors larger than `max_probes` are probed at a
/// seeded random subset of coordinates.
inline GradCheck finite_difference_check(const std::function<Variable<double>()>& loss,
                                         std::vector<Variable<double>> params, double step = 1e-5,
                                         std::size_t max_probes = 256, std::uint64_t seed = 1,
                                         double floor = 1e-6) {
  for (auto& p : params) p.clear_grad();
  backward(loss());
  GradCheck out;
  Rng rng(seed);
  for (auto& p : params) {
    const Tensor4<double> analytic = p.grad();
    std::vector<std::size_t> idx(p.value().size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (idx.size() > max_probes) {
      rng.shuffle(idx.begin(), idx.end());
      idx.resize(max_probes);
    }
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    NoGradGuard guard;
    for (std::size_t i : idx) {
      double& v = p.mutable_value()[i];
      const double orig = v;
      v = orig + step;
      const double up = loss().value()[0];
      v = orig - step;
      const double down = loss().value()[0];
      v = orig;
      const double numeric = (up - down) / (2.0 * step);
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
      ++out.checked;
    }
    const double denom = std::max({std::sqrt(a2), std::sqrt(n2), floor});
    out.max_rel = std::max(out.max_rel, std::sqrt(diff2) / denom);
    p.clear_grad();
  }
  return out;
}

}  // namespace dacc::testing
