#include "dacc/network.hpp"

#include <cmath>


#include "dacc/errors.hpp"
#include "dacc/random.hpp"

namespace dacc {

namespace {

/// Uniform in [-bound, bound] with bound = sqrt(gain / fan_in).
template <typename T>
ConvLayer<T> make_conv(std::size_t in_c, std::size_t out_c, std::size_t k, ConvGeometry geometry, double gain,
                       Rng& rng) {
  const double fan_in = static_cast<double>(in_c * k * k);
  const double bound = std::sqrt(gain / fan_in);
  Tensor4<T> w({out_c, in_c, k, k});
  for (auto& v : w.data()) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
  return {Variable<T>::parameter(std::move(w)), Variable<T>::parameter(Tensor4<T>({out_c, 1, 1, 1})), geometry};
}

template <typename T>
void add_layer(ParamSet<T>& params, const std::string& name, ParamRole role, const ConvLayer<T>& layer) {
  params.add(name + ".weight", role, layer.weight);
  params.add(name + ".bias", role, layer.bias);
}

}  // namespace

std::string_view to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::base: return "base";
    case NetworkKind::lcn: return "lcn";
    case NetworkKind::hcn: return "hcn";
    case NetworkKind::dan: return "dan";
  }
  return "unknown";
}

std::size_t ArchitectureConfig::head_kernel() const {
  if (grid.rows == 0 || grid.cols == 0) throw ValidationError("grid extents must be positive");
  if (grid.rows != grid.cols) {
    throw ValidationError("networks require a square grid, got " + std::to_string(grid.rows) + "x" +
                          std::to_string(grid.cols));
  }
  if (input_size == 0 || input_size % grid.rows != 0) {
    throw ValidationError("grid " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                          " does not divide input size " + std::to_string(input_size));
  }
  return input_size / grid.rows;
}

std::uint64_t architecture_fingerprint(const ArchitectureConfig& config) {
  const std::string canonical = "dacc-arch-v1;input_size=" + std::to_string(config.input_size) +
                                ";grid=" + std::to_string(config.grid.rows) + "x" + std::to_string(config.grid.cols);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_image_shape(const Shape4& shape, const ArchitectureConfig& config) {
  if (shape.n == 0 || shape.c != 3 || shape.h != config.input_size || shape.w != config.input_size) {
    throw ShapeError("expected image (n,3," + std::to_string(config.input_size) + "," +
                     std::to_string(config.input_size) + "), got " + shape.to_string());
  }
}

template <typename T>
ConvLayer<T> ConvLayer<T>::clone() const {
  return {Variable<T>::parameter(weight.value()), Variable<T>::parameter(bias.value()), geometry};
}

// ---------------------------------------------------------------------------
// BasicArchitecture

template <typename T>
BasicArchitecture<T>::BasicArchitecture(const ArchitectureConfig& config, std::uint64_t seed) : config_(config) {
  config_.head_kernel();
  Rng rng(seed);
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    ConvGeometry g{1, kDilations[i], same_padding(3, kDilations[i]), config.algorithm};
    convs_[i] = make_conv<T>(kChannels[i], kChannels[i + 1], 3, g, 6.0, rng);
  }
  density_ = make_conv<T>(kChannels.back(), 1, 1, ConvGeometry{1, 1, 0, config.algorithm}, 1.0, rng);
}

template <typename T>
BasicArchitecture<T> BasicArchitecture<T>::clone() const {
  BasicArchitecture out;
  out.config_ = config_;
  for (std::size_t i = 0; i < convs_.size(); ++i) out.convs_[i] = convs_[i].clone();
  out.density_ = density_.clone();
  return out;
}

template <typename T>
typename BasicArchitecture<T>::Output BasicArchitecture<T>::forward(const Variable<T>& image) const {
  check_image_shape(image.shape(), config_);
  Variable<T> x = image;
  for (const auto& layer : convs_) x = relu(layer(x));
  Variable<T> density = density_(x);
  return {x, density};
}

template <typename T>
void BasicArchitecture<T>::collect(ParamSet<T>& params) const {
  for (std::size_t i = 0; i < convs_.size(); ++i) add_layer(params, kConvNames[i], ParamRole::base, convs_[i]);
  add_layer(params, "density", ParamRole::density_head, density_);
}

template <typename T>
ParamSet<T> BasicArchitecture<T>::params() const {
  ParamSet<T> p;
  collect(p);
  return p;
}

// ---------------------------------------------------------------------------
// CounterNetwork

template <typename T>
CounterNetwork<T>::CounterNetwork(BasicArchitecture<T> base, NetworkKind kind) : base_(std::move(base)), kind_(kind) {
  if (kind != NetworkKind::lcn && kind != NetworkKind::hcn) throw ValidationError("counter kind must be lcn or hcn");
  const std::size_t k = base_.config().head_kernel();
  local_sum_ = {Variable<T>::parameter(Tensor4<T>({1, 1, k, k}, T(1))),
                Variable<T>::parameter(Tensor4<T>({1, 1, 1, 1})),
                ConvGeometry{k, 1, 0, base_.config().algorithm}};
}

template <typename T>
CounterNetwork<T> CounterNetwork<T>::clone() const {
  CounterNetwork out;
  out.base_ = base_.clone();
  out.local_sum_ = local_sum_.clone();
  out.kind_ = kind_;
  return out;
}

template <typename T>
typename CounterNetwork<T>::Output CounterNetwork<T>::forward(const Variable<T>& image) const {
  auto base_out = base_.forward(image);
  Variable<T> counts = local_sum_(base_out.density);
  return {base_out.density, counts};
}

template <typename T>
ParamSet<T> CounterNetwork<T>::params() const {
  ParamSet<T> p;
  base_.collect(p);
  add_layer(p, "local_sum", ParamRole::count_head, local_sum_);
  return p;
}

// ---------------------------------------------------------------------------
// DensityAdaptionNetwork

template <typename T>
DensityAdaptionNetwork<T>::DensityAdaptionNetwork(BasicArchitecture<T> base, std::uint64_t head_seed)
    : base_(std::move(base)) {
  const std::size_t k = base_.config().head_kernel();
  const auto algo = base_.config().algorithm;
  Rng rng(head_seed);
  classify_ = make_conv<T>(12, 12, k, ConvGeometry{k, 1, 0, algo}, 6.0, rng);
  classify_fc_ = make_conv<T>(12, 2, 1, ConvGeometry{1, 1, 0, algo}, 1.0, rng);
}

template <typename T>
DensityAdaptionNetwork<T> DensityAdaptionNetwork<T>::clone() const {
  DensityAdaptionNetwork out;
  out.base_ = base_.clone();
  out.classify_ = classify_.clone();
  out.classify_fc_ = classify_fc_.clone();
  return out;
}

template <typename T>
typename DensityAdaptionNetwork<T>::Output DensityAdaptionNetwork<T>::forward(const Variable<T>& image) const {
  auto base_out = base_.forward(image);
  Variable<T> logits = classify_fc_(classify_(base_out.features));
  return {base_out.density, logits, softmax_channels(logits)};
}

template <typename T>
ParamSet<T> DensityAdaptionNetwork<T>::params() const {
  ParamSet<T> p;
  base_.collect(p);
  add_layer(p, "classify", ParamRole::class_head, classify_);
  add_layer(p, "classify_fc", ParamRole::class_head, classify_fc_);
  return p;
}

// ---------------------------------------------------------------------------

template <typename T>
NetworkTriple<T> build_networks(const ArchitectureConfig& config, std::uint64_t seed) {
  BasicArchitecture<T> base(config, seed);
  // DAN head stream is decorrelated from the base stream.
  const std::uint64_t head_seed = dan_head_seed(seed);
  NetworkTriple<T> out{DensityAdaptionNetwork<T>(base.clone(), head_seed), CounterNetwork<T>(base.clone(), NetworkKind::lcn),
                       CounterNetwork<T>(std::move(base), NetworkKind::hcn)};
  return out;
}

template <typename T>
ClassMap predict_class_map(const Tensor4<T>& probs, std::size_t item) {
  const Shape4 s = probs.shape();
  if (s.c != 2 || item >= s.n) throw ShapeError("predict_class_map expects (n,2,H,W) probabilities, got " + s.to_string());
  ClassMap out(s.h, s.w);
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x) out.at(y, x) = probs.at(item, 1, y, x) > probs.at(item, 0, y, x) ? 1 : 0;
  return out;
}

#define DACC_INSTANTIATE_NETWORK(T)                                                          \
  template struct ConvLayer<T>;                                                              \
  template class BasicArchitecture<T>;                                                       \
  template class CounterNetwork<T>;                                                          \
  template class DensityAdaptionNetwork<T>;                                                  \
  template NetworkTriple<T> build_networks(const ArchitectureConfig&, std::uint64_t);        \
  template ClassMap predict_class_map(const Tensor4<T>&, std::size_t);

DACC_INSTANTIATE_NETWORK(float)
DACC_INSTANTIATE_NETWORK(double)

#undef DACC_INSTANTIATE_NETWORK

}  // namespace dacc
