#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "dacc/conv.hpp"
#include "dacc/groundtruth.hpp"
#include "dacc/ops.hpp"
#include "dacc/params.hpp"

namespace dacc {

enum class NetworkKind : std::uint32_t { base = 0, lcn = 1, hcn = 2, dan = 3 };

std::string_view to_string(NetworkKind kind);

/// Structural settings shared by every network of one model.
struct ArchitectureConfig {
  std::size_t input_size = 512;
  GridSpec grid{8, 8};
  ConvAlgorithm algorithm = ConvAlgorithm::im2col;

  /// Side of the square local-sum / local-classify kernel (= its stride).
  /// Throws ValidationError for grids that are not square or do not divide
  /// the input.
  std::size_t head_kernel() const;
};

/// FNV-1a hash of the structural configuration, stored in checkpoints.
std::uint64_t architecture_fingerprint(const ArchitectureConfig& config);

template <typename T>
struct ConvLayer {
  Variable<T> weight;
  Variable<T> bias;
  ConvGeometry geometry;

  Variable<T> operator()(const Variable<T>& x) const { return conv2d(x, weight, bias, geometry); }
  ConvLayer clone() const;
};

/// conv1_1 .. conv5 plus the 1x1 density head.
template <typename T>
class BasicArchitecture {
 public:
  static constexpr std::array<const char*, 7> kConvNames{"conv1_1", "conv1_2", "conv1_3", "conv2",
                                                         "conv3",   "conv4",   "conv5"};
  static constexpr std::array<std::size_t, 8> kChannels{3, 24, 24, 24, 48, 24, 12, 12};
  static constexpr std::array<std::size_t, 7> kDilations{1, 1, 1, 2, 4, 2, 1};

  struct Output {
    Variable<T> features;  ///< ReLU(conv5), (n, 12, S, S)
    Variable<T> density;   ///< (n, 1, S, S), unclamped
  };

  BasicArchitecture() = default;
  BasicArchitecture(const ArchitectureConfig& config, std::uint64_t seed);
  BasicArchitecture(BasicArchitecture&&) noexcept = default;
  BasicArchitecture& operator=(BasicArchitecture&&) noexcept = default;

  BasicArchitecture clone() const;
  Output forward(const Variable<T>& image) const;
  void collect(ParamSet<T>& params) const;
  ParamSet<T> params() const;

  const ArchitectureConfig& config() const { return config_; }
  const std::array<ConvLayer<T>, 7>& convs() const { return convs_; }
  const ConvLayer<T>& density_head() const { return density_; }

 private:
  ArchitectureConfig config_{};
  std::array<ConvLayer<T>, 7> convs_{};
  ConvLayer<T> density_{};
};

/// LCN / HCN: base followed by a trainable local-sum conv on the density map.
template <typename T>
class CounterNetwork {
 public:
  struct Output {
    Variable<T> density;  ///< (n, 1, S, S)
    Variable<T> counts;   ///< (n, 1, H, W)
  };

  CounterNetwork() = default;
  /// Local-sum head starts as exact sum pooling (all-ones weight, zero bias).
  CounterNetwork(BasicArchitecture<T> base, NetworkKind kind);
  CounterNetwork(CounterNetwork&&) noexcept = default;
  CounterNetwork& operator=(CounterNetwork&&) noexcept = default;

  CounterNetwork clone() const;
  Output forward(const Variable<T>& image) const;
  ParamSet<T> params() const;

  NetworkKind kind() const { return kind_; }
  const BasicArchitecture<T>& base() const { return base_; }
  const ConvLayer<T>& local_sum() const { return local_sum_; }

 private:
  BasicArchitecture<T> base_;
  ConvLayer<T> local_sum_{};
  NetworkKind kind_ = NetworkKind::lcn;
};

/// DAN: base followed by a (S/H)x(S/H) stride-(S/H) 12->12 conv and a 1x1
/// 12->2 conv giving per-cell low/high logits. No activation between them.
template <typename T>
class DensityAdaptionNetwork {
 public:
  struct Output {
    Variable<T> density;  ///< (n, 1, S, S)
    Variable<T> logits;   ///< (n, 2, H, W)
    Variable<T> probs;    ///< softmax over the two logit channels
  };

  DensityAdaptionNetwork() = default;
  DensityAdaptionNetwork(BasicArchitecture<T> base, std::uint64_t head_seed);
  DensityAdaptionNetwork(DensityAdaptionNetwork&&) noexcept = default;
  DensityAdaptionNetwork& operator=(DensityAdaptionNetwork&&) noexcept = default;

  DensityAdaptionNetwork clone() const;
  Output forward(const Variable<T>& image) const;
  ParamSet<T> params() const;

  const BasicArchitecture<T>& base() const { return base_; }
  const ConvLayer<T>& classify() const { return classify_; }
  const ConvLayer<T>& classify_fc() const { return classify_fc_; }

 private:
  BasicArchitecture<T> base_;
  ConvLayer<T> classify_{};
  ConvLayer<T> classify_fc_{};
};

template <typename T>
struct NetworkTriple {
  DensityAdaptionNetwork<T> dan;
  CounterNetwork<T> lcn;
  CounterNetwork<T> hcn;
};

/// DAN head seed used whenever a model is assembled from a base.
inline std::uint64_t dan_head_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

/// Three independent networks whose bases start from the same seeded
/// initialisation.
template <typename T>
NetworkTriple<T> build_networks(const ArchitectureConfig& config, std::uint64_t seed);

/// Per-cell argmax of (n, 2, H, W) probabilities for batch item `item`;
/// channel 1 is high density and ties go to 0.
template <typename T>
ClassMap predict_class_map(const Tensor4<T>& probs, std::size_t item = 0);

/// Throws ShapeError unless the image is (n, 3, S, S) with S = config.input_size.
void check_image_shape(const Shape4& shape, const ArchitectureConfig& config);

}  // namespace dacc
