#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "dacc/dataset.hpp"
#include "dacc/image_io.hpp"

namespace dacc {

enum class Regime { low, high };

/// Head-count range per regime.
inline constexpr std::pair<std::size_t, std::size_t> kLowHeads{5, 30};
inline constexpr std::pair<std::size_t, std::size_t> kHighHeads{200, 800};

struct SynthOptions {
  std::size_t size = 256;       ///< square image side
  bool shifted = false;         ///< darker background, fainter and larger heads
  double test_fraction = 0.25;  ///< trailing share of images tagged "test"
};

struct SynthImage {
  RgbImage image;
  HeadAnnotations heads;
  Regime regime = Regime::low;
};

inline constexpr std::size_t kRegimeBlock = 5;
inline constexpr std::size_t kLowPerBlock = 2;

/// Regime of corpus image `index`: each block of kRegimeBlock consecutive
/// images holds exactly kLowPerBlock low-regime images at seeded positions.
Regime synth_regime(std::uint64_t corpus_seed, std::size_t index);

/// Renders one image of the given regime from its own seed. Low regime:
/// 5-30 heads spread uniformly. High regime: 200-800 heads from a two-component Gaussian
/// mixture. Heads are dark Gaussian splats whose radius grows with the
/// distance to the nearest neighbour, over a textured noisy background.
SynthImage synth_image(std::uint64_t image_seed, Regime regime, const SynthOptions& options);

/// Seed for image i of a corpus.
std::uint64_t synth_image_seed(std::uint64_t corpus_seed, std::size_t index);

std::vector<SynthImage> synth_images(std::size_t n, const SynthOptions& options, std::uint64_t seed);

/// Writes img_NNNN.ppm / img_NNNN.txt and manifest.txt into `out_dir`.
DatasetManifest synth_corpus(std::size_t n, const SynthOptions& options, std::uint64_t seed,
                             const std::filesystem::path& out_dir);

/// 8-bit RGB -> (1, 3, h, w) in [0, 1], identical to load_image on the PPM.
Tensor4<float> to_tensor(const RgbImage& image);

}  // namespace dacc
