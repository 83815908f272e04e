#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dacc/config.hpp"
#include "dacc/groundtruth.hpp"
#include "dacc/tensor.hpp"

namespace dacc {

enum class Split { train, test };

struct ManifestEntry {
  std::filesystem::path image;       ///< relative to the manifest directory
  std::filesystem::path annotation;  ///< relative to the manifest directory
  Split split = Split::train;
};

/// `manifest.txt` in a data directory: one "image annotation split" line per
/// sample, split being "train" or "test".
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
};

inline constexpr const char* kManifestName = "manifest.txt";

/// Throws ValidationError if a referenced file is missing or an image path
/// is listed twice.
DatasetManifest load_manifest(const std::filesystem::path& dir);
void write_manifest(const DatasetManifest& manifest);

/// One preprocessed image with its ground truth at network resolution.
struct Sample {
  std::string id;
  Tensor4<float> image;   ///< (1, 3, S, S)
  HeadAnnotations heads;  ///< network-resolution coordinates
  DensityMap density;     ///< S x S
  CountMap counts;        ///< grid resolution

  double true_count() const { return static_cast<double>(heads.count()); }
};

/// Preprocesses `image` to config.arch.input_size and builds density and
/// count maps from the transformed annotations.
Sample make_sample(std::string id, const Tensor4<float>& image, const HeadAnnotations& ann, const TrainConfig& config);

/// Loads every entry (or only those of `split`) into memory.
std::vector<Sample> load_samples(const DatasetManifest& manifest, const TrainConfig& config,
                                 std::optional<Split> split = std::nullopt);

/// Count maps of a sample list, for threshold calibration.
std::vector<CountMap> collect_count_maps(std::span<const Sample> samples);

/// Mirror of a sample: image, annotations and maps flipped left-to-right.
Sample flip_sample(const Sample& s);

std::string_view to_string(Split split);

}  // namespace dacc
