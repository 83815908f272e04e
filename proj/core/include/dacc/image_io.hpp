#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dacc/groundtruth.hpp"
#include "dacc/tensor.hpp"

namespace dacc {

/// 8-bit interleaved RGB raster.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}
  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) { return rgb[(y * width + x) * 3 + c]; }
};

struct LoadedImage {
  Tensor4<float> tensor;  ///< (1, 3, h, w), values in [0, 1]
  ImageSize original;
};

/// Parses binary P6 (RGB) or P5 (grey, replicated to 3 channels) with
/// maxval <= 255. Throws ValidationError naming the byte offset of the
/// problem, or the expected vs actual payload length when truncated.
LoadedImage decode_pnm(std::span<const std::uint8_t> bytes);
LoadedImage load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_ppm(const RgbImage& image);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

/// 16-bit P5 heatmap. The scale s maps max -> 65535 (s = 1 for an all-zero
/// map) and is stored in a "# dacc-density-scale" comment so that
/// value ~= pixel / s.
std::vector<std::uint8_t> encode_density_pgm(const DensityMap& map);
void export_density_pgm(const DensityMap& map, const std::filesystem::path& path);

struct DensityImage {
  DensityMap map;
  double scale = 1.0;
};
DensityImage decode_density_pgm(std::span<const std::uint8_t> bytes);
DensityImage import_density_pgm(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dacc
