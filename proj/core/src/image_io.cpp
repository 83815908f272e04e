#include "dacc/image_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include "dacc/errors.hpp"

namespace dacc {

namespace {

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

struct PnmHeader {
  char kind = 0;  // '5' or '6'
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t maxval = 0;
  std::size_t payload_offset = 0;
  std::vector<std::string> comments;
};

class HeaderParser {
 public:
  explicit HeaderParser(std::span<const std::uint8_t> bytes) : b_(bytes) {}

  PnmHeader parse() {
    PnmHeader h;
    if (b_.size() < 2 || b_[0] != 'P' || (b_[1] != '5' && b_[1] != '6')) {
      throw ValidationError("not a binary PPM/PGM file: bad magic at byte offset 0");
    }
    h.kind = static_cast<char>(b_[1]);
    pos_ = 2;
    h.width = number("width", h);
    h.height = number("height", h);
    h.maxval = number("maxval", h);
    if (pos_ >= b_.size() || !is_space(b_[pos_])) {
      throw ValidationError("expected a single whitespace byte after maxval at byte offset " + std::to_string(pos_));
    }
    ++pos_;
    h.payload_offset = pos_;
    return h;
  }

 private:
  std::size_t number(const char* what, PnmHeader& h) {
    skip_space_and_comments(h);
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < b_.size() && b_[pos_] >= '0' && b_[pos_] <= '9') {
      value = value * 10 + static_cast<std::size_t>(b_[pos_] - '0');
      if (value > (1u << 24)) throw ValidationError(std::string(what) + " too large at byte offset " + std::to_string(start));
      ++pos_;
    }
    if (pos_ == start) {
      throw ValidationError(std::string("expected ") + what + " at byte offset " + std::to_string(start));
    }
    return value;
  }

  void skip_space_and_comments(PnmHeader& h) {
    while (pos_ < b_.size()) {
      if (is_space(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        const std::size_t start = pos_ + 1;
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
        h.comments.emplace_back(reinterpret_cast<const char*>(b_.data() + start), pos_ - start);
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void require_payload(const PnmHeader& h, std::size_t bytes_per_pixel, std::size_t total) {
  const std::size_t expected = h.width * h.height * bytes_per_pixel;
  const std::size_t actual = total - h.payload_offset;
  if (actual < expected) {
    throw ValidationError("truncated payload starting at byte offset " + std::to_string(h.payload_offset) +
                          ": expected " + std::to_string(expected) + " bytes, got " + std::to_string(actual));
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

LoadedImage decode_pnm(std::span<const std::uint8_t> bytes) {
  const PnmHeader h = HeaderParser(bytes).parse();
  if (h.width == 0 || h.height == 0) throw ValidationError("image has zero extent");
  if (h.maxval == 0 || h.maxval > 255) {
    throw ValidationError("only 8-bit PPM/PGM is supported, maxval " + std::to_string(h.maxval));
  }
  const std::size_t channels = h.kind == '6' ? 3 : 1;
  require_payload(h, channels, bytes.size());
  const auto maxval = static_cast<float>(h.maxval);
  Tensor4<float> t({1, 3, h.height, h.width});
  const std::uint8_t* px = bytes.data() + h.payload_offset;
  for (std::size_t y = 0; y < h.height; ++y) {
    for (std::size_t x = 0; x < h.width; ++x) {
      const std::size_t i = y * h.width + x;
      for (std::size_t c = 0; c < 3; ++c) {
        const std::uint8_t v = channels == 3 ? px[i * 3 + c] : px[i];
        t.at(0, c, y, x) = std::min(1.0f, static_cast<float>(v) / maxval);
      }
    }
  }
  return {std::move(t), {h.width, h.height}};
}

LoadedImage load_image(const std::filesystem::path& path) {
  try {
    return decode_pnm(read_file_bytes(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.rgb.begin(), image.rgb.end());
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) { write_file_bytes(path, encode_ppm(image)); }

std::vector<std::uint8_t> encode_density_pgm(const DensityMap& map) {
  double peak = 0.0;
  for (double v : map.values()) {
    if (v < 0.0 || !std::isfinite(v)) throw ValidationError("density heatmap requires finite non-negative values");
    peak = std::max(peak, v);
  }
  const double scale = peak > 0.0 ? 65535.0 / peak : 1.0;
  const std::string header = "P5\n# dacc-density-scale " + format_double(scale) + "\n" + std::to_string(map.cols()) +
                             " " + std::to_string(map.rows()) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + map.size() * 2);
  for (double v : map.values()) {
    const auto q = static_cast<std::uint16_t>(std::min(65535.0, std::round(v * scale)));
    out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

void export_density_pgm(const DensityMap& map, const std::filesystem::path& path) {
  write_file_bytes(path, encode_density_pgm(map));
}

DensityImage decode_density_pgm(std::span<const std::uint8_t> bytes) {
  const PnmHeader h = HeaderParser(bytes).parse();
  if (h.kind != '5' || h.maxval != 65535) throw ValidationError("density heatmap must be a 16-bit P5 file");
  require_payload(h, 2, bytes.size());
  double scale = 1.0;
  bool found = false;
  const std::string key = " dacc-density-scale ";
  for (const auto& c : h.comments) {
    if (c.rfind(key, 0) == 0) {
      const std::string num = c.substr(key.size());
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), scale);
      if (ec != std::errc() || !(scale > 0.0)) throw ValidationError("malformed density scale comment");
      found = true;
    }
  }
  if (!found) throw ValidationError("density heatmap has no scale comment");
  DensityMap map(h.height, h.width);
  const std::uint8_t* px = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const unsigned q = (static_cast<unsigned>(px[2 * i]) << 8) | px[2 * i + 1];
    map.values()[i] = static_cast<double>(q) / scale;
  }
  return {std::move(map), scale};
}

DensityImage import_density_pgm(const std::filesystem::path& path) { return decode_density_pgm(read_file_bytes(path)); }

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace dacc
