#include "dacc/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dacc/annotations.hpp"
#include "dacc/errors.hpp"
#include "dacc/image_io.hpp"
#include "dacc/preprocess.hpp"

namespace dacc {

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

DatasetManifest load_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  DatasetManifest m;
  m.root = dir;
  std::set<std::string> images;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string image, annotation, split, extra;
    if (!(ss >> image)) continue;
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (!(ss >> annotation >> split) || (ss >> extra)) throw ValidationError(where + ": expected 'image annotation split'");
    ManifestEntry e{image, annotation, Split::train};
    if (split == "train") e.split = Split::train;
    else if (split == "test") e.split = Split::test;
    else throw ValidationError(where + ": split must be train or test");
    if (!std::filesystem::exists(dir / e.image)) throw ValidationError(where + ": missing image " + image);
    if (!std::filesystem::exists(dir / e.annotation)) throw ValidationError(where + ": missing annotation " + annotation);
    if (!images.insert(image).second) throw ValidationError(where + ": duplicate image " + image);
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest) {
  const auto path = manifest.root / kManifestName;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& e : manifest.entries) {
    out << e.image.generic_string() << ' ' << e.annotation.generic_string() << ' ' << to_string(e.split) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Sample make_sample(std::string id, const Tensor4<float>& image, const HeadAnnotations& ann, const TrainConfig& config) {
  Preprocessed pre = preprocess(image, ann, config.arch.input_size);
  const std::size_t s = config.arch.input_size;
  DensityMap density = density_map(pre.annotations, {s, s}, config.sigma_mode);
  CountMap counts = count_map(density, config.arch.grid);
  return {std::move(id), std::move(pre.image), std::move(pre.annotations), std::move(density), std::move(counts)};
}

std::vector<Sample> load_samples(const DatasetManifest& manifest, const TrainConfig& config, std::optional<Split> split) {
  std::vector<Sample> out;
  for (const auto& e : manifest.entries) {
    if (split && e.split != *split) continue;
    LoadedImage img = load_image(manifest.root / e.image);
    HeadAnnotations ann = read_annotations(manifest.root / e.annotation);
    out.push_back(make_sample(e.image.stem().string(), img.tensor, ann, config));
  }
  return out;
}

std::vector<CountMap> collect_count_maps(std::span<const Sample> samples) {
  std::vector<CountMap> maps;
  maps.reserve(samples.size());
  for (const auto& s : samples) maps.push_back(s.counts);
  return maps;
}

Sample flip_sample(const Sample& s) {
  return {s.id, flip_horizontal(s.image), flip_horizontal(s.heads), s.density.flipped_horizontal(),
          s.counts.flipped_horizontal()};
}

}  // namespace dacc
