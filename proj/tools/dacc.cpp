// dacc: command-line front end for synthetic data, ground truth, training
// and evaluation. Exit codes: 0 success, 2 validation error, 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "dacc/annotations.hpp"
#include "dacc/checkpoint.hpp"
#include "dacc/config.hpp"
#include "dacc/dataset.hpp"
#include "dacc/errors.hpp"
#include "dacc/evaluate.hpp"
#include "dacc/image_io.hpp"
#include "dacc/preprocess.hpp"
#include "dacc/synth.hpp"
#include "dacc/train.hpp"

namespace fs = std::filesystem;
using namespace dacc;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

void emit(std::string_view record) {
  std::cout << record << '\n' << std::flush;
}

std::vector<Sample> samples_of(const fs::path& data, const TrainConfig& cfg, std::optional<Split> split) {
  auto samples = load_samples(load_manifest(data), cfg, split);
  if (samples.empty()) {
    throw ValidationError(data.string() + ": no " + (split ? std::string(to_string(*split)) + " " : std::string()) +
                          "images in the manifest");
  }
  return samples;
}

SigmaMode sigma_from_flags(const std::string& mode, double sigma) {
  if (mode == "fixed") return SigmaMode::fixed(sigma);
  if (mode == "adaptive") return SigmaMode::adaptive(3, 0.3, sigma);
  throw ValidationError("--sigma-mode must be fixed or adaptive");
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string counts_text(const CountMap& counts) {
  std::string out;
  char buf[64];
  for (std::size_t r = 0; r < counts.rows(); ++r) {
    for (std::size_t c = 0; c < counts.cols(); ++c) {
      std::snprintf(buf, sizeof buf, c ? " %.17g" : "%.17g", counts.at(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-adaptive crowd counting"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic bimodal crowd corpus");
  std::string synth_out;
  std::size_t synth_n = 0;
  std::uint64_t synth_seed = 0;
  SynthOptions synth_opts;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n", synth_n, "Number of images")->required()->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Corpus seed")->required();
  synth->add_option("--size", synth_opts.size, "Square image side")->check(CLI::PositiveNumber);
  synth->add_flag("--shifted", synth_opts.shifted, "Darker background with fainter, larger heads");
  synth->add_option("--test-fraction", synth_opts.test_fraction, "Trailing share tagged test")->check(CLI::Range(0.0, 1.0));

  // make-gt / calibrate
  auto* make_gt = app.add_subcommand("make-gt", "Write density and count ground truth for a dataset");
  std::string data_dir;
  std::string sigma_mode = "fixed";
  double sigma = 4.0;
  std::string grid_text = "8x8";
  std::size_t size = 512;
  make_gt->add_option("--data", data_dir, "Dataset directory")->required();
  make_gt->add_option("--sigma-mode", sigma_mode, "fixed or adaptive")->check(CLI::IsMember({"fixed", "adaptive"}));
  make_gt->add_option("--sigma", sigma, "Gaussian spread (fallback for adaptive)");
  make_gt->add_option("--grid", grid_text, "Count grid HxW");
  make_gt->add_option("--size", size, "Network input side");

  auto* calibrate = app.add_subcommand("calibrate", "Print the calibrated density threshold th");
  calibrate->add_option("--data", data_dir, "Dataset directory")->required();
  calibrate->add_option("--grid", grid_text, "Count grid HxW");
  calibrate->add_option("--sigma-mode", sigma_mode, "fixed or adaptive")->check(CLI::IsMember({"fixed", "adaptive"}));
  calibrate->add_option("--sigma", sigma, "Gaussian spread");
  calibrate->add_option("--size", size, "Network input side");

  // training
  std::string config_path;
  std::string out_path;
  std::string base_path;
  std::string ckpts_dir;
  auto* pretrain = app.add_subcommand("pretrain", "Train the base network on density maps");
  pretrain->add_option("--data", data_dir, "Dataset directory")->required();
  pretrain->add_option("--config", config_path, "Config file")->required();
  pretrain->add_option("--out", out_path, "Output checkpoint")->required();

  auto* finetune = app.add_subcommand("finetune", "Fine-tune DAN, LCN and HCN from a base checkpoint");
  finetune->add_option("--data", data_dir, "Dataset directory")->required();
  finetune->add_option("--base", base_path, "Base checkpoint")->required();
  finetune->add_option("--config", config_path, "Config file")->required();
  finetune->add_option("--out", out_path, "Output model directory")->required();

  // evaluation
  std::string mode_text = "gated";
  auto* eval = app.add_subcommand("eval", "Evaluate a model on the test split");
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  eval->add_option("--ckpts", ckpts_dir, "Model directory")->required();
  eval->add_option("--config", config_path, "Config file")->required();
  eval->add_option("--mode", mode_text, "gated, lcn, hcn or ideal")->check(CLI::IsMember({"gated", "lcn", "hcn", "ideal"}));

  std::string image_path;
  std::string heatmap_path;
  auto* infer = app.add_subcommand("infer", "Count heads in one image");
  infer->add_option("--image", image_path, "PPM/PGM image")->required();
  infer->add_option("--ckpts", ckpts_dir, "Model directory")->required();
  infer->add_option("--config", config_path, "Config file")->required();
  infer->add_option("--heatmap", heatmap_path, "Write the density map as 16-bit PGM");

  std::uint64_t seed = 0;
  auto* cv5 = app.add_subcommand("cv5", "Five-fold cross-validation over every image");
  cv5->add_option("--data", data_dir, "Dataset directory")->required();
  cv5->add_option("--config", config_path, "Config file")->required();
  cv5->add_option("--seed", seed, "Fold partition seed")->required();

  std::string strategy_text;
  std::string source_path;
  auto* xfer = app.add_subcommand("transfer", "Evaluate a transfer strategy on a target dataset");
  xfer->add_option("--strategy", strategy_text, "wo, step or finetune")->required();
  xfer->add_option("--source", source_path, "Source checkpoint (base or any network)");
  xfer->add_option("--data", data_dir, "Target dataset directory")->required();
  xfer->add_option("--config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    const LogSink log = emit;

    if (synth->parsed()) {
      const auto manifest = synth_corpus(synth_n, synth_opts, synth_seed, synth_out);
      emit("synth images=" + std::to_string(manifest.entries.size()) + " out=" + synth_out);
    } else if (make_gt->parsed() || calibrate->parsed()) {
      TrainConfig cfg;
      cfg.arch.input_size = size;
      cfg.arch.grid = parse_grid(grid_text);
      cfg.sigma_mode = sigma_from_flags(sigma_mode, sigma);
      cfg.validate();
      const auto manifest = load_manifest(data_dir);
      if (make_gt->parsed()) {
        const auto samples = load_samples(manifest, cfg);
        const fs::path gt = fs::path(data_dir) / "gt";
        fs::create_directories(gt);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const std::string stem = manifest.entries[i].image.stem().string();
          export_density_pgm(samples[i].density, gt / (stem + ".density.pgm"));
          write_text(gt / (stem + ".counts.txt"), counts_text(samples[i].counts));
        }
        emit("make-gt images=" + std::to_string(samples.size()) + " out=" + gt.string());
      } else {
        auto samples = load_samples(manifest, cfg, Split::train);
        if (samples.empty()) samples = load_samples(manifest, cfg);
        const auto maps = collect_count_maps(samples);
        std::cout << format_real(calibrate_threshold(maps)) << '\n';
      }
    } else if (pretrain->parsed()) {
      const TrainConfig cfg = load_config(config_path);
      const auto train = samples_of(data_dir, cfg, Split::train);
      const PretrainResult r = pretrain_base(train, cfg, log);
      save_checkpoint(out_path, base_checkpoint(r.base));
      emit("pretrain out=" + out_path);
    } else if (finetune->parsed()) {
      const TrainConfig cfg = load_config(config_path);
      const auto train = samples_of(data_dir, cfg, Split::train);
      const BasicArchitecture<float> base = load_base(load_checkpoint(base_path), cfg.arch);
      const double th = resolve_threshold(cfg, train);
      emit("stage=threshold th=" + format_real(th));
      const FinetuneResult r = finetune_heads(base, train, cfg, th, log);
      save_model(out_path, r.nets, th);
      emit("finetune out=" + out_path);
    } else if (eval->parsed()) {
      const TrainConfig cfg = load_config(config_path);
      const auto test = samples_of(data_dir, cfg, Split::test);
      const ModelFiles model = load_model(ckpts_dir, cfg.arch);
      emit(ablate(test, model.nets, model.th, parse_gate_mode(mode_text)).to_record());
    } else if (infer->parsed()) {
      const TrainConfig cfg = load_config(config_path);
      const ModelFiles model = load_model(ckpts_dir, cfg.arch);
      const LoadedImage img = load_image(image_path);
      const Preprocessed pre = preprocess(img.tensor, HeadAnnotations(img.original, {}), cfg.arch.input_size);
      const Prediction p = infer_count(pre.image, model.nets);
      std::size_t high = 0;
      for (auto v : p.classes.values()) high += v;
      emit("count=" + format_real(p.total) + " high_cells=" + std::to_string(high) + " cells=" +
           std::to_string(p.classes.size()));
      if (!heatmap_path.empty()) export_density_pgm(p.density, heatmap_path);
    } else if (cv5->parsed()) {
      const TrainConfig cfg = load_config(config_path);
      const auto all = samples_of(data_dir, cfg, std::nullopt);
      const CrossValidationReport r = crossvalidate_5fold(all, cfg, seed, log);
      for (std::size_t f = 0; f < r.folds.size(); ++f) emit("fold=" + std::to_string(f + 1) + " " + r.folds[f].to_record());
      emit("fold=all " + r.aggregate.to_record());
    } else if (xfer->parsed()) {
      const TrainConfig cfg = load_config(config_path);
      const TransferStrategy strategy = parse_transfer_strategy(strategy_text);
      std::optional<BasicArchitecture<float>> source;
      if (!source_path.empty()) source.emplace(load_base(load_checkpoint(source_path), cfg.arch));
      const auto train = samples_of(data_dir, cfg, Split::train);
      const auto test = samples_of(data_dir, cfg, Split::test);
      const EvalReport r = transfer(source ? &*source : nullptr, train, test, strategy, cfg, log);
      emit("strategy=" + std::string(to_string(strategy)) + " " + r.to_record());
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
