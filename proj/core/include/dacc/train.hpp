#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dacc/config.hpp"
#include "dacc/dataset.hpp"
#include "dacc/network.hpp"

namespace dacc {

/// Receives one "key=value ..." record per epoch / report.
using LogSink = std::function<void(std::string_view)>;

/// Mini-batch tensors for one training step.
struct Batch {
  Tensor4<float> images;   ///< (B, 3, S, S)
  Tensor4<float> density;  ///< (B, 1, S, S)
  Tensor4<float> counts;   ///< (B, 1, H, W)
  Tensor4<float> classes;  ///< (B, 1, H, W), 0/1
};

/// Stacks samples (mirrored where `flip[i]`) into a batch; classes use `th`.
Batch make_batch(std::span<const Sample* const> samples, std::span<const bool> flip, double th);

struct PretrainResult {
  BasicArchitecture<float> base;
  std::vector<double> step_loss;   ///< density loss per optimisation step
  std::vector<double> epoch_loss;  ///< mean step loss per epoch
};

/// Trains the base + density head with the density loss only, starting from
/// the seeded initialisation (or `init`). Throws ValidationError for an
/// empty dataset.
PretrainResult pretrain_base(std::span<const Sample> data, const TrainConfig& config, const LogSink& log = {});
PretrainResult pretrain_base(BasicArchitecture<float> init, std::span<const Sample> data, const TrainConfig& config,
                             const LogSink& log = {});

struct FinetuneHistory {
  std::vector<double> step_loss;      ///< composite loss per step
  std::vector<double> specific_loss;  ///< class (DAN) or masked count (LCN/HCN) part per step
  std::vector<double> epoch_loss;
};

struct FinetuneResult {
  NetworkTriple<float> nets;
  double th = 0.0;
  FinetuneHistory dan;
  FinetuneHistory lcn;
  FinetuneHistory hcn;
};

/// Copies `base` into DAN, LCN and HCN and trains each with its composite
/// loss: DAN on density + class, LCN on density + count over class-0 cells,
/// HCN on density + count over class-1 cells. Throws ValidationError for an
/// empty dataset, an invalid threshold, or a base built for another
/// input size / grid.
FinetuneResult finetune_heads(const BasicArchitecture<float>& base, std::span<const Sample> data,
                              const TrainConfig& config, double th, const LogSink& log = {});

struct TrainedModel {
  BasicArchitecture<float> base;
  NetworkTriple<float> nets;
  double th = 0.0;
};

/// Resolves th on `data`, pretrains, then fine-tunes.
TrainedModel train_staged(std::span<const Sample> data, const TrainConfig& config, const LogSink& log = {});

/// config.th if set, otherwise the calibrated median over `data`.
double resolve_threshold(const TrainConfig& config, std::span<const Sample> data);

std::string format_real(double v);

}  // namespace dacc
