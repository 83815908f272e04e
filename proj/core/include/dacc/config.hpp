#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dacc/groundtruth.hpp"
#include "dacc/loss.hpp"
#include "dacc/network.hpp"

namespace dacc {

/// Everything needed to train and evaluate one model.
struct TrainConfig {
  ArchitectureConfig arch;           ///< input_size (512) and grid (8x8)
  std::optional<double> th;          ///< unset: calibrate on the training split
  LossWeights lambda;                ///< all 1.0
  double learning_rate = 1e-5;
  std::optional<double> finetune_learning_rate;  ///< unset: learning_rate
  std::size_t batch_size = 4;
  std::size_t pretrain_epochs = 50;
  std::size_t finetune_epochs = 50;
  std::uint64_t seed = 0;
  SigmaMode sigma_mode = SigmaMode::fixed(4.0);
  double flip_probability = 0.5;
  bool masked_count_loss = true;     ///< false: counters see every cell

  double finetune_lr() const { return finetune_learning_rate.value_or(learning_rate); }

  /// Throws ValidationError on inconsistent values.
  void validate() const;
};

/// "key = value" lines; '#' starts a comment. Unknown keys, duplicate keys
/// and malformed values are rejected with the line number.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(format_config(c)) == c.
std::string format_config(const TrainConfig& config);

/// Parses "HxW" (e.g. "8x8").
GridSpec parse_grid(std::string_view text);

}  // namespace dacc
