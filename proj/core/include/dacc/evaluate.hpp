#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dacc/dataset.hpp"
#include "dacc/network.hpp"
#include "dacc/train.hpp"

namespace dacc {

/// How per-cell counts of LCN and HCN are combined into an image total.
enum class GateMode : std::uint8_t { gated, lcn_only, hcn_only, ideal };

inline constexpr std::array<GateMode, 4> kGateModes{GateMode::gated, GateMode::lcn_only, GateMode::hcn_only,
                                                     GateMode::ideal};

std::string_view to_string(GateMode mode);
/// Accepts gated, lcn, hcn, ideal (and lcn_only, hcn_only, ideal_gate).
GateMode parse_gate_mode(std::string_view text);

/// sum over cells of lcn * (1 - p) + hcn * p. Throws ShapeError on mismatch.
double fuse_counts(const CountMap& lcn, const CountMap& hcn, const ClassMap& p);

struct Prediction {
  double total = 0.0;  ///< gated count
  DensityMap density;  ///< DAN density output, negatives clamped to 0
  ClassMap classes;    ///< DAN argmax
  CountMap lcn;
  CountMap hcn;
};

/// Runs the three networks on a (1, 3, S, S) image without recording a graph.
Prediction infer_count(const Tensor4<float>& image, const NetworkTriple<float>& nets);

/// Per-image totals under every gate mode, plus DAN cell agreement.
struct ImageOutcome {
  std::string id;
  double truth = 0.0;
  double gated = 0.0;
  double lcn_only = 0.0;
  double hcn_only = 0.0;
  double ideal = 0.0;
  std::size_t correct_cells = 0;
  std::size_t cells = 0;

  double count(GateMode mode) const;
};

std::vector<ImageOutcome> run_outcomes(std::span<const Sample> data, const NetworkTriple<float>& nets, double th);

struct EvalReport {
  GateMode mode = GateMode::gated;
  double mae = 0.0;
  double mse = 0.0;  ///< root-mean-square error
  std::vector<std::pair<double, double>> pairs;  ///< (truth, prediction)
  double dan_accuracy = 0.0;
  std::size_t correct_cells = 0;
  std::size_t cells = 0;

  /// "mode=... n=... mae=... mse=... dan_accuracy=..." with %.9g numbers.
  std::string to_record() const;
};

/// MAE and root-mean-square error of (truth, prediction) pairs; the other
/// fields are left at their defaults. Throws ValidationError when empty.
EvalReport metrics_from_pairs(std::vector<std::pair<double, double>> pairs);

EvalReport summarize(std::span<const ImageOutcome> outcomes, GateMode mode);

/// Gated evaluation. Throws ValidationError for an empty set.
EvalReport evaluate(std::span<const Sample> data, const NetworkTriple<float>& nets, double th);
EvalReport ablate(std::span<const Sample> data, const NetworkTriple<float>& nets, double th, GateMode mode);

/// Seeded partition of [0, n) into 5 folds; the first n % 5 folds hold one
/// extra index. Throws ValidationError for n < 5.
std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::uint64_t seed);

struct CrossValidationReport {
  std::vector<EvalReport> folds;
  EvalReport aggregate;  ///< over the pooled per-image pairs
};

/// Trains on four folds and tests the gated model on the fifth, five times.
CrossValidationReport crossvalidate_5fold(std::span<const Sample> data, const TrainConfig& config,
                                          std::uint64_t seed, const LogSink& log = {});

enum class TransferStrategy : std::uint8_t { wo_finetune, step_on_target, finetune_on_target };

std::string_view to_string(TransferStrategy strategy);
/// Accepts wo, step, finetune and the long names.
TransferStrategy parse_transfer_strategy(std::string_view text);

/// Networks a transfer strategy yields on the target domain.
struct TransferModel {
  NetworkTriple<float> nets;
  double th = 0.0;
};

/// wo_finetune: all three networks copy `source` untouched, so LCN and HCN
/// both block-sum its density map. step_on_target: staged training on
/// `target_train` from scratch. finetune_on_target: finetune_heads from
/// `source`. th is resolved on `target_train`. Throws ValidationError when
/// `source` is needed and absent.
TransferModel transfer_model(const BasicArchitecture<float>* source, std::span<const Sample> target_train,
                             TransferStrategy strategy, const TrainConfig& config, const LogSink& log = {});

EvalReport transfer(const BasicArchitecture<float>* source, std::span<const Sample> target_train,
                    std::span<const Sample> target_test, TransferStrategy strategy, const TrainConfig& config,
                    const LogSink& log = {});

}  // namespace dacc
