#include "dacc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dacc/errors.hpp"
#include "dacc/random.hpp"

namespace dacc {

namespace {

constexpr std::uint64_t kFoldStream = 0x666f6c64;  // "fold"

CountMap tensor_to_counts(const Tensor4<float>& t) {
  const Shape4 s = t.shape();
  CountMap out(s.h, s.w);
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x) out.at(y, x) = static_cast<double>(t.at(0, 0, y, x));
  return out;
}

double plain_sum(const CountMap& m) {
  double acc = 0.0;
  for (double v : m.values()) acc += v;
  return acc;
}

std::string fmt(double v) { return format_real(v); }

}  // namespace

std::string_view to_string(GateMode mode) {
  switch (mode) {
    case GateMode::gated: return "gated";
    case GateMode::lcn_only: return "lcn";
    case GateMode::hcn_only: return "hcn";
    case GateMode::ideal: return "ideal";
  }
  return "unknown";
}

GateMode parse_gate_mode(std::string_view text) {
  if (text == "gated") return GateMode::gated;
  if (text == "lcn" || text == "lcn_only") return GateMode::lcn_only;
  if (text == "hcn" || text == "hcn_only") return GateMode::hcn_only;
  if (text == "ideal" || text == "ideal_gate") return GateMode::ideal;
  throw ValidationError("unknown gate mode '" + std::string(text) + "' (expected gated, lcn, hcn or ideal)");
}

double fuse_counts(const CountMap& lcn, const CountMap& hcn, const ClassMap& p) {
  if (lcn.rows() != hcn.rows() || lcn.cols() != hcn.cols() || lcn.rows() != p.rows() || lcn.cols() != p.cols()) {
    throw ShapeError("fuse_counts: lcn " + std::to_string(lcn.rows()) + "x" + std::to_string(lcn.cols()) + ", hcn " +
                     std::to_string(hcn.rows()) + "x" + std::to_string(hcn.cols()) + ", classes " +
                     std::to_string(p.rows()) + "x" + std::to_string(p.cols()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double g = p.values()[i] ? 1.0 : 0.0;
    total += lcn.values()[i] * (1.0 - g) + hcn.values()[i] * g;
  }
  return total;
}

Prediction infer_count(const Tensor4<float>& image, const NetworkTriple<float>& nets) {
  if (image.shape().n != 1) throw ShapeError("infer_count expects a single image, got " + image.shape().to_string());
  check_image_shape(image.shape(), nets.dan.base().config());
  NoGradGuard guard;
  const auto x = Variable<float>::constant(image);
  const auto dan = nets.dan.forward(x);
  const auto lcn = nets.lcn.forward(x);
  const auto hcn = nets.hcn.forward(x);

  Prediction out;
  out.classes = predict_class_map(dan.probs.value(), 0);
  out.lcn = tensor_to_counts(lcn.counts.value());
  out.hcn = tensor_to_counts(hcn.counts.value());
  out.total = fuse_counts(out.lcn, out.hcn, out.classes);
  const Shape4 ds = dan.density.value().shape();
  out.density = DensityMap(ds.h, ds.w);
  for (std::size_t i = 0; i < out.density.size(); ++i) {
    out.density.values()[i] = std::max(0.0, static_cast<double>(dan.density.value()[i]));
  }
  return out;
}

double ImageOutcome::count(GateMode mode) const {
  switch (mode) {
    case GateMode::gated: return gated;
    case GateMode::lcn_only: return lcn_only;
    case GateMode::hcn_only: return hcn_only;
    case GateMode::ideal: return ideal;
  }
  return gated;
}

std::vector<ImageOutcome> run_outcomes(std::span<const Sample> data, const NetworkTriple<float>& nets, double th) {
  if (data.empty()) throw ValidationError("evaluation set is empty");
  std::vector<ImageOutcome> out;
  out.reserve(data.size());
  for (const Sample& s : data) {
    const Prediction p = infer_count(s.image, nets);
    const ClassMap truth_classes = class_map(s.counts, th);
    if (truth_classes.rows() != p.classes.rows() || truth_classes.cols() != p.classes.cols()) {
      throw ShapeError("sample " + s.id + " grid does not match the network grid");
    }
    ImageOutcome o;
    o.id = s.id;
    o.truth = s.true_count();
    o.gated = p.total;
    o.lcn_only = plain_sum(p.lcn);
    o.hcn_only = plain_sum(p.hcn);
    o.ideal = fuse_counts(p.lcn, p.hcn, truth_classes);
    o.cells = truth_classes.size();
    for (std::size_t i = 0; i < o.cells; ++i) o.correct_cells += truth_classes.values()[i] == p.classes.values()[i];
    out.push_back(std::move(o));
  }
  return out;
}

std::string EvalReport::to_record() const {
  return "mode=" + std::string(to_string(mode)) + " n=" + std::to_string(pairs.size()) + " mae=" + fmt(mae) +
         " mse=" + fmt(mse) + " dan_accuracy=" + fmt(dan_accuracy);
}

EvalReport metrics_from_pairs(std::vector<std::pair<double, double>> pairs) {
  if (pairs.empty()) throw ValidationError("cannot compute metrics over an empty set");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (const auto& [truth, pred] : pairs) {
    const double e = truth - pred;
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(pairs.size());
  EvalReport r;
  r.mae = abs_sum / n;
  r.mse = std::sqrt(sq_sum / n);
  r.pairs = std::move(pairs);
  return r;
}

EvalReport summarize(std::span<const ImageOutcome> outcomes, GateMode mode) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(outcomes.size());
  std::size_t correct = 0;
  std::size_t cells = 0;
  for (const auto& o : outcomes) {
    pairs.emplace_back(o.truth, o.count(mode));
    correct += o.correct_cells;
    cells += o.cells;
  }
  EvalReport r = metrics_from_pairs(std::move(pairs));
  r.mode = mode;
  r.correct_cells = correct;
  r.cells = cells;
  r.dan_accuracy = cells ? static_cast<double>(correct) / static_cast<double>(cells) : 0.0;
  return r;
}

EvalReport evaluate(std::span<const Sample> data, const NetworkTriple<float>& nets, double th) {
  return ablate(data, nets, th, GateMode::gated);
}

EvalReport ablate(std::span<const Sample> data, const NetworkTriple<float>& nets, double th, GateMode mode) {
  const auto outcomes = run_outcomes(data, nets, th);
  return summarize(outcomes, mode);
}

std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::uint64_t seed) {
  if (n < 5) throw ValidationError("5-fold cross-validation needs at least 5 images, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, kFoldStream));
  rng.shuffle(order.begin(), order.end());
  std::vector<std::vector<std::size_t>> folds(5);
  std::size_t at = 0;
  for (std::size_t f = 0; f < 5; ++f) {
    const std::size_t size = n / 5 + (f < n % 5 ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                    order.begin() + static_cast<std::ptrdiff_t>(at + size));
    at += size;
  }
  return folds;
}

CrossValidationReport crossvalidate_5fold(std::span<const Sample> data, const TrainConfig& config,
                                          std::uint64_t seed, const LogSink& log) {
  const auto folds = fold_partition(data.size(), seed);
  CrossValidationReport report;
  std::vector<ImageOutcome> pooled;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> held(data.size(), false);
    for (std::size_t i : folds[f]) held[i] = true;
    std::vector<Sample> train_set;
    std::vector<Sample> test_set;
    for (std::size_t i = 0; i < data.size(); ++i) (held[i] ? test_set : train_set).push_back(data[i]);
    if (log) log("stage=cv fold=" + std::to_string(f + 1) + " train=" + std::to_string(train_set.size()) +
                 " test=" + std::to_string(test_set.size()));
    const TrainedModel model = train_staged(train_set, config, log);
    const auto outcomes = run_outcomes(test_set, model.nets, model.th);
    EvalReport r = summarize(outcomes, GateMode::gated);
    if (log) log("stage=cv fold=" + std::to_string(f + 1) + " " + r.to_record());
    report.folds.push_back(std::move(r));
    pooled.insert(pooled.end(), outcomes.begin(), outcomes.end());
  }
  report.aggregate = summarize(pooled, GateMode::gated);
  return report;
}

std::string_view to_string(TransferStrategy strategy) {
  switch (strategy) {
    case TransferStrategy::wo_finetune: return "wo_finetune";
    case TransferStrategy::step_on_target: return "step_on_target";
    case TransferStrategy::finetune_on_target: return "finetune_on_target";
  }
  return "unknown";
}

TransferStrategy parse_transfer_strategy(std::string_view text) {
  if (text == "wo" || text == "wo_finetune") return TransferStrategy::wo_finetune;
  if (text == "step" || text == "step_on_target") return TransferStrategy::step_on_target;
  if (text == "finetune" || text == "finetune_on_target") return TransferStrategy::finetune_on_target;
  throw ValidationError("unknown transfer strategy '" + std::string(text) + "' (expected wo, step or finetune)");
}

TransferModel transfer_model(const BasicArchitecture<float>* source, std::span<const Sample> target_train,
                             TransferStrategy strategy, const TrainConfig& config, const LogSink& log) {
  if (strategy != TransferStrategy::step_on_target && source == nullptr) {
    throw ValidationError("transfer strategy " + std::string(to_string(strategy)) + " needs a source checkpoint");
  }
  switch (strategy) {
    case TransferStrategy::wo_finetune: {
      const double th = resolve_threshold(config, target_train);
      return {{DensityAdaptionNetwork<float>(source->clone(), dan_head_seed(config.seed)),
               CounterNetwork<float>(source->clone(), NetworkKind::lcn),
               CounterNetwork<float>(source->clone(), NetworkKind::hcn)},
              th};
    }
    case TransferStrategy::step_on_target: {
      TrainedModel m = train_staged(target_train, config, log);
      return {std::move(m.nets), m.th};
    }
    case TransferStrategy::finetune_on_target: {
      const double th = resolve_threshold(config, target_train);
      FinetuneResult r = finetune_heads(*source, target_train, config, th, log);
      return {std::move(r.nets), th};
    }
  }
  throw ValidationError("unknown transfer strategy");
}

EvalReport transfer(const BasicArchitecture<float>* source, std::span<const Sample> target_train,
                    std::span<const Sample> target_test, TransferStrategy strategy, const TrainConfig& config,
                    const LogSink& log) {
  if (target_test.empty()) throw ValidationError("transfer target has no test images");
  const TransferModel m = transfer_model(source, target_train, strategy, config, log);
  return evaluate(target_test, m.nets, m.th);
}

}  // namespace dacc
