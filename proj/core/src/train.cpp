#include "dacc/train.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

#include "dacc/adam.hpp"
#include "dacc/errors.hpp"
#include "dacc/loss.hpp"
#include "dacc/random.hpp"

namespace dacc {

namespace {

constexpr std::uint64_t kPretrainStream = 0x70726574;  // "pret"
constexpr std::uint64_t kDanStream = 0x64616e;
constexpr std::uint64_t kLcnStream = 0x6c636e;
constexpr std::uint64_t kHcnStream = 0x68636e;

Tensor4<float> field_to_tensor(std::span<const double> values, std::size_t rows, std::size_t cols) {
  Tensor4<float> t({1, 1, rows, cols});
  for (std::size_t i = 0; i < values.size(); ++i) t[i] = static_cast<float>(values[i]);
  return t;
}

struct StepLoss {
  double total = 0.0;
  double specific = 0.0;
};

/// Shared epoch/batch loop. `step` runs forward, backward and the optimiser
/// update for one batch.
template <typename Step>
void run_epochs(std::span<const Sample> data, const TrainConfig& config, std::size_t epochs, std::uint64_t stream,
                double th, std::string_view stage, const LogSink& log, FinetuneHistory& history, Step&& step) {
  Rng rng(derive_seed(config.seed, stream));
  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    std::vector<bool> flips(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) flips[i] = rng.bernoulli(config.flip_probability);

    double epoch_total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const Sample*> members;
      std::vector<bool> member_flips;
      for (std::size_t i = start; i < end; ++i) {
        members.push_back(&data[order[i]]);
        member_flips.push_back(flips[i]);
      }
      std::unique_ptr<bool[]> flag(new bool[members.size()]);
      for (std::size_t i = 0; i < members.size(); ++i) flag[i] = member_flips[i];
      const Batch batch = make_batch(members, std::span<const bool>(flag.get(), members.size()), th);
      const StepLoss loss = step(batch);
      history.step_loss.push_back(loss.total);
      history.specific_loss.push_back(loss.specific);
      epoch_total += loss.total;
      ++steps;
    }
    const double mean = steps ? epoch_total / static_cast<double>(steps) : 0.0;
    history.epoch_loss.push_back(mean);
    if (log) {
      log("stage=" + std::string(stage) + " epoch=" + std::to_string(epoch + 1) + " loss=" + format_real(mean));
    }
  }
}

void check_data(std::span<const Sample> data, const TrainConfig& config) {
  if (data.empty()) throw ValidationError("training set is empty");
  const std::size_t s = config.arch.input_size;
  for (const auto& sample : data) {
    check_image_shape(sample.image.shape(), config.arch);
    if (sample.density.rows() != s || sample.counts.rows() != config.arch.grid.rows ||
        sample.counts.cols() != config.arch.grid.cols) {
      throw ValidationError("sample " + sample.id + " ground truth does not match the configured input size / grid");
    }
  }
}

template <typename Net>
void check_same_arch(const Net& base, const TrainConfig& config) {
  if (architecture_fingerprint(base.config()) != architecture_fingerprint(config.arch)) {
    throw ValidationError("base network was built for a different input size / grid than the configuration");
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Batch make_batch(std::span<const Sample* const> samples, std::span<const bool> flip, double th) {
  if (samples.empty() || samples.size() != flip.size()) throw ValidationError("malformed batch");
  std::vector<Tensor4<float>> images, density, counts, classes;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = *samples[i];
    const ClassMap cls = class_map(s.counts, th);
    Tensor4<float> img = s.image;
    Tensor4<float> den = field_to_tensor(s.density.values(), s.density.rows(), s.density.cols());
    Tensor4<float> cnt = field_to_tensor(s.counts.values(), s.counts.rows(), s.counts.cols());
    Tensor4<float> c({1, 1, cls.rows(), cls.cols()});
    for (std::size_t k = 0; k < cls.size(); ++k) c[k] = static_cast<float>(cls.values()[k]);
    if (flip[i]) {
      img = flip_horizontal(img);
      den = flip_horizontal(den);
      cnt = flip_horizontal(cnt);
      c = flip_horizontal(c);
    }
    images.push_back(std::move(img));
    density.push_back(std::move(den));
    counts.push_back(std::move(cnt));
    classes.push_back(std::move(c));
  }
  return {stack_batch<float>(images), stack_batch<float>(density), stack_batch<float>(counts),
          stack_batch<float>(classes)};
}

PretrainResult pretrain_base(std::span<const Sample> data, const TrainConfig& config, const LogSink& log) {
  config.validate();
  return pretrain_base(BasicArchitecture<float>(config.arch, config.seed), data, config, log);
}

PretrainResult pretrain_base(BasicArchitecture<float> init, std::span<const Sample> data, const TrainConfig& config,
                             const LogSink& log) {
  config.validate();
  check_data(data, config);
  check_same_arch(init, config);
  PretrainResult result{std::move(init), {}, {}};
  Adam<float> adam(result.base.params().variables(), {config.learning_rate});
  FinetuneHistory history;
  // th is irrelevant for the density loss
  run_epochs(data, config, config.pretrain_epochs, kPretrainStream, 0.0, "pretrain", log, history,
             [&](const Batch& batch) {
               auto out = result.base.forward(Variable<float>::constant(batch.images));
               Variable<float> loss = density_loss(out.density, batch.density);
               backward(loss);
               adam.step();
               return StepLoss{loss.value()[0], 0.0};
             });
  result.step_loss = std::move(history.step_loss);
  result.epoch_loss = std::move(history.epoch_loss);
  return result;
}

FinetuneResult finetune_heads(const BasicArchitecture<float>& base, std::span<const Sample> data,
                              const TrainConfig& config, double th, const LogSink& log) {
  config.validate();
  check_data(data, config);
  check_same_arch(base, config);
  if (!std::isfinite(th) || th < 0.0) throw ValidationError("fine-tuning needs a finite non-negative threshold");

  FinetuneResult result{{DensityAdaptionNetwork<float>(base.clone(), dan_head_seed(config.seed)),
                         CounterNetwork<float>(base.clone(), NetworkKind::lcn),
                         CounterNetwork<float>(base.clone(), NetworkKind::hcn)},
                        th, {}, {}, {}};
  const AdamOptions opts{config.finetune_lr()};

  {
    auto& dan = result.nets.dan;
    Adam<float> adam(dan.params().variables(), opts);
    run_epochs(data, config, config.finetune_epochs, kDanStream, th, "finetune_dan", log, result.dan,
               [&](const Batch& batch) {
                 auto out = dan.forward(Variable<float>::constant(batch.images));
                 LossParts<float> parts{density_loss(out.density, batch.density), class_loss(out.probs, batch.classes)};
                 Variable<float> loss = composite_loss(NetworkKind::dan, parts, config.lambda);
                 backward(loss);
                 adam.step();
                 return StepLoss{loss.value()[0], parts.specific.value()[0]};
               });
  }

  auto train_counter = [&](CounterNetwork<float>& net, std::uint64_t stream, DensityDomain domain,
                           FinetuneHistory& history) {
    Adam<float> adam(net.params().variables(), opts);
    const std::string stage = "finetune_" + std::string(to_string(net.kind()));
    run_epochs(data, config, config.finetune_epochs, stream, th, stage, log, history, [&](const Batch& batch) {
      auto out = net.forward(Variable<float>::constant(batch.images));
      const Tensor4<float>* mask = config.masked_count_loss ? &batch.classes : nullptr;
      LossParts<float> parts{density_loss(out.density, batch.density), count_loss(out.counts, batch.counts, mask, domain)};
      Variable<float> loss = composite_loss(net.kind(), parts, config.lambda);
      backward(loss);
      adam.step();
      return StepLoss{loss.value()[0], parts.specific.value()[0]};
    });
  };
  train_counter(result.nets.lcn, kLcnStream, DensityDomain::low, result.lcn);
  train_counter(result.nets.hcn, kHcnStream, DensityDomain::high, result.hcn);
  return result;
}

double resolve_threshold(const TrainConfig& config, std::span<const Sample> data) {
  const auto maps = collect_count_maps(data);
  return resolve_threshold(config.th, maps);
}

TrainedModel train_staged(std::span<const Sample> data, const TrainConfig& config, const LogSink& log) {
  const double th = resolve_threshold(config, data);
  if (log) log("stage=threshold th=" + format_real(th));
  PretrainResult pre = pretrain_base(data, config, log);
  FinetuneResult fine = finetune_heads(pre.base, data, config, th, log);
  return {std::move(pre.base), std::move(fine.nets), th};
}

}  // namespace dacc
