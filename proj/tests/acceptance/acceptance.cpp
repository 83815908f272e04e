// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria are selected by name on the command line
// (gradient architecture oracle groundtruth metric end_to_end determinism);
// with no arguments every criterion runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dacc/evaluate.hpp"
#include "dacc/loss.hpp"
#include "dacc/network.hpp"
#include "dacc/synth.hpp"
#include "dacc/train.hpp"
#include "oracles.hpp"

using namespace dacc;
using dacc::testing::block_sums;
using dacc::testing::finite_difference_check;
using dacc::testing::random_tensor;
using dacc::testing::scalar_class;
using dacc::testing::select_and_sum;
using dacc::testing::sorted_positive_median;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradientRelTol = 1e-4;
constexpr double kGradientSeconds = 120.0;
constexpr double kBlockSumRelTol = 1e-5;
constexpr double kFusionRelTol = 1e-12;
constexpr double kSingleHeadMassTol = 1e-3;
constexpr double kConservationRelTol = 1e-6;
constexpr double kMetricTol = 1e-12;
constexpr double kDanAccuracyMin = 0.90;
constexpr double kIdealSlack = 1.05;
constexpr double kEndToEndSeconds = 30.0 * 60.0;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Variable<double> param(Tensor4<double> t) { return Variable<double>::parameter(std::move(t)); }

// ---------------------------------------------------------------- gradient

Verdict gradient_suite() {
  Verdict v;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  auto track = [&](const std::string& name, double rel) {
    if (rel > worst) {
      worst = rel;
      worst_name = name;
    }
    v.require(rel < kGradientRelTol, name + fmt(" rel=%.3g", rel));
  };

  Rng rng(101);
  // every convolution of the layer table at full channel width; heads use a
  // 4x4 stride-4 kernel on an 8x8 input
  struct Spec {
    const char* name;
    std::size_t in, out, k, stride, dilation, padding;
  };
  const Spec specs[] = {
      {"conv1_1", 3, 24, 3, 1, 1, 1},   {"conv1_2", 24, 24, 3, 1, 1, 1}, {"conv1_3", 24, 24, 3, 1, 1, 1},
      {"conv2", 24, 48, 3, 1, 2, 2},    {"conv3", 48, 24, 3, 1, 4, 4},   {"conv4", 24, 12, 3, 1, 2, 2},
      {"conv5", 12, 12, 3, 1, 1, 1},    {"density", 12, 1, 1, 1, 1, 0},  {"local_sum", 1, 1, 4, 4, 1, 0},
      {"classify", 12, 12, 4, 4, 1, 0}, {"classify_fc", 12, 2, 1, 1, 1, 0}};
  for (const auto& s : specs) {
    for (auto algo : {ConvAlgorithm::direct, ConvAlgorithm::im2col}) {
      const std::size_t side = 8;
      auto x = param(random_tensor({2, s.in, side, side}, rng));
      auto w = param(random_tensor({s.out, s.in, s.k, s.k}, rng));
      auto b = param(random_tensor({s.out, 1, 1, 1}, rng));
      const ConvGeometry g{s.stride, s.dilation, s.padding, algo};
      const std::size_t o = *conv_output_extent(side, s.k, g);
      const auto target = Variable<double>::constant(random_tensor({2, s.out, o, o}, rng));
      auto loss = [&] {
        auto d = add(conv2d(x, w, b, g), scale(target, -1.0));
        return sum(add(relu(d), scale(relu(scale(d, -1.0)), 2.0)));
      };
      track(std::string(s.name) + (algo == ConvAlgorithm::direct ? "/direct" : "/im2col"),
            finite_difference_check(loss, {x, w, b}, 1e-5, 128).max_rel);
    }
  }

  {
    auto x = param(random_tensor({2, 3, 4, 4}, rng));
    track("relu", finite_difference_check([&] { return sum(scale(relu(x), 1.3)); }, {x}).max_rel);
  }
  {
    auto x = param(random_tensor({2, 2, 3, 3}, rng, -3, 3));
    const auto mix = Variable<double>::constant(random_tensor({1, 2, 1, 1}, rng));
    const auto zero = Variable<double>::constant(Tensor4<double>({1, 1, 1, 1}));
    const ConvGeometry g{1, 1, 0, ConvAlgorithm::direct};
    track("softmax", finite_difference_check([&] { return sum(relu(conv2d(softmax_channels(x), mix, zero, g))); }, {x})
                         .max_rel);
  }

  auto dp = param(random_tensor({2, 1, 6, 6}, rng));
  const auto dt = random_tensor({2, 1, 6, 6}, rng);
  track("density_loss", finite_difference_check([&] { return density_loss(dp, dt); }, {dp}).max_rel);

  auto cp = param(random_tensor({2, 1, 3, 3}, rng, 0, 5));
  const auto ct = random_tensor({2, 1, 3, 3}, rng, 0, 5);
  Tensor4<double> mask({2, 1, 3, 3});
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.bernoulli(0.5);
  track("count_loss", finite_difference_check([&] { return count_loss(cp, ct); }, {cp}).max_rel);
  track("count_loss/low", finite_difference_check([&] { return count_loss(cp, ct, &mask, DensityDomain::low); }, {cp})
                              .max_rel);
  track("count_loss/high",
        finite_difference_check([&] { return count_loss(cp, ct, &mask, DensityDomain::high); }, {cp}).max_rel);

  auto logits = param(random_tensor({2, 2, 3, 3}, rng, -3, 3));
  Tensor4<double> labels({2, 1, 3, 3});
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = rng.bernoulli(0.5);
  track("class_loss",
        finite_difference_check([&] { return class_loss(softmax_channels(logits), labels); }, {logits}).max_rel);

  // composites through whole networks, differentiated w.r.t. every parameter
  ArchitectureConfig arch;
  arch.input_size = 16;
  arch.grid = {2, 2};
  const auto nets = build_networks<double>(arch, 5);
  const auto image = Variable<double>::constant(random_tensor({1, 3, 16, 16}, rng, 0, 1));
  const auto den_t = random_tensor({1, 1, 16, 16}, rng, 0, 0.1);
  const auto cnt_t = random_tensor({1, 1, 2, 2}, rng, 0, 3);
  Tensor4<double> cls_t({1, 1, 2, 2}, std::vector<double>{0, 1, 1, 0});
  const LossWeights lw{0.7, 1.3, 0.9};
  auto vars_of = [](const ParamSet<double>& ps) {
    std::vector<Variable<double>> out;
    for (const auto& e : ps.entries()) out.push_back(e.var);
    return out;
  };
  track("composite/dan", finite_difference_check(
                             [&] {
                               const auto o = nets.dan.forward(image);
                               return composite_loss(NetworkKind::dan,
                                                     LossParts<double>{density_loss(o.density, den_t),
                                                                       class_loss(o.probs, cls_t)},
                                                     lw);
                             },
                             vars_of(nets.dan.params()), 1e-5, 48)
                             .max_rel);
  for (const auto* net : {&nets.lcn, &nets.hcn}) {
    const auto dom = net->kind() == NetworkKind::lcn ? DensityDomain::low : DensityDomain::high;
    track(std::string("composite/") + std::string(to_string(net->kind())),
          finite_difference_check(
              [&] {
                const auto o = net->forward(image);
                return composite_loss(net->kind(),
                                      LossParts<double>{density_loss(o.density, den_t),
                                                        count_loss(o.counts, cnt_t, &cls_t, dom)},
                                      lw);
              },
              vars_of(net->params()), 1e-5, 48)
              .max_rel);
  }
  track("composite/base", finite_difference_check(
                              [&] {
                                const auto o = nets.lcn.base().forward(image);
                                return composite_loss(NetworkKind::base,
                                                      LossParts<double>{density_loss(o.density, den_t), {}}, lw);
                              },
                              vars_of(nets.lcn.base().params()), 1e-5, 48)
                              .max_rel);

  const double secs = seconds_since(t0);
  v.require(secs < kGradientSeconds, fmt("runtime %.1fs", secs));
  if (v.pass) v.detail = "worst " + worst_name + fmt(" rel=%.3g", worst) + fmt(" in %.1fs", secs);
  return v;
}

// ------------------------------------------------------------ architecture

Verdict architecture_suite() {
  Verdict v;
  const auto nets = build_networks<float>(ArchitectureConfig{}, 1);
  auto count = [&](const char* name, std::size_t got, std::size_t want) {
    v.require(got == want, std::string(name) + " params " + std::to_string(got) + " != " + std::to_string(want));
  };
  count("base+density", nets.lcn.base().params().parameter_count(), 35821);
  count("lcn", nets.lcn.params().parameter_count(), 39918);
  count("hcn", nets.hcn.params().parameter_count(), 39918);
  count("dan", nets.dan.params().parameter_count(), 625683);

  auto shape = [&](const std::string& name, const Shape4& got, const Shape4& want) {
    if (!(got == want)) {
      std::ostringstream os;
      os << name << " shape (" << got.n << "," << got.c << "," << got.h << "," << got.w << ")";
      v.require(false, os.str());
    }
  };
  const Shape4 conv_shapes[] = {{24, 3, 3, 3},  {24, 24, 3, 3}, {24, 24, 3, 3}, {48, 24, 3, 3},
                                {24, 48, 3, 3}, {12, 24, 3, 3}, {12, 12, 3, 3}};
  const std::size_t dilations[] = {1, 1, 1, 2, 4, 2, 1};
  const auto& base = nets.lcn.base();
  for (std::size_t i = 0; i < 7; ++i) {
    const auto& l = base.convs()[i];
    shape("conv" + std::to_string(i), l.weight.shape(), conv_shapes[i]);
    shape("conv" + std::to_string(i) + ".bias", l.bias.shape(), {conv_shapes[i].n, 1, 1, 1});
    v.require(l.geometry.dilation == dilations[i] && l.geometry.padding == dilations[i] && l.geometry.stride == 1,
              "conv" + std::to_string(i) + " geometry");
  }
  shape("density", base.density_head().weight.shape(), {1, 12, 1, 1});
  shape("local_sum", nets.lcn.local_sum().weight.shape(), {1, 1, 64, 64});
  v.require(nets.lcn.local_sum().geometry.stride == 64, "local_sum stride");
  shape("classify", nets.dan.classify().weight.shape(), {12, 12, 64, 64});
  v.require(nets.dan.classify().geometry.stride == 64, "classify stride");
  shape("classify_fc", nets.dan.classify_fc().weight.shape(), {2, 12, 1, 1});

  Rng rng(2);
  const auto x = Variable<float>::constant(random_tensor<float>({1, 3, 512, 512}, rng, 0, 1));
  NoGradGuard guard;
  const auto d = nets.dan.forward(x);
  shape("dan density", d.density.shape(), {1, 1, 512, 512});
  shape("dan logits", d.logits.shape(), {1, 2, 8, 8});
  const auto l = nets.lcn.forward(x);
  shape("lcn density", l.density.shape(), {1, 1, 512, 512});
  shape("lcn counts", l.counts.shape(), {1, 1, 8, 8});
  shape("hcn counts", nets.hcn.forward(x).counts.shape(), {1, 1, 8, 8});
  if (v.pass) v.detail = "35821/39918/39918/625683 parameters, 512 shapes";
  return v;
}

// ------------------------------------------------------------------ oracle

Verdict oracle_suite() {
  Verdict v;
  Rng rng(3);

  // fresh local-sum head vs brute-force 64x64 block sums at 512
  const auto nets = build_networks<float>(ArchitectureConfig{}, 9);
  double worst_block = 0.0;
  for (int t = 0; t < 2; ++t) {
    const auto density = random_tensor<float>({1, 1, 512, 512}, rng, 0, 1);
    NoGradGuard guard;
    const auto counts = nets.lcn.local_sum()(Variable<float>::constant(density)).value();
    const std::vector<double> plane(density.values().begin(), density.values().end());
    const auto ref = block_sums(plane, 512, 512, 8, 8);
    for (std::size_t i = 0; i < 64; ++i) {
      worst_block = std::max(worst_block, std::abs(counts[i] - ref[i]) / std::abs(ref[i]));
    }
  }
  v.require(worst_block <= kBlockSumRelTol, fmt("block sum rel=%.3g", worst_block));

  // gated fusion vs select-and-sum
  double worst_fuse = 0.0;
  auto check_fusion = [&](std::size_t rows, std::size_t cols, const std::vector<std::uint8_t>& gate) {
    CountMap lcn(rows, cols), hcn(rows, cols);
    for (auto& c : lcn.values()) c = rng.uniform(0, 10);
    for (auto& c : hcn.values()) c = rng.uniform(0, 100);
    const double got = fuse_counts(lcn, hcn, ClassMap(rows, cols, gate));
    const double want = select_and_sum(lcn.values(), hcn.values(), gate);
    worst_fuse = std::max(worst_fuse, std::abs(got - want) / std::max(1.0, std::abs(want)));
  };
  for (unsigned m = 0; m < 16; ++m) {
    std::vector<std::uint8_t> gate(4);
    for (unsigned b = 0; b < 4; ++b) gate[b] = (m >> b) & 1u;
    check_fusion(2, 2, gate);
  }
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::uint8_t> gate(64);
    for (auto& g : gate) g = rng.bernoulli(0.5);
    check_fusion(8, 8, gate);
  }
  v.require(worst_fuse <= kFusionRelTol, fmt("fusion rel=%.3g", worst_fuse));

  // polarization vs a scalar reference, every tenth pair sitting on th
  std::size_t mismatches = 0, ties = 0;
  for (int t = 0; t < 10000; ++t) {
    const double th = rng.uniform(0, 20);
    const double c = t % 10 == 0 ? th : rng.uniform(0, 40);
    ties += c == th;
    const auto cls = class_map(CountMap(1, 1, std::vector<double>{c}), th);
    mismatches += cls.at(0, 0) != scalar_class(c, th);
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " polarization mismatches");
  v.require(ties >= 1000, "too few ties");
  if (v.pass) v.detail = fmt("block sum rel=%.3g", worst_block) + fmt(", fusion rel=%.3g", worst_fuse);
  return v;
}

// ------------------------------------------------------------- groundtruth

Verdict groundtruth_suite() {
  Verdict v;
  const HeadAnnotations single({512, 512}, {{256.0, 256.0}});
  const double mass = density_map(single, {512, 512}, SigmaMode::fixed(4.0)).sum();
  v.require(std::abs(mass - 1.0) <= kSingleHeadMassTol, fmt("single head mass %.9g", mass));

  SynthOptions so;
  so.size = 512;
  const auto imgs = synth_images(6, so, 31);
  double worst = 0.0;
  for (const auto& img : imgs) {
    for (const auto& mode : {SigmaMode::fixed(4.0), SigmaMode::adaptive(3, 0.3)}) {
      const auto den = density_map(img.heads, {512, 512}, mode);
      const double total = den.sum();
      for (std::size_t g : {4, 8, 16}) {
        const double cells = count_map(den, {g, g}).sum();
        worst = std::max(worst, std::abs(cells - total) / std::max(total, 1e-12));
      }
    }
  }
  v.require(worst <= kConservationRelTol, fmt("conservation rel=%.3g", worst));

  std::vector<CountMap> maps;
  std::vector<double> pooled;
  for (const auto& img : imgs) {
    maps.push_back(count_map(density_map(img.heads, {512, 512}, SigmaMode::fixed(4.0)), {8, 8}));
    pooled.insert(pooled.end(), maps.back().values().begin(), maps.back().values().end());
  }
  const double th = calibrate_threshold(maps);
  const double oracle = sorted_positive_median(pooled);
  v.require(th == oracle, fmt("th %.17g", th) + fmt(" vs oracle %.17g", oracle));

  // odd and even pools of hand-made maps
  Rng rng(4);
  for (std::size_t n : {3, 4, 7}) {
    std::vector<CountMap> hand;
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) {
      CountMap m(2, 3);
      for (auto& c : m.values()) c = rng.bernoulli(0.3) ? 0.0 : std::round(rng.uniform(0, 9) * 4) / 4;
      values.insert(values.end(), m.values().begin(), m.values().end());
      hand.push_back(std::move(m));
    }
    v.require(calibrate_threshold(hand) == sorted_positive_median(values), "hand-made pool median");
  }
  if (v.pass) v.detail = fmt("mass=%.6f", mass) + fmt(", conservation rel=%.3g", worst) + fmt(", th=%.6g", th);
  return v;
}

// ------------------------------------------------------------------ metric

Verdict metric_suite() {
  Verdict v;
  // (truth, prediction)
  const auto r = metrics_from_pairs({{10, 12}, {5, 5}, {0, 3}, {7, 3}});
  const double mae = (2.0 + 0.0 + 3.0 + 4.0) / 4.0;
  const double mse = std::sqrt((4.0 + 0.0 + 9.0 + 16.0) / 4.0);
  v.require(std::abs(r.mae - mae) <= kMetricTol, fmt("fixture mae %.17g", r.mae));
  v.require(std::abs(r.mse - mse) <= kMetricTol, fmt("fixture mse %.17g", r.mse));
  const auto one = metrics_from_pairs({{100, 90.5}});
  v.require(one.mae == 9.5 && one.mse == 9.5, "single pair");
  const auto exact = metrics_from_pairs({{3, 3}, {8, 8}});
  v.require(exact.mae == 0.0 && exact.mse == 0.0, "perfect predictions");

  Rng rng(5);
  std::size_t violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 50));
    std::vector<std::pair<double, double>> pairs;
    double abs_sum = 0, sq_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double truth = rng.uniform(0, 500);
      const double pred = truth + rng.uniform(-100, 100);
      abs_sum += std::abs(pred - truth);
      sq_sum += (pred - truth) * (pred - truth);
      pairs.emplace_back(truth, pred);
    }
    const auto m = metrics_from_pairs(pairs);
    violations += !(m.mae <= m.mse * (1 + 1e-12));
    violations += std::abs(m.mae - abs_sum / static_cast<double>(n)) > 1e-9 * std::max(1.0, m.mae);
    violations += std::abs(m.mse - std::sqrt(sq_sum / static_cast<double>(n))) > 1e-9 * std::max(1.0, m.mse);
  }
  v.require(violations == 0, std::to_string(violations) + " random-vector violations");
  if (v.pass) v.detail = "fixtures exact, 1000 random vectors";
  return v;
}

// -------------------------------------------------------------- end to end

struct EndToEndConfig {
  std::size_t size = 256;
  GridSpec grid{4, 4};
  std::size_t train_images = 60;
  std::size_t test_images = 20;
  std::uint64_t data_seed = 11;
  std::size_t target_train_images = 20;
  std::size_t target_test_images = 20;
  std::uint64_t target_seed = 23;
  double learning_rate = 1e-3;
  double finetune_learning_rate = 2e-4;
  std::size_t batch_size = 4;
  std::size_t pretrain_epochs = 6;
  std::size_t finetune_epochs = 6;
  std::size_t target_finetune_epochs = 25;
  double sigma = 4.0;
  std::uint64_t seed = 7;
};

struct EndToEndResult {
  std::map<GateMode, EvalReport> modes;
  EvalReport wo;
  EvalReport finetune;
  double seconds = 0.0;
  std::string report;  ///< every record, newline-separated
};

EndToEndResult run_end_to_end(const EndToEndConfig& e) {
  const auto t0 = Clock::now();
  TrainConfig cfg;
  cfg.arch.input_size = e.size;
  cfg.arch.grid = e.grid;
  cfg.learning_rate = e.learning_rate;
  cfg.finetune_learning_rate = e.finetune_learning_rate;
  cfg.batch_size = e.batch_size;
  cfg.pretrain_epochs = e.pretrain_epochs;
  cfg.finetune_epochs = e.finetune_epochs;
  cfg.sigma_mode = SigmaMode::fixed(e.sigma);
  cfg.seed = e.seed;

  auto make = [&](std::size_t n, std::uint64_t seed, bool shifted) {
    SynthOptions so;
    so.size = e.size;
    so.shifted = shifted;
    std::vector<Sample> out;
    const auto imgs = synth_images(n, so, seed);
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      out.push_back(make_sample("img_" + std::to_string(i), to_tensor(imgs[i].image), imgs[i].heads, cfg));
    }
    return out;
  };
  const auto all = make(e.train_images + e.test_images, e.data_seed, false);
  const std::span<const Sample> train(all.data(), e.train_images);
  const std::span<const Sample> test(all.data() + e.train_images, e.test_images);

  EndToEndResult r;
  LogSink log = [&](std::string_view s) {
    std::cout << "  [" << fmt("%.0f", seconds_since(t0)) << "s] " << s << '\n' << std::flush;
    r.report += std::string(s) + '\n';
  };
  const auto model = train_staged(train, cfg, log);
  const auto outcomes = run_outcomes(test, model.nets, model.th);
  for (auto mode : kGateModes) {
    r.modes[mode] = summarize(outcomes, mode);
    r.report += r.modes[mode].to_record() + '\n';
  }

  const auto target = make(e.target_train_images + e.target_test_images, e.target_seed, true);
  const std::span<const Sample> ttrain(target.data(), e.target_train_images);
  const std::span<const Sample> ttest(target.data() + e.target_train_images, e.target_test_images);
  TrainConfig tcfg = cfg;
  tcfg.finetune_epochs = e.target_finetune_epochs;
  r.wo = transfer(&model.base, ttrain, ttest, TransferStrategy::wo_finetune, tcfg, log);
  r.finetune = transfer(&model.base, ttrain, ttest, TransferStrategy::finetune_on_target, tcfg, log);
  r.report += "transfer=wo " + r.wo.to_record() + '\n';
  r.report += "transfer=finetune " + r.finetune.to_record() + '\n';
  r.seconds = seconds_since(t0);
  return r;
}

Verdict end_to_end_verdict(const EndToEndResult& r) {
  Verdict v;
  const double acc = r.modes.at(GateMode::gated).dan_accuracy;
  const double gated = r.modes.at(GateMode::gated).mae;
  const double lcn = r.modes.at(GateMode::lcn_only).mae;
  const double hcn = r.modes.at(GateMode::hcn_only).mae;
  const double ideal = r.modes.at(GateMode::ideal).mae;
  v.require(acc >= kDanAccuracyMin, fmt("(a) dan_accuracy %.4f", acc));
  v.require(gated < lcn && gated < hcn, fmt("(b) gated %.3f", gated) + fmt(" lcn %.3f", lcn) + fmt(" hcn %.3f", hcn));
  v.require(ideal <= gated * kIdealSlack, fmt("(c) ideal %.3f", ideal) + fmt(" gated %.3f", gated));
  v.require(r.finetune.mae <= r.wo.mae, fmt("(d) finetune %.3f", r.finetune.mae) + fmt(" wo %.3f", r.wo.mae));
  v.require(r.seconds < kEndToEndSeconds, fmt("runtime %.0fs", r.seconds));
  const std::string summary = fmt("acc=%.3f", acc) + fmt(" gated=%.2f", gated) + fmt(" lcn=%.2f", lcn) +
                              fmt(" hcn=%.2f", hcn) + fmt(" ideal=%.2f", ideal) + fmt(" ft=%.2f", r.finetune.mae) +
                              fmt(" wo=%.2f", r.wo.mae) + fmt(" in %.0fs", r.seconds);
  v.detail = v.pass ? summary : v.detail + " [" + summary + "]";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> all = {"gradient", "architecture", "oracle", "groundtruth",
                                        "metric",   "end_to_end",   "determinism"};
  std::set<std::string> wanted(argv + 1, argv + argc);
  if (wanted.empty()) wanted.insert(all.begin(), all.end());
  for (const auto& w : wanted) {
    if (std::find(all.begin(), all.end(), w) == all.end()) {
      std::cerr << "unknown criterion: " << w << '\n';
      return 2;
    }
  }

  const std::map<std::string, std::function<Verdict()>> suites = {
      {"gradient", gradient_suite},       {"architecture", architecture_suite}, {"oracle", oracle_suite},
      {"groundtruth", groundtruth_suite}, {"metric", metric_suite}};

  bool ok = true;
  auto report = [&](const std::string& name, const Verdict& v) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << " (" << v.detail << ")\n" << std::flush;
    ok = ok && v.pass;
  };
  auto guarded = [&](const std::string& name, const std::function<Verdict()>& fn) {
    try {
      report(name, fn());
    } catch (const std::exception& e) {
      report(name, Verdict{false, std::string("exception: ") + e.what()});
    }
  };

  for (const auto& name : all) {
    if (wanted.count(name) && suites.count(name)) guarded(name, suites.at(name));
  }

  if (wanted.count("end_to_end") || wanted.count("determinism")) {
    const EndToEndConfig e;
    EndToEndResult first;
    bool have_first = false;
    guarded("end_to_end", [&] {
      first = run_end_to_end(e);
      have_first = true;
      return end_to_end_verdict(first);
    });
    if (wanted.count("determinism")) {
      guarded("determinism", [&] {
        if (!have_first) return Verdict{false, "first run did not complete"};
        const auto second = run_end_to_end(e);
        Verdict v;
        v.require(first.report == second.report, "reports differ");
        if (v.pass) v.detail = std::to_string(first.report.size()) + " report bytes identical";
        return v;
      });
    }
  }
  return ok ? 0 : 1;
}
