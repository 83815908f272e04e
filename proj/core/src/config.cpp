#include "dacc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dacc/errors.hpp"

namespace dacc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view v, const std::string& where) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ValidationError(where + ": expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t to_uint(std::string_view v, const std::string& where) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError(where + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

GridSpec parse_grid(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) throw ValidationError("grid must look like HxW, got '" + std::string(text) + "'");
  const auto rows = to_uint(text.substr(0, x), "grid");
  const auto cols = to_uint(text.substr(x + 1), "grid");
  if (rows == 0 || cols == 0) throw ValidationError("grid extents must be positive");
  return {rows, cols};
}

void TrainConfig::validate() const {
  arch.head_kernel();
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (finetune_learning_rate && !(*finetune_learning_rate > 0.0)) {
    throw ValidationError("finetune_learning_rate must be positive");
  }
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (th && !(*th >= 0.0)) throw ValidationError("th must be non-negative");
  lambda.validate();
  if (!(sigma_mode.sigma > 0.0)) throw ValidationError("sigma must be positive");
  if (sigma_mode.kind == SigmaMode::Kind::geometry_adaptive && (sigma_mode.k == 0 || !(sigma_mode.beta > 0.0))) {
    throw ValidationError("adaptive_k and adaptive_beta must be positive");
  }
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) throw ValidationError("flip_probability must lie in [0, 1]");
}

TrainConfig parse_config(std::string_view text) {
  TrainConfig cfg;
  using Setter = std::function<void(std::string_view, const std::string&)>;
  const std::map<std::string, Setter, std::less<>> setters{
      {"input_size", [&](auto v, auto& w) { cfg.arch.input_size = to_uint(v, w); }},
      {"grid", [&](auto v, auto&) { cfg.arch.grid = parse_grid(v); }},
      {"th",
       [&](auto v, auto& w) {
         if (v == "auto") cfg.th.reset();
         else cfg.th = to_double(v, w);
       }},
      {"lambda_dan", [&](auto v, auto& w) { cfg.lambda.dan = to_double(v, w); }},
      {"lambda_lcn", [&](auto v, auto& w) { cfg.lambda.lcn = to_double(v, w); }},
      {"lambda_hcn", [&](auto v, auto& w) { cfg.lambda.hcn = to_double(v, w); }},
      {"learning_rate", [&](auto v, auto& w) { cfg.learning_rate = to_double(v, w); }},
      {"finetune_learning_rate",
       [&](auto v, auto& w) {
         if (v == "auto") cfg.finetune_learning_rate.reset();
         else cfg.finetune_learning_rate = to_double(v, w);
       }},
      {"batch_size", [&](auto v, auto& w) { cfg.batch_size = to_uint(v, w); }},
      {"pretrain_epochs", [&](auto v, auto& w) { cfg.pretrain_epochs = to_uint(v, w); }},
      {"finetune_epochs", [&](auto v, auto& w) { cfg.finetune_epochs = to_uint(v, w); }},
      {"seed", [&](auto v, auto& w) { cfg.seed = to_uint(v, w); }},
      {"sigma_mode",
       [&](auto v, auto& w) {
         if (v == "fixed") cfg.sigma_mode.kind = SigmaMode::Kind::fixed;
         else if (v == "adaptive") cfg.sigma_mode.kind = SigmaMode::Kind::geometry_adaptive;
         else throw ValidationError(w + ": sigma_mode must be fixed or adaptive");
       }},
      {"sigma", [&](auto v, auto& w) { cfg.sigma_mode.sigma = to_double(v, w); }},
      {"adaptive_k", [&](auto v, auto& w) { cfg.sigma_mode.k = to_uint(v, w); }},
      {"adaptive_beta", [&](auto v, auto& w) { cfg.sigma_mode.beta = to_double(v, w); }},
      {"flip_probability", [&](auto v, auto& w) { cfg.flip_probability = to_double(v, w); }},
      {"count_loss",
       [&](auto v, auto& w) {
         if (v == "masked") cfg.masked_count_loss = true;
         else if (v == "full") cfg.masked_count_loss = false;
         else throw ValidationError(w + ": count_loss must be masked or full");
       }},
      {"conv_algorithm",
       [&](auto v, auto& w) {
         if (v == "im2col") cfg.arch.algorithm = ConvAlgorithm::im2col;
         else if (v == "direct") cfg.arch.algorithm = ConvAlgorithm::direct;
         else throw ValidationError(w + ": conv_algorithm must be im2col or direct");
       }},
  };

  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError(where + ": unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) throw ValidationError(where + ": duplicate key '" + std::string(key) + "'");
    if (value.empty()) throw ValidationError(where + ": empty value for '" + std::string(key) + "'");
    it->second(value, where);
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string format_config(const TrainConfig& c) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  line("input_size", std::to_string(c.arch.input_size));
  line("grid", std::to_string(c.arch.grid.rows) + "x" + std::to_string(c.arch.grid.cols));
  line("th", c.th ? fmt(*c.th) : "auto");
  line("lambda_dan", fmt(c.lambda.dan));
  line("lambda_lcn", fmt(c.lambda.lcn));
  line("lambda_hcn", fmt(c.lambda.hcn));
  line("learning_rate", fmt(c.learning_rate));
  line("finetune_learning_rate", c.finetune_learning_rate ? fmt(*c.finetune_learning_rate) : "auto");
  line("batch_size", std::to_string(c.batch_size));
  line("pretrain_epochs", std::to_string(c.pretrain_epochs));
  line("finetune_epochs", std::to_string(c.finetune_epochs));
  line("seed", std::to_string(c.seed));
  line("sigma_mode", c.sigma_mode.kind == SigmaMode::Kind::fixed ? "fixed" : "adaptive");
  line("sigma", fmt(c.sigma_mode.sigma));
  line("adaptive_k", std::to_string(c.sigma_mode.k));
  line("adaptive_beta", fmt(c.sigma_mode.beta));
  line("flip_probability", fmt(c.flip_probability));
  line("count_loss", c.masked_count_loss ? "masked" : "full");
  line("conv_algorithm", c.arch.algorithm == ConvAlgorithm::im2col ? "im2col" : "direct");
  return out;
}

}  // namespace dacc
