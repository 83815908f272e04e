#include "dacc/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "dacc/errors.hpp"
#include "dacc/image_io.hpp"

namespace dacc {

namespace {

constexpr char kMagic[8] = {'D', 'A', 'C', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) {
      throw ValidationError("checkpoint truncated at byte " + std::to_string(pos_) + ": need " + std::to_string(n) +
                            " more bytes, have " + std::to_string(in_.size() - pos_));
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(ckpt.version);
  w.u64(ckpt.fingerprint);
  w.u32(static_cast<std::uint32_t>(ckpt.kind));
  w.u32(static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    if (e.values.size() != e.shape.size()) throw ShapeError("checkpoint entry " + e.name + " has inconsistent size");
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name.data(), e.name.size());
    w.u32(static_cast<std::uint32_t>(e.role));
    w.u32(static_cast<std::uint32_t>(e.shape.n));
    w.u32(static_cast<std::uint32_t>(e.shape.c));
    w.u32(static_cast<std::uint32_t>(e.shape.h));
    w.u32(static_cast<std::uint32_t>(e.shape.w));
    for (float v : e.values) w.f32(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw ValidationError("not a dacc checkpoint (bad magic)");
  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != Checkpoint::kVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(ckpt.version));
  }
  ckpt.fingerprint = r.u64();
  const std::uint32_t kind = r.u32();
  if (kind > static_cast<std::uint32_t>(NetworkKind::dan)) throw ValidationError("unknown network kind in checkpoint");
  ckpt.kind = static_cast<NetworkKind>(kind);
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = r.str(r.u32());
    const std::uint32_t role = r.u32();
    if (role > static_cast<std::uint32_t>(ParamRole::class_head)) throw ValidationError("unknown parameter role");
    e.role = static_cast<ParamRole>(role);
    e.shape.n = r.u32();
    e.shape.c = r.u32();
    e.shape.h = r.u32();
    e.shape.w = r.u32();
    r.need(e.shape.size() * 4);
    e.values.resize(e.shape.size());
    for (auto& v : e.values) v = r.f32();
    ckpt.entries.push_back(std::move(e));
  }
  if (!r.done()) throw ValidationError("trailing bytes after checkpoint at offset " + std::to_string(r.pos()));
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

template <typename T>
Checkpoint make_checkpoint(const ParamSet<T>& params, std::uint64_t fingerprint, NetworkKind kind) {
  Checkpoint ckpt;
  ckpt.fingerprint = fingerprint;
  ckpt.kind = kind;
  for (const auto& p : params.entries()) {
    const auto& v = p.var.value();
    ckpt.entries.push_back({p.name, p.role, v.shape(), std::vector<float>(v.values().begin(), v.values().end())});
  }
  return ckpt;
}

template <typename T>
void apply_checkpoint(const Checkpoint& ckpt, const ParamSet<T>& params, std::uint64_t expected_fingerprint,
                      bool partial) {
  if (ckpt.fingerprint != expected_fingerprint) {
    throw ValidationError("checkpoint was written for a different input size / grid configuration");
  }
  std::set<std::string> seen;
  for (const auto& e : ckpt.entries) {
    const NamedParam<T>* p = params.find(e.name);
    if (p == nullptr) throw ValidationError("checkpoint parameter " + e.name + " has no counterpart in the network");
    if (p->var.shape() != e.shape) {
      throw ShapeError("checkpoint parameter " + e.name + " has shape " + e.shape.to_string() + ", network expects " +
                       p->var.shape().to_string());
    }
    if (!seen.insert(e.name).second) throw ValidationError("duplicate checkpoint parameter " + e.name);
  }
  if (!partial && seen.size() != params.size()) {
    for (const auto& p : params.entries())
      if (!seen.count(p.name)) throw ValidationError("checkpoint is missing parameter " + p.name);
  }
  for (const auto& e : ckpt.entries) {
    Variable<T> var = params.find(e.name)->var;
    auto dst = var.mutable_value().data();
    for (std::size_t i = 0; i < e.values.size(); ++i) dst[i] = static_cast<T>(e.values[i]);
  }
}

template <typename T>
Checkpoint base_checkpoint(const BasicArchitecture<T>& base) {
  return make_checkpoint(base.params(), architecture_fingerprint(base.config()), NetworkKind::base);
}

template Checkpoint make_checkpoint(const ParamSet<float>&, std::uint64_t, NetworkKind);
template Checkpoint make_checkpoint(const ParamSet<double>&, std::uint64_t, NetworkKind);
template void apply_checkpoint(const Checkpoint&, const ParamSet<float>&, std::uint64_t, bool);
template void apply_checkpoint(const Checkpoint&, const ParamSet<double>&, std::uint64_t, bool);
template Checkpoint base_checkpoint(const BasicArchitecture<float>&);
template Checkpoint base_checkpoint(const BasicArchitecture<double>&);

BasicArchitecture<float> load_base(const Checkpoint& ckpt, const ArchitectureConfig& config) {
  BasicArchitecture<float> base(config, 0);
  Checkpoint trimmed = ckpt;
  std::erase_if(trimmed.entries, [](const CheckpointEntry& e) {
    return e.role != ParamRole::base && e.role != ParamRole::density_head;
  });
  apply_checkpoint(trimmed, base.params(), architecture_fingerprint(config));
  return base;
}

namespace {

constexpr const char* kMetaName = "meta.txt";

Checkpoint load_kind(const std::filesystem::path& path, NetworkKind kind) {
  if (!std::filesystem::exists(path)) throw ValidationError("missing checkpoint " + path.string());
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != kind) {
    throw ValidationError(path.string() + " holds a " + std::string(to_string(ckpt.kind)) + " network, expected " +
                          std::string(to_string(kind)));
  }
  return ckpt;
}

}  // namespace

void save_model(const std::filesystem::path& dir, const NetworkTriple<float>& nets, double th) {
  std::filesystem::create_directories(dir);
  const std::uint64_t fp = architecture_fingerprint(nets.dan.base().config());
  save_checkpoint(dir / "dan.ckpt", make_checkpoint(nets.dan.params(), fp, NetworkKind::dan));
  save_checkpoint(dir / "lcn.ckpt", make_checkpoint(nets.lcn.params(), fp, NetworkKind::lcn));
  save_checkpoint(dir / "hcn.ckpt", make_checkpoint(nets.hcn.params(), fp, NetworkKind::hcn));
  char buf[64];
  std::snprintf(buf, sizeof buf, "th = %.17g\n", th);
  const std::string meta = buf;
  write_file_bytes(dir / kMetaName, std::span(reinterpret_cast<const std::uint8_t*>(meta.data()), meta.size()));
}

ModelFiles load_model(const std::filesystem::path& dir, const ArchitectureConfig& config) {
  const std::uint64_t fp = architecture_fingerprint(config);
  ModelFiles out{build_networks<float>(config, 0), 0.0};
  apply_checkpoint(load_kind(dir / "dan.ckpt", NetworkKind::dan), out.nets.dan.params(), fp);
  apply_checkpoint(load_kind(dir / "lcn.ckpt", NetworkKind::lcn), out.nets.lcn.params(), fp);
  apply_checkpoint(load_kind(dir / "hcn.ckpt", NetworkKind::hcn), out.nets.hcn.params(), fp);

  const auto meta_path = dir / kMetaName;
  if (!std::filesystem::exists(meta_path)) throw ValidationError("missing " + meta_path.string());
  const auto bytes = read_file_bytes(meta_path);
  const std::string text(bytes.begin(), bytes.end());
  const auto eq = text.find('=');
  if (text.compare(0, 2, "th") != 0 || eq == std::string::npos) {
    throw ValidationError(meta_path.string() + ": expected 'th = <value>'");
  }
  const std::string value = text.substr(eq + 1);
  char* end = nullptr;
  out.th = std::strtod(value.c_str(), &end);
  while (end && (*end == ' ' || *end == '\n' || *end == '\r')) ++end;
  if (end == value.c_str() || (end && *end != '\0') || !std::isfinite(out.th) || out.th < 0.0) {
    throw ValidationError(meta_path.string() + ": malformed threshold '" + value + "'");
  }
  return out;
}

}  // namespace dacc
