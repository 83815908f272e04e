#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dacc/network.hpp"

namespace dacc {

/// On-disk layout (all integers little-endian):
///   "DACCKPT\0" | u32 version | u64 config fingerprint | u32 network kind |
///   u32 entry count | entries...
/// entry: u32 name length | name bytes | u32 role | u32 n,c,h,w |
///        n*c*h*w IEEE-754 binary32 values
struct CheckpointEntry {
  std::string name;
  ParamRole role = ParamRole::base;
  Shape4 shape;
  std::vector<float> values;
  friend bool operator==(const CheckpointEntry&, const CheckpointEntry&) = default;
};

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::uint32_t version = kVersion;
  std::uint64_t fingerprint = 0;
  NetworkKind kind = NetworkKind::base;
  std::vector<CheckpointEntry> entries;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws ValidationError on bad magic, unknown version, or truncation.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
Checkpoint make_checkpoint(const ParamSet<T>& params, std::uint64_t fingerprint, NetworkKind kind);

/// Copies checkpoint values into matching parameters. Every checkpoint entry
/// must name a parameter of identical shape; with `partial` false every
/// parameter must also be covered. Throws ValidationError on fingerprint or
/// shape mismatch.
template <typename T>
void apply_checkpoint(const Checkpoint& ckpt, const ParamSet<T>& params, std::uint64_t expected_fingerprint,
                      bool partial = false);

/// Base + density head only.
template <typename T>
Checkpoint base_checkpoint(const BasicArchitecture<T>& base);

/// Base + density head restored from a checkpoint of any kind; head entries
/// of LCN/HCN/DAN checkpoints are ignored.
BasicArchitecture<float> load_base(const Checkpoint& ckpt, const ArchitectureConfig& config);

/// A trained model directory: dan.ckpt, lcn.ckpt, hcn.ckpt and meta.txt
/// holding "th = <value>".
struct ModelFiles {
  NetworkTriple<float> nets;
  double th = 0.0;
};

void save_model(const std::filesystem::path& dir, const NetworkTriple<float>& nets, double th);
/// Throws ValidationError if a file is missing, a checkpoint has the wrong
/// kind, or the fingerprint does not match `config`.
ModelFiles load_model(const std::filesystem::path& dir, const ArchitectureConfig& config);

}  // namespace dacc
