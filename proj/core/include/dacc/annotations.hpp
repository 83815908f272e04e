#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dacc/groundtruth.hpp"

namespace dacc {

// Text format: first line "width height", then one "x y" pair per line.

/// Throws ValidationError with the 1-based line number on non-numeric
/// tokens or points outside [0, width) x [0, height).
HeadAnnotations parse_annotations(std::string_view text);
std::string format_annotations(const HeadAnnotations& ann);

HeadAnnotations read_annotations(const std::filesystem::path& path);
void write_annotations(const HeadAnnotations& ann, const std::filesystem::path& path);

}  // namespace dacc
