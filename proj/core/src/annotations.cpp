#include "dacc/annotations.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "dacc/errors.hpp"

namespace dacc {

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_number(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ValidationError("line " + std::to_string(line_no) + ": non-numeric token '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

HeadAnnotations parse_annotations(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_size = false;
  ImageSize size{};
  std::vector<Point> points;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto toks = tokens(line);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (toks.size() != 2) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 2 values, got " + std::to_string(toks.size()));
    }
    const double a = parse_number(toks[0], line_no);
    const double b = parse_number(toks[1], line_no);
    if (!have_size) {
      if (a < 1 || b < 1 || a != std::floor(a) || b != std::floor(b)) {
        throw ValidationError("line " + std::to_string(line_no) + ": image size must be two positive integers");
      }
      size = {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
      have_size = true;
      continue;
    }
    if (a < 0.0 || b < 0.0 || a >= static_cast<double>(size.width) || b >= static_cast<double>(size.height)) {
      throw ValidationError("line " + std::to_string(line_no) + ": point (" + std::string(toks[0]) + ", " +
                            std::string(toks[1]) + ") outside the " + std::to_string(size.width) + "x" +
                            std::to_string(size.height) + " image");
    }
    points.push_back({a, b});
    if (end == text.size()) break;
  }
  if (!have_size) throw ValidationError("line 1: missing 'width height' header");
  return HeadAnnotations(size, std::move(points));
}

std::string format_annotations(const HeadAnnotations& ann) {
  std::string out = std::to_string(ann.source_size().width) + " " + std::to_string(ann.source_size().height) + "\n";
  char buf[96];
  for (const Point& p : ann.points()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out += buf;
  }
  return out;
}

HeadAnnotations read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open annotation file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_annotations(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_annotations(const HeadAnnotations& ann, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_annotations(ann);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace dacc
