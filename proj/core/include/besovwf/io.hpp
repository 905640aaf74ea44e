#pragma once

#include "besovwf/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace besovwf::io {

/// Binary field file: "BWF1", dim (u8), n (u32), L (f64), then interleaved
/// re/im f64, all little-endian.
void write_field(const std::filesystem::path& path, const Field& f);
Field read_field(const std::filesystem::path& path);

/// CSV with one row per sample: index columns (i0[,i1]), re, im.
void write_field_csv(const std::filesystem::path& path, const Field& f);

/// 8-bit binary PGM (P5). Values are mapped linearly from [lo, hi] to [0, 255].
void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<double>& values, double lo, double hi);

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for non-finite).
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace besovwf::io
