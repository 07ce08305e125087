#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "contourlab/canvas.hpp"

namespace contourlab {

/// 8-bit gray or RGB PNG. Output bytes depend only on the pixels.
std::vector<std::uint8_t> encode_png(const Canvas& c);
/// Decodes any PNG to 8-bit gray or RGB (alpha and palettes are flattened).
Canvas decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::string& path, const Canvas& c);
Canvas read_png(const std::string& path);

/// Writes bytes to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace contourlab
