#pragma once

#include "pedscan/image.hpp"

#include <filesystem>

namespace pedscan::cli {

/// Decodes PNG/PGM/PPM/JPEG to grayscale. Color inputs go through to_grayscale.
/// Throws FormatError when the file is missing or undecodable.
GrayImage load_gray(const std::filesystem::path& path);

/// Binary PGM (P5).
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace pedscan::cli
