#pragma once

#include <filesystem>

#include "fundus/raster.hpp"

namespace fundus {

/// 8-bit grayscale or RGB PNG.
Raster read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster& img);

/// Raw little-endian float32 row-major data at `path`, shape in a JSON
/// sidecar at `path + ".json"`: {"height":H,"width":W,"channels":C}.
/// Round trips are bit exact.
Raster read_float_raster(const std::filesystem::path& path);
void write_float_raster(const std::filesystem::path& path, const Raster& img);

} // namespace fundus
