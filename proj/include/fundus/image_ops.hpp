#pragma once

#include "fundus/raster.hpp"

namespace fundus {

struct TransformedRaster {
    Raster image;
    FrameTransform transform;
};

enum class MapDirection { Forward, Inverse };

/// Crop to the centered S x S square, S = min(height, width).
/// Offset on the long axis is floor((dim - S) / 2).
TransformedRaster center_square_crop(const Raster& img);

/// Bilinear resize with edge pixel centers aligned: output coordinate i
/// samples the input at i * (in - 1) / (out - 1) when out > 1.
TransformedRaster resize(const Raster& img, int out_h, int out_w);

/// 8-bit values to floats in [-1, 1]: v / 127.5 - 1.
Raster rescale_pixels(const Raster& img);

/// 224 x 224 window of an 800 x 800 image centered at the rounded
/// center, clamped to stay inside the image.
TransformedRaster extract_roi(const Raster& img800, Point center);

Point map_point(const FrameTransform& t, Point p, MapDirection dir);

} // namespace fundus
