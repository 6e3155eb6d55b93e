#pragma once

#include "fundus/raster.hpp"

namespace fundus {

/// Canonical detachment mask: pixels strictly inside the centered
/// circle of diameter = image width are lesion (0), everything else
/// background (255). The boundary itself is background.
Raster detachment_mask(int height, int width);

/// Class probability maps for an image and for its horizontally
/// flipped copy (same shape, channels sum to ~1 per pixel).
struct ProbMapPair {
    Raster original;
    Raster flipped;
};

Raster hflip(const Raster& img);

/// Un-flip the flipped map, then average with the original per pixel
/// and channel.
Raster flip_merge(const ProbMapPair& pair);

/// Per-pixel argmax of a 2-channel probability map: class 0 (lesion)
/// wins -> 0, class 1 (background) wins or ties -> 255.
Raster argmax_mask(const Raster& probs);

/// Nearest-neighbor mapping of a normalized-frame mask back to the
/// original frame through the inverse transform; pixels outside the
/// crop window become background.
Raster denormalize_mask(const Raster& mask, const FrameTransform& transform,
                        int orig_h, int orig_w);

} // namespace fundus
