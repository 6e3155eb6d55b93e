#include "fundus/lesion_masks.hpp"

#include <cmath>
#include <stdexcept>

namespace fundus {

Raster detachment_mask(int height, int width) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("detachment_mask: invalid dimensions");
    Raster out = Raster::u8(height, width, 1, kMaskBackground);
    const double cx = width / 2.0;
    const double cy = height / 2.0;
    const double radius = width / 2.0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (std::hypot(x - cx, y - cy) < radius) out.at8(y, x) = kMaskForeground;
    return out;
}

Raster hflip(const Raster& img) {
    Raster out = img;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) {
                if (img.is_u8())
                    out.at8(y, x, c) = img.at8(y, img.width() - 1 - x, c);
                else
                    out.atf(y, x, c) = img.atf(y, img.width() - 1 - x, c);
            }
    return out;
}

Raster flip_merge(const ProbMapPair& pair) {
    if (pair.original.is_u8() || pair.flipped.is_u8())
        throw std::invalid_argument("flip_merge: float probability maps required");
    if (!pair.original.same_shape(pair.flipped))
        throw std::invalid_argument("flip_merge: shape mismatch");
    const Raster unflipped = hflip(pair.flipped);
    Raster out = pair.original;
    auto& dst = out.floats();
    const auto& other = unflipped.floats();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (dst[i] + other[i]) / 2.0f;
    return out;
}

Raster argmax_mask(const Raster& probs) {
    if (probs.is_u8() || probs.channels() != 2)
        throw std::invalid_argument("argmax_mask: H x W x 2 float raster required");
    Raster out = Raster::u8(probs.height(), probs.width(), 1, kMaskBackground);
    for (int y = 0; y < probs.height(); ++y)
        for (int x = 0; x < probs.width(); ++x)
            if (probs.atf(y, x, 0) > probs.atf(y, x, 1)) out.at8(y, x) = kMaskForeground;
    return out;
}

Raster denormalize_mask(const Raster& mask, const FrameTransform& transform,
                        int orig_h, int orig_w) {
    if (!mask.is_binary_mask())
        throw std::invalid_argument("denormalize_mask: binary mask required");
    if (orig_h < 1 || orig_w < 1)
        throw std::invalid_argument("denormalize_mask: invalid original dimensions");
    if (transform.scale_x == 0 || transform.scale_y == 0)
        throw std::invalid_argument("denormalize_mask: non-invertible transform");

    Raster out = Raster::u8(orig_h, orig_w, 1, kMaskBackground);
    for (int y = 0; y < orig_h; ++y)
        for (int x = 0; x < orig_w; ++x) {
            const Point q = transform.forward({static_cast<double>(x), static_cast<double>(y)});
            const int nx = static_cast<int>(std::lround(q.x));
            const int ny = static_cast<int>(std::lround(q.y));
            if (nx >= 0 && nx < mask.width() && ny >= 0 && ny < mask.height())
                out.at8(y, x) = mask.at8(ny, nx);
        }
    return out;
}

} // namespace fundus
