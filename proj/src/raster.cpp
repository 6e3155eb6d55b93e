#include "fundus/raster.hpp"

#include <algorithm>
#include <stdexcept>

namespace fundus {

Raster Raster::u8(int height, int width, int channels, std::uint8_t fill) {
    if (height < 1 || width < 1 || (channels != 1 && channels != 3))
        throw std::invalid_argument("raster dimensions must be positive with 1 or 3 channels");
    Raster r;
    r.height_ = height;
    r.width_ = width;
    r.channels_ = channels;
    r.type_ = PixelType::U8;
    r.bytes_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    return r;
}

Raster Raster::f32(int height, int width, int channels, float fill) {
    if (height < 1 || width < 1 || channels < 1)
        throw std::invalid_argument("raster dimensions must be positive");
    Raster r;
    r.height_ = height;
    r.width_ = width;
    r.channels_ = channels;
    r.type_ = PixelType::F32;
    r.floats_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    return r;
}

bool Raster::is_binary_mask() const {
    if (type_ != PixelType::U8 || channels_ != 1) return false;
    return std::all_of(bytes_.begin(), bytes_.end(), [](std::uint8_t v) {
        return v == kMaskForeground || v == kMaskBackground;
    });
}

} // namespace fundus
