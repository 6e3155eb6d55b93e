#pragma once

#include <cstdint>
#include <vector>

#include "fundus/geometry.hpp"

namespace fundus {

enum class PixelType { U8, F32 };

/// Row-major pixel grid with 1 or 3 channels and either 8-bit or
/// 32-bit float samples. Binary masks use the challenge convention:
/// 0 = structure/lesion, 255 = background.
class Raster {
public:
    Raster() = default;

    static Raster u8(int height, int width, int channels = 1, std::uint8_t fill = 0);
    static Raster f32(int height, int width, int channels = 1, float fill = 0.0f);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    PixelType type() const { return type_; }
    bool is_u8() const { return type_ == PixelType::U8; }
    bool empty() const { return height_ == 0 || width_ == 0; }
    std::size_t sample_count() const {
        return static_cast<std::size_t>(height_) * width_ * channels_;
    }

    std::uint8_t& at8(int y, int x, int c = 0) { return bytes_[index(y, x, c)]; }
    std::uint8_t at8(int y, int x, int c = 0) const { return bytes_[index(y, x, c)]; }
    float& atf(int y, int x, int c = 0) { return floats_[index(y, x, c)]; }
    float atf(int y, int x, int c = 0) const { return floats_[index(y, x, c)]; }

    std::vector<std::uint8_t>& bytes() { return bytes_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<float>& floats() { return floats_; }
    const std::vector<float>& floats() const { return floats_; }

    bool same_shape(const Raster& other) const {
        return height_ == other.height_ && width_ == other.width_ &&
               channels_ == other.channels_;
    }

    /// Single channel, values restricted to {0, 255}.
    bool is_binary_mask() const;

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 1;
    PixelType type_ = PixelType::U8;
    std::vector<std::uint8_t> bytes_;
    std::vector<float> floats_;
};

constexpr std::uint8_t kMaskForeground = 0;
constexpr std::uint8_t kMaskBackground = 255;

/// Maps points between an original frame and a cropped/scaled one.
/// forward: p -> (p - crop_offset) * scale. Exact inverse provided.
struct FrameTransform {
    double crop_offset_x = 0.0;
    double crop_offset_y = 0.0;
    double scale_x = 1.0;
    double scale_y = 1.0;

    Point forward(Point p) const {
        return {(p.x - crop_offset_x) * scale_x, (p.y - crop_offset_y) * scale_y};
    }
    Point inverse(Point p) const {
        return {p.x / scale_x + crop_offset_x, p.y / scale_y + crop_offset_y};
    }
    /// Transform equivalent to applying *this, then `next`.
    FrameTransform then(const FrameTransform& next) const {
        return {crop_offset_x + next.crop_offset_x / scale_x,
                crop_offset_y + next.crop_offset_y / scale_y,
                scale_x * next.scale_x, scale_y * next.scale_y};
    }
};

} // namespace fundus
