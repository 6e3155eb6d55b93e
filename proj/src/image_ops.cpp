#include "fundus/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fundus {

namespace {

Raster crop_window(const Raster& img, int left, int top, int w, int h) {
    Raster out = img.is_u8() ? Raster::u8(h, w, img.channels())
                             : Raster::f32(h, w, img.channels());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels(); ++c) {
                if (img.is_u8())
                    out.at8(y, x, c) = img.at8(top + y, left + x, c);
                else
                    out.atf(y, x, c) = img.atf(top + y, left + x, c);
            }
    return out;
}

double axis_scale(int in, int out) {
    if (out > 1 && in > 1) return static_cast<double>(out - 1) / (in - 1);
    return static_cast<double>(out) / in; // degenerate 1-pixel axis, nominal ratio
}

// Source coordinate sampled for output index i, edge centers aligned.
double source_coord(int i, int in, int out) {
    if (out > 1 && in > 1) return static_cast<double>(i) * (in - 1) / (out - 1);
    return (in - 1) / 2.0;
}

double round_half_up(double v) { return std::floor(v + 0.5); }

} // namespace

TransformedRaster center_square_crop(const Raster& img) {
    if (img.empty()) throw std::invalid_argument("center_square_crop: empty raster");
    const int side = std::min(img.height(), img.width());
    const int left = (img.width() - side) / 2;
    const int top = (img.height() - side) / 2;
    FrameTransform t{static_cast<double>(left), static_cast<double>(top), 1.0, 1.0};
    if (side == img.height() && side == img.width()) return {img, t};
    return {crop_window(img, left, top, side, side), t};
}

TransformedRaster resize(const Raster& img, int out_h, int out_w) {
    if (img.empty()) throw std::invalid_argument("resize: empty raster");
    if (out_h < 1 || out_w < 1) throw std::invalid_argument("resize: target size must be >= 1");

    FrameTransform t{0.0, 0.0, axis_scale(img.width(), out_w), axis_scale(img.height(), out_h)};
    if (out_h == img.height() && out_w == img.width()) return {img, t};

    Raster out = img.is_u8() ? Raster::u8(out_h, out_w, img.channels())
                             : Raster::f32(out_h, out_w, img.channels());
    for (int y = 0; y < out_h; ++y) {
        const double sy = source_coord(y, img.height(), out_h);
        const int y0 = std::min(static_cast<int>(sy), img.height() - 1);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double sx = source_coord(x, img.width(), out_w);
            const int x0 = std::min(static_cast<int>(sx), img.width() - 1);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double fx = sx - x0;
            for (int c = 0; c < img.channels(); ++c) {
                double v00, v01, v10, v11;
                if (img.is_u8()) {
                    v00 = img.at8(y0, x0, c);
                    v01 = img.at8(y0, x1, c);
                    v10 = img.at8(y1, x0, c);
                    v11 = img.at8(y1, x1, c);
                } else {
                    v00 = img.atf(y0, x0, c);
                    v01 = img.atf(y0, x1, c);
                    v10 = img.atf(y1, x0, c);
                    v11 = img.atf(y1, x1, c);
                }
                const double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                 fy * ((1 - fx) * v10 + fx * v11);
                if (img.is_u8())
                    out.at8(y, x, c) = static_cast<std::uint8_t>(
                        std::clamp(round_half_up(v), 0.0, 255.0));
                else
                    out.atf(y, x, c) = static_cast<float>(v);
            }
        }
    }
    return {std::move(out), t};
}

Raster rescale_pixels(const Raster& img) {
    if (!img.is_u8()) throw std::invalid_argument("rescale_pixels: 8-bit input required");
    Raster out = Raster::f32(img.height(), img.width(), img.channels());
    const auto& src = img.bytes();
    auto& dst = out.floats();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = static_cast<float>(src[i] / 127.5 - 1.0);
    return out;
}

TransformedRaster extract_roi(const Raster& img800, Point center) {
    constexpr int kFrame = 800;
    constexpr int kRoi = 224;
    if (img800.height() != kFrame || img800.width() != kFrame)
        throw std::invalid_argument("extract_roi: input must be 800x800");
    const int cx = static_cast<int>(round_half_up(center.x));
    const int cy = static_cast<int>(round_half_up(center.y));
    const int left = std::clamp(cx - kRoi / 2, 0, kFrame - kRoi);
    const int top = std::clamp(cy - kRoi / 2, 0, kFrame - kRoi);
    FrameTransform t{static_cast<double>(left), static_cast<double>(top), 1.0, 1.0};
    return {crop_window(img800, left, top, kRoi, kRoi), t};
}

Point map_point(const FrameTransform& t, Point p, MapDirection dir) {
    return dir == MapDirection::Forward ? t.forward(p) : t.inverse(p);
}

} // namespace fundus
