#include "fundus/raster_io.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <json.hpp>

namespace fundus {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

} // namespace

Raster read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) fail(path, "cannot open");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "not a valid PNG");
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize to 8-bit gray or RGB.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported channel count " + std::to_string(channels));
    }

    Raster img = Raster::u8(height, width, channels);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = img.bytes().data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::filesystem::path& path, const Raster& img) {
    if (!img.is_u8()) throw std::invalid_argument("write_png: 8-bit raster required");
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) fail(path, "cannot open for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG write failed");
    }

    png_init_io(png, fp.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, img.width(), img.height(), 8,
                 img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> rows(img.height());
    std::vector<std::uint8_t> data = img.bytes(); // libpng wants non-const rows
    for (int y = 0; y < img.height(); ++y)
        rows[y] = data.data() + static_cast<std::size_t>(y) * img.width() * img.channels();
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".json");
}

} // namespace

Raster read_float_raster(const std::filesystem::path& path) {
    std::ifstream side(sidecar_path(path));
    if (!side) fail(sidecar_path(path), "cannot open sidecar");
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        fail(sidecar_path(path), e.what());
    }
    if (!meta.contains("height") || !meta.contains("width") || !meta.contains("channels"))
        fail(sidecar_path(path), "sidecar missing height/width/channels");
    const int h = meta["height"].get<int>();
    const int w = meta["width"].get<int>();
    const int c = meta["channels"].get<int>();
    if (h < 1 || w < 1 || c < 1) fail(sidecar_path(path), "invalid sidecar dimensions");

    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    Raster img = Raster::f32(h, w, c);
    std::vector<unsigned char> raw(img.sample_count() * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        fail(path, "truncated float raster");

    auto& dst = img.floats();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                             static_cast<std::uint32_t>(raw[4 * i + 1]) << 8 |
                             static_cast<std::uint32_t>(raw[4 * i + 2]) << 16 |
                             static_cast<std::uint32_t>(raw[4 * i + 3]) << 24;
        dst[i] = std::bit_cast<float>(bits);
    }
    return img;
}

void write_float_raster(const std::filesystem::path& path, const Raster& img) {
    if (img.is_u8()) throw std::invalid_argument("write_float_raster: float raster required");

    std::vector<unsigned char> raw(img.sample_count() * 4);
    const auto& src = img.floats();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(src[i]);
        raw[4 * i] = static_cast<unsigned char>(bits & 0xff);
        raw[4 * i + 1] = static_cast<unsigned char>(bits >> 8 & 0xff);
        raw[4 * i + 2] = static_cast<unsigned char>(bits >> 16 & 0xff);
        raw[4 * i + 3] = static_cast<unsigned char>(bits >> 24 & 0xff);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) fail(path, "write failed");

    nlohmann::json meta{{"height", img.height()}, {"width", img.width()}, {"channels", img.channels()}};
    std::ofstream side(sidecar_path(path), std::ios::trunc);
    if (!side) fail(sidecar_path(path), "cannot open sidecar for writing");
    side << meta.dump() << '\n';
}

} // namespace fundus
