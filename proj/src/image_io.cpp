#include "collar/image_io.hpp"

#include "collar/error.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

namespace collar {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return f;
}

// Decoded PNG normalized to 8- or 16-bit gray or 8-bit RGB.
struct RawImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> bytes;  // big-endian for 16-bit
};

enum class Want { Gray8, Gray16, Rgb8 };

RawImage read_png(const std::filesystem::path& path, Want want) {
    FilePtr f = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw Error(ErrorCode::Io, path.string() + " is not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(ErrorCode::Io, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorCode::Io, "png_create_info_struct failed");
    }
    RawImage img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::Io, "failed to decode " + path.string());
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);

    switch (want) {
        case Want::Gray16:
            if (depth != 16 || (color & PNG_COLOR_MASK_COLOR)) {
                png_destroy_read_struct(&png, &info, nullptr);
                throw Error(ErrorCode::Io, path.string() + " is not a 16-bit grayscale PNG");
            }
            img.channels = 1;
            img.bit_depth = 16;
            break;
        case Want::Gray8:
            if (depth == 16) png_set_strip_16(png);
            if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
            img.channels = 1;
            img.bit_depth = 8;
            break;
        case Want::Rgb8:
            if (depth == 16) png_set_strip_16(png);
            if (!(color & PNG_COLOR_MASK_COLOR)) png_set_gray_to_rgb(png);
            img.channels = 3;
            img.bit_depth = 8;
            break;
    }
    png_read_update_info(png, info);

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    const std::size_t expected = static_cast<std::size_t>(img.width) * img.channels * (img.bit_depth / 8);
    if (rowbytes != expected) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::Io, "unexpected row layout in " + path.string());
    }
    img.bytes.resize(rowbytes * img.height);
    std::vector<png_bytep> rows(img.height);
    for (int r = 0; r < img.height; ++r) rows[r] = img.bytes.data() + rowbytes * r;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               int bit_depth, const std::vector<std::uint8_t>& bytes) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(ErrorCode::Io, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorCode::Io, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::Io, "failed to encode " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
    for (int r = 0; r < height; ++r) {
        png_write_row(png, const_cast<png_bytep>(bytes.data() + rowbytes * r));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

DepthImage read_depth_png(const std::filesystem::path& path) {
    RawImage raw = read_png(path, Want::Gray16);
    std::vector<std::uint16_t> data(static_cast<std::size_t>(raw.width) * raw.height);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<std::uint16_t>((raw.bytes[2 * i] << 8) | raw.bytes[2 * i + 1]);
    }
    return DepthImage(raw.width, raw.height, std::move(data));
}

void write_depth_png(const std::filesystem::path& path, const DepthImage& depth) {
    std::vector<std::uint8_t> bytes(2 * depth.data().size());
    for (std::size_t i = 0; i < depth.data().size(); ++i) {
        bytes[2 * i] = static_cast<std::uint8_t>(depth.data()[i] >> 8);
        bytes[2 * i + 1] = static_cast<std::uint8_t>(depth.data()[i] & 0xff);
    }
    write_png(path, depth.width(), depth.height(), PNG_COLOR_TYPE_GRAY, 16, bytes);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
    RawImage raw = read_png(path, Want::Gray8);
    return BinaryMask(raw.width, raw.height, std::move(raw.bytes));
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> bytes(mask.bits().begin(), mask.bits().end());
    for (auto& b : bytes) b = b ? 255 : 0;
    write_png(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, 8, bytes);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
    RawImage raw = read_png(path, Want::Rgb8);
    return RgbImage(raw.width, raw.height, std::move(raw.bytes));
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
    std::vector<std::uint8_t> bytes(image.data().begin(), image.data().end());
    write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8, bytes);
}

}  // namespace collar
