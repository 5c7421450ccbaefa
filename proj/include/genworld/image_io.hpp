// genworld/image_io.hpp
//
// PNG read/write for daedalus sprites. Requires libpng (PNG::PNG); the rest of
// the library does not depend on this header.
#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>

#include "genworld/daedalus.hpp"

namespace genworld::image_io {

inline daedalus::Sprite read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw Error(Errc::IoError, "daedalus", path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGBA;
    daedalus::Sprite s(static_cast<int>(image.width), static_cast<int>(image.height));
    if (!png_image_finish_read(&image, nullptr, s.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw Error(Errc::IoError, "daedalus", path.string() + ": " + image.message);
    }
    return s;
}

inline void write_png(const daedalus::Sprite& s, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(s.width);
    image.height = static_cast<png_uint_32>(s.height);
    image.format = PNG_FORMAT_RGBA;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, s.pixels.data(), 0, nullptr))
        throw Error(Errc::IoError, "daedalus", path.string() + ": " + image.message);
}

}  // namespace genworld::image_io
