#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "omnidet/errors.hpp"

namespace omnidet {

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    static Image constant(int width, int height, int channels, std::uint8_t value);

    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    bool empty() const { return data.empty(); }
};

/// Binary PGM (P5, 1 channel) / PPM (P6, 3 channels), maxval 255.
Image read_image(std::istream& in, std::string source_name);
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, std::ostream& out);
void write_image(const Image& image, const std::filesystem::path& path);

}  // namespace omnidet
