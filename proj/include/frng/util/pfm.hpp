#pragma once

#include <string>
#include <vector>

namespace frng {

// Planar float image, row 0 at the top, interleaved channels.
struct Image {
    int width = 0, height = 0, channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0.0f) {}

    float& at(int row, int col, int ch = 0) {
        return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }
    float at(int row, int col, int ch = 0) const {
        return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
    }
    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
};

// PFM: header "PF" (3-channel) or "Pf" (1-channel), scale -1.0 (little
// endian), rows stored bottom-to-top.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);

// 8-bit PPM of a tonemapped linear image: x/(1+x) then sRGB.
void write_ppm_tonemapped(const std::string& path, const Image& img);

} // namespace frng
