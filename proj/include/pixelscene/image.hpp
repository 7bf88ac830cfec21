#pragma once

#include <cstdint>
#include <vector>

#include "pixelscene/grid.hpp"

namespace pxs {

// Interleaved 8-bit RGB.
class Image {
public:
    Image() = default;
    Image(int height, int width) : height_(height), width_(width) {
        if (height < 1 || width < 1)
            throw ValidationError("Image dimensions must be at least 1x1");
        pixels_.assign(static_cast<std::size_t>(height) * width * 3, 0);
    }

    int height() const { return height_; }
    int width() const { return width_; }

    std::uint8_t at(int y, int x, int ch) const { return pixels_[idx(y, x, ch)]; }
    void set(int y, int x, int ch, std::uint8_t v) { pixels_[idx(y, x, ch)] = v; }
    void set_rgb(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        const std::size_t i = idx(y, x, 0);
        pixels_[i] = r;
        pixels_[i + 1] = g;
        pixels_[i + 2] = b;
    }

    const std::vector<std::uint8_t>& data() const { return pixels_; }
    std::vector<std::uint8_t>& data() { return pixels_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t idx(int y, int x, int ch) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3 + ch;
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> pixels_;
};

Image crop(const Image& image, const BoundingBox& box);
Image mirror_horizontal(const Image& image);

}  // namespace pxs
