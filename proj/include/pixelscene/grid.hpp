#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pixelscene/common.hpp"

namespace pxs {

// Label value excluded from losses, features and metrics.
inline constexpr std::uint8_t kIgnoreLabel = 255;

// Half-open pixel box [x0,x1) x [y0,y1), row = y growing downward.
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    bool valid() const { return x0 < x1 && y0 < y1; }

    bool operator==(const BoundingBox&) const = default;
};

// Per-pixel class ids on an HxW grid; values are class ids or kIgnoreLabel.
class LabelMap {
public:
    LabelMap() = default;
    LabelMap(int height, int width, std::uint8_t fill = 0)
        : height_(height), width_(width) {
        if (height < 1 || width < 1)
            throw ValidationError("LabelMap dimensions must be at least 1x1");
        labels_.assign(static_cast<std::size_t>(height) * width, fill);
    }

    int height() const { return height_; }
    int width() const { return width_; }

    std::uint8_t at(int y, int x) const { return labels_[idx(y, x)]; }
    void set(int y, int x, std::uint8_t v) { labels_[idx(y, x)] = v; }

    const std::vector<std::uint8_t>& data() const { return labels_; }
    std::vector<std::uint8_t>& data() { return labels_; }

    // Every value must be < num_classes or the ignore sentinel.
    void validate(int num_classes, const std::string& context = "") const;

    bool operator==(const LabelMap&) const = default;

private:
    std::size_t idx(int y, int x) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> labels_;
};

// HxWxC real-valued class scores, stored (row, col, class).
class ScoreMap {
public:
    ScoreMap() = default;
    ScoreMap(int height, int width, int num_classes, double fill = 0.0)
        : height_(height), width_(width), num_classes_(num_classes) {
        if (height < 1 || width < 1)
            throw ValidationError("ScoreMap dimensions must be at least 1x1");
        if (num_classes < 2)
            throw ValidationError("ScoreMap needs at least 2 classes");
        scores_.assign(static_cast<std::size_t>(height) * width * num_classes, fill);
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int num_classes() const { return num_classes_; }

    double at(int y, int x, int c) const { return scores_[idx(y, x, c)]; }
    void set(int y, int x, int c, double v) { scores_[idx(y, x, c)] = v; }

    const double* pixel(int y, int x) const { return scores_.data() + idx(y, x, 0); }
    double* pixel(int y, int x) { return scores_.data() + idx(y, x, 0); }

    const std::vector<double>& data() const { return scores_; }
    std::vector<double>& data() { return scores_; }

    bool operator==(const ScoreMap&) const = default;

private:
    std::size_t idx(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * num_classes_ + c;
    }

    int height_ = 0;
    int width_ = 0;
    int num_classes_ = 0;
    std::vector<double> scores_;
};

// Class names (index = class id) plus RGB colors for rendering.
struct ClassPalette {
    std::vector<std::string> names;
    std::vector<std::array<std::uint8_t, 3>> colors;

    int num_classes() const { return static_cast<int>(names.size()); }
    void validate() const;
};

// Evenly spread distinct hues; colors are guaranteed pairwise distinct and
// never black (black is reserved for ignore pixels when rendering).
ClassPalette make_default_palette(const std::vector<std::string>& names);

enum class ResizeMode { kNearest, kBilinear };

LabelMap crop(const LabelMap& map, const BoundingBox& box);
ScoreMap crop(const ScoreMap& map, const BoundingBox& box);

LabelMap mirror_horizontal(const LabelMap& map);
ScoreMap mirror_horizontal(const ScoreMap& map);

// Per-channel interpolation; bilinear samples at (i+0.5)*scale-0.5 with edge
// clamping (align-corners-false), which keeps constant maps exactly constant.
ScoreMap resize_scores(const ScoreMap& map, int new_height, int new_width, ResizeMode mode);

}  // namespace pxs
