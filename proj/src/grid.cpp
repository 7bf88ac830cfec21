#include "pixelscene/grid.hpp"

#include <set>

#include "pixelscene/interp.hpp"

namespace pxs {

void LabelMap::validate(int num_classes, const std::string& context) const {
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const std::uint8_t v = at(y, x);
            if (v != kIgnoreLabel && v >= num_classes) {
                throw ValidationError("label value " + std::to_string(v) + " out of range for " +
                                      std::to_string(num_classes) + " classes at pixel (" +
                                      std::to_string(y) + "," + std::to_string(x) + ")" +
                                      (context.empty() ? "" : " in " + context));
            }
        }
    }
}

void ClassPalette::validate() const {
    if (names.size() != colors.size())
        throw ValidationError("palette names/colors size mismatch");
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size())
        throw ValidationError("palette class names must be unique");
}

namespace {

std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)      { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else             { r = c; b = x; }
    const double m = v - c;
    const auto q = [m](double u) {
        return static_cast<std::uint8_t>(std::lround((u + m) * 255.0));
    };
    return {q(r), q(g), q(b)};
}

}  // namespace

ClassPalette make_default_palette(const std::vector<std::string>& names) {
    ClassPalette palette;
    palette.names = names;
    const int n = static_cast<int>(names.size());
    std::set<std::array<std::uint8_t, 3>> used;
    used.insert({0, 0, 0});  // reserved for ignore
    for (int i = 0; i < n; ++i) {
        const double hue = 360.0 * i / n;
        const double sat = (i % 2 == 0) ? 0.85 : 0.55;
        const double val = 0.95 - 0.25 * ((i / 2) % 2);
        auto rgb = hsv_to_rgb(hue, sat, val);
        while (used.count(rgb)) rgb[2] = static_cast<std::uint8_t>(rgb[2] == 255 ? 1 : rgb[2] + 1);
        used.insert(rgb);
        palette.colors.push_back(rgb);
    }
    palette.validate();
    return palette;
}

namespace {

void check_box_within(const BoundingBox& box, int height, int width) {
    if (!box.valid())
        throw ValidationError("degenerate bounding box");
    if (box.x0 < 0 || box.y0 < 0 || box.x1 > width || box.y1 > height)
        throw ValidationError("crop box out of bounds");
}

}  // namespace

LabelMap crop(const LabelMap& map, const BoundingBox& box) {
    check_box_within(box, map.height(), map.width());
    LabelMap out(box.height(), box.width());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            out.set(y, x, map.at(box.y0 + y, box.x0 + x));
    return out;
}

ScoreMap crop(const ScoreMap& map, const BoundingBox& box) {
    check_box_within(box, map.height(), map.width());
    ScoreMap out(box.height(), box.width(), map.num_classes());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            for (int c = 0; c < map.num_classes(); ++c)
                out.set(y, x, c, map.at(box.y0 + y, box.x0 + x, c));
    return out;
}

LabelMap mirror_horizontal(const LabelMap& map) {
    LabelMap out(map.height(), map.width());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
            out.set(y, x, map.at(y, map.width() - 1 - x));
    return out;
}

ScoreMap mirror_horizontal(const ScoreMap& map) {
    ScoreMap out(map.height(), map.width(), map.num_classes());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
            for (int c = 0; c < map.num_classes(); ++c)
                out.set(y, x, c, map.at(y, map.width() - 1 - x, c));
    return out;
}

ScoreMap resize_scores(const ScoreMap& map, int new_height, int new_width, ResizeMode mode) {
    if (new_height < 1 || new_width < 1)
        throw ValidationError("resize target must be at least 1x1");
    const int channels = map.num_classes();
    ScoreMap out(new_height, new_width, channels);
    if (mode == ResizeMode::kNearest) {
        const auto ty = interp::nearest_taps(map.height(), new_height);
        const auto tx = interp::nearest_taps(map.width(), new_width);
        for (int y = 0; y < new_height; ++y)
            for (int x = 0; x < new_width; ++x)
                for (int c = 0; c < channels; ++c)
                    out.set(y, x, c, map.at(ty[y], tx[x], c));
        return out;
    }
    const auto ty = interp::bilinear_taps(map.height(), new_height);
    const auto tx = interp::bilinear_taps(map.width(), new_width);
    for (int y = 0; y < new_height; ++y) {
        for (int x = 0; x < new_width; ++x) {
            for (int c = 0; c < channels; ++c) {
                const double top =
                    interp::lerp<double>(map.at(ty[y].i0, tx[x].i0, c), map.at(ty[y].i0, tx[x].i1, c), tx[x].t);
                const double bottom =
                    interp::lerp<double>(map.at(ty[y].i1, tx[x].i0, c), map.at(ty[y].i1, tx[x].i1, c), tx[x].t);
                out.set(y, x, c, interp::lerp(top, bottom, ty[y].t));
            }
        }
    }
    return out;
}

}  // namespace pxs
