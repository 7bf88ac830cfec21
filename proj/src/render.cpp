#include "pixelscene/render.hpp"

#include <algorithm>
#include <iostream>

namespace pxs {

Image render_labels(const LabelMap& labels, const ClassPalette& palette, const Image* base) {
    palette.validate();
    if (base && (base->height() != labels.height() || base->width() != labels.width()))
        throw ValidationError("render_labels: base image size mismatch");
    Image out(labels.height(), labels.width());
    for (int y = 0; y < labels.height(); ++y) {
        for (int x = 0; x < labels.width(); ++x) {
            const std::uint8_t v = labels.at(y, x);
            std::array<std::uint8_t, 3> color{0, 0, 0};
            if (v != kIgnoreLabel) {
                if (v >= palette.num_classes())
                    throw ValidationError("render_labels: palette too small for label " +
                                          std::to_string(v));
                color = palette.colors[v];
            }
            for (int ch = 0; ch < 3; ++ch) {
                const int c = base ? (base->at(y, x, ch) + color[ch]) / 2 : color[ch];
                out.set(y, x, ch, static_cast<std::uint8_t>(c));
            }
        }
    }
    return out;
}

namespace {

BoundingBox clamp_box(const BoundingBox& box, int height, int width, bool& warned) {
    BoundingBox c{std::clamp(box.x0, 0, width), std::clamp(box.y0, 0, height),
                  std::clamp(box.x1, 0, width), std::clamp(box.y1, 0, height)};
    if (c != box && !warned) {
        std::cerr << "warning: detection box outside image bounds, clamping\n";
        warned = true;
    }
    return c;
}

void draw_box(Image& image, const BoundingBox& box, std::uint8_t r, std::uint8_t g,
              std::uint8_t b) {
    if (!box.valid()) return;
    for (int x = box.x0; x < box.x1; ++x) {
        image.set_rgb(box.y0, x, r, g, b);
        image.set_rgb(box.y1 - 1, x, r, g, b);
    }
    for (int y = box.y0; y < box.y1; ++y) {
        image.set_rgb(y, box.x0, r, g, b);
        image.set_rgb(y, box.x1 - 1, r, g, b);
    }
}

}  // namespace

Image render_detections(const Image& image, const std::vector<Detection>& detections,
                        const std::optional<std::vector<BoundingBox>>& gt_boxes) {
    Image out = image;
    bool warned = false;
    if (gt_boxes)
        for (const BoundingBox& box : *gt_boxes)
            draw_box(out, clamp_box(box, image.height(), image.width(), warned), 0, 255, 0);
    for (const Detection& det : detections)
        draw_box(out, clamp_box(det.box, image.height(), image.width(), warned), 0, 0, 255);
    return out;
}

}  // namespace pxs
