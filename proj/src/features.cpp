#include "pixelscene/features.hpp"

#include <cmath>

namespace pxs {

HistogramFeature class_histogram(const LabelMap& labels, int num_classes,
                                 const std::optional<BoundingBox>& region) {
    if (num_classes < 1) throw ValidationError("class_histogram: num_classes must be positive");
    BoundingBox box = region.value_or(BoundingBox{0, 0, labels.width(), labels.height()});
    if (!box.valid()) throw ValidationError("class_histogram: degenerate region");
    if (box.x0 < 0 || box.y0 < 0 || box.x1 > labels.width() || box.y1 > labels.height())
        throw ValidationError("class_histogram: region out of bounds");

    HistogramFeature feature;
    feature.values.assign(num_classes, 0.0);
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const std::uint8_t v = labels.at(y, x);
            if (v == kIgnoreLabel) continue;
            if (v >= num_classes)
                throw ValidationError("class_histogram: label " + std::to_string(v) +
                                      " out of range for " + std::to_string(num_classes) +
                                      " classes");
            feature.values[v] += 1.0;
        }
    }
    return feature;
}

HistogramFeature l2_normalize(const HistogramFeature& feature) {
    double sq = 0.0;
    for (const double v : feature.values) sq += v * v;
    HistogramFeature out;
    out.normalized = true;
    out.values = feature.values;
    if (sq == 0.0) return out;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : out.values) v *= inv;
    return out;
}

OneHotFeature one_hot(const LabelMap& labels, int num_classes, double delta_fraction) {
    if (delta_fraction < 0.0 || delta_fraction >= 1.0)
        throw ValidationError("one_hot: delta_fraction must be in [0, 1)");
    const HistogramFeature counts = class_histogram(labels, num_classes);
    OneHotFeature out;
    out.delta = delta_fraction * static_cast<double>(labels.height()) * labels.width();
    out.bits.assign(num_classes, 0.0);
    for (int c = 0; c < num_classes; ++c)
        out.bits[c] = counts.values[c] > out.delta ? 1.0 : 0.0;
    return out;
}

HistogramFeature spatial_pyramid(const LabelMap& labels, int num_classes) {
    const int h = labels.height();
    const int w = labels.width();
    if (h < 2 || w < 2) throw ValidationError("spatial_pyramid needs at least a 2x2 image");
    const int my = h / 2;
    const int mx = w / 2;
    const BoundingBox blocks[5] = {
        {0, 0, w, h},     // full image
        {0, 0, mx, my},   // top-left
        {mx, 0, w, my},   // top-right
        {0, my, mx, h},   // bottom-left
        {mx, my, w, h},   // bottom-right
    };
    HistogramFeature out;
    out.normalized = true;
    out.values.reserve(static_cast<std::size_t>(num_classes) * 5);
    for (const BoundingBox& block : blocks) {
        const HistogramFeature part = l2_normalize(class_histogram(labels, num_classes, block));
        out.values.insert(out.values.end(), part.values.begin(), part.values.end());
    }
    return out;
}

}  // namespace pxs
