#pragma once

#include <optional>
#include <vector>

#include "pixelscene/detect.hpp"
#include "pixelscene/grid.hpp"
#include "pixelscene/image.hpp"

namespace pxs {

// Paint each class its palette color (ignore pixels black); optionally
// alpha-blend at 0.5 over a base image of the same size.
Image render_labels(const LabelMap& labels, const ClassPalette& palette,
                    const Image* base = nullptr);

// 1-pixel box outlines: ground truth green, predictions blue, drawn in that
// order so predictions win on overlap. Out-of-bounds boxes are clamped with
// a warning on stderr.
Image render_detections(const Image& image, const std::vector<Detection>& detections,
                        const std::optional<std::vector<BoundingBox>>& gt_boxes = std::nullopt);

}  // namespace pxs
