#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pixelscene/grid.hpp"

namespace pxs {

struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;  // 0 or 1, row-major

    static BinaryMask from_labels(const LabelMap& labels, int class_id);
    std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

struct ConnectedComponent {
    std::vector<std::pair<int, int>> pixels;  // (y, x), sorted row-major
    BoundingBox box;                          // tight: every side touches a pixel
};

// 8-connected components of the set pixels; returned in order of each
// component's first pixel in row-major scan.
std::vector<ConnectedComponent> connected_components(const BinaryMask& mask);

struct Detection {
    int class_id = 0;
    BoundingBox box;
    double score = 0.0;
    long long pixel_count = 0;  // label-c pixels inside the box

    bool operator==(const Detection&) const = default;
};

// One detection per connected component of each requested class. The score
// averages confidence(., c) over the label-c pixels inside the tight box —
// which can include pixels of another component of the same class when boxes
// overlap. min_area drops components smaller than that many pixels.
std::vector<Detection> detect_objects(const LabelMap& labels, const ScoreMap& confidences,
                                      const std::vector<int>& object_classes, int min_area = 0);

}  // namespace pxs
