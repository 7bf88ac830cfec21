#pragma once

#include <optional>
#include <vector>

#include "pixelscene/grid.hpp"

namespace pxs {

// Class-count histogram (raw) or its L2-normalized form; pyramid descriptors
// are the 5C concatenation of per-block normalized histograms.
struct HistogramFeature {
    std::vector<double> values;
    bool normalized = false;
};

// Per-class presence bits from thresholding raw pixel counts at delta.
struct OneHotFeature {
    std::vector<double> bits;  // each 0.0 or 1.0
    double delta = 0.0;
};

// f_c = number of pixels labeled c inside region (whole image when absent);
// ignore pixels are never counted.
HistogramFeature class_histogram(const LabelMap& labels, int num_classes,
                                 const std::optional<BoundingBox>& region = std::nullopt);

// f / ||f||2; the all-zero vector is left untouched.
HistogramFeature l2_normalize(const HistogramFeature& feature);

// bit_c = 1 iff raw count strictly exceeds delta = delta_fraction * H * W
// (total pixels, ignored ones included).
OneHotFeature one_hot(const LabelMap& labels, int num_classes, double delta_fraction = 0.005);

// [full, top-left, top-right, bottom-left, bottom-right], each block
// independently L2-normalized; quadrants split at floor(H/2), floor(W/2)
// with the extra row/column going to the bottom/right blocks.
HistogramFeature spatial_pyramid(const LabelMap& labels, int num_classes);

}  // namespace pxs
