#pragma once

#include <optional>
#include <vector>

#include "pixelscene/detect.hpp"
#include "pixelscene/grid.hpp"

namespace pxs {

// C x C counts, entry (gt, pred); ignore pixels are never accumulated.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes);

    void accumulate(const LabelMap& gt, const LabelMap& pred);
    void merge(const ConfusionMatrix& other);

    int num_classes() const { return num_classes_; }
    long long at(int gt, int pred) const {
        return counts_[static_cast<std::size_t>(gt) * num_classes_ + pred];
    }
    long long total() const;
    long long trace() const;

private:
    int num_classes_ = 0;
    std::vector<long long> counts_;
};

struct SegMetrics {
    double pixel_accuracy = 0.0;
    double mean_class_accuracy = 0.0;
    double mean_iou = 0.0;
    std::vector<double> class_iou;        // indexed by class, NaN when undefined
    std::vector<bool> class_in_gt;        // class has >= 1 GT pixel
    std::vector<bool> class_evaluated;    // class present in GT or predictions
    ConfusionMatrix confusion;
};

// Whole-set metrics accumulated through one confusion matrix. Class accuracy
// averages over classes with GT pixels; IoU averages over classes present in
// GT or predictions.
SegMetrics seg_metrics(const std::vector<LabelMap>& gt, const std::vector<LabelMap>& pred,
                       int num_classes);

double scene_accuracy(const std::vector<int>& gt, const std::vector<int>& pred);

// Intersection over union of half-open boxes.
double box_iou(const BoundingBox& a, const BoundingBox& b);

// One ranked detection for AP evaluation; (image_index, box_order) breaks
// score ties deterministically.
struct RankedDetection {
    double score = 0.0;
    int image_index = 0;
    int box_order = 0;
    BoundingBox box;
};

struct PrCurve {
    std::vector<double> scores;      // ranked
    std::vector<bool> is_true_positive;
    long long num_ground_truth = 0;
    std::vector<double> precision;   // cumulative, per rank
    std::vector<double> recall;
    double ap = 0.0;
};

// PASCAL 11-point interpolated AP at IoU >= 0.5. Detections are ranked by
// descending score; each greedily takes the highest-IoU unmatched GT box of
// its image; duplicates count as false positives. Throws when the class has
// no ground-truth boxes (AP undefined).
PrCurve average_precision(std::vector<RankedDetection> detections,
                          const std::vector<std::vector<BoundingBox>>& gt_boxes_per_image);

// Arithmetic mean over classes whose AP is defined.
double mean_ap(const std::vector<std::optional<double>>& per_class_ap);

}  // namespace pxs
