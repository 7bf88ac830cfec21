#include "pixelscene/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pxs {

ConfusionMatrix::ConfusionMatrix(int num_classes) : num_classes_(num_classes) {
    if (num_classes < 1) throw ValidationError("ConfusionMatrix needs at least one class");
    counts_.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
}

void ConfusionMatrix::accumulate(const LabelMap& gt, const LabelMap& pred) {
    if (gt.height() != pred.height() || gt.width() != pred.width())
        throw ValidationError("confusion accumulate: dimension mismatch");
    for (std::size_t i = 0; i < gt.data().size(); ++i) {
        const std::uint8_t g = gt.data()[i];
        if (g == kIgnoreLabel) continue;
        const std::uint8_t p = pred.data()[i];
        if (g >= num_classes_ || p >= num_classes_)
            throw ValidationError("confusion accumulate: label out of range");
        ++counts_[static_cast<std::size_t>(g) * num_classes_ + p];
    }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.num_classes_ != num_classes_)
        throw ValidationError("confusion merge: class count mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (const long long v : counts_) t += v;
    return t;
}

long long ConfusionMatrix::trace() const {
    long long t = 0;
    for (int c = 0; c < num_classes_; ++c) t += at(c, c);
    return t;
}

SegMetrics seg_metrics(const std::vector<LabelMap>& gt, const std::vector<LabelMap>& pred,
                       int num_classes) {
    if (gt.size() != pred.size() || gt.empty())
        throw ValidationError("seg_metrics: need equally many gt and predicted maps");
    ConfusionMatrix m(num_classes);
    for (std::size_t i = 0; i < gt.size(); ++i) m.accumulate(gt[i], pred[i]);

    const long long total = m.total();
    if (total == 0) throw ValidationError("seg_metrics: no annotated pixels");

    SegMetrics out{.confusion = m};
    out.pixel_accuracy = static_cast<double>(m.trace()) / static_cast<double>(total);

    out.class_iou.assign(num_classes, std::numeric_limits<double>::quiet_NaN());
    out.class_in_gt.assign(num_classes, false);
    out.class_evaluated.assign(num_classes, false);

    double acc_sum = 0.0;
    int acc_classes = 0;
    double iou_sum = 0.0;
    int iou_classes = 0;
    for (int c = 0; c < num_classes; ++c) {
        long long gt_row = 0, pred_col = 0;
        for (int k = 0; k < num_classes; ++k) {
            gt_row += m.at(c, k);
            pred_col += m.at(k, c);
        }
        if (gt_row > 0) {
            out.class_in_gt[c] = true;
            acc_sum += static_cast<double>(m.at(c, c)) / static_cast<double>(gt_row);
            ++acc_classes;
        }
        const long long union_count = gt_row + pred_col - m.at(c, c);
        if (union_count > 0) {
            out.class_evaluated[c] = true;
            out.class_iou[c] = static_cast<double>(m.at(c, c)) / static_cast<double>(union_count);
            iou_sum += out.class_iou[c];
            ++iou_classes;
        }
    }
    out.mean_class_accuracy = acc_classes > 0 ? acc_sum / acc_classes : 0.0;
    out.mean_iou = iou_classes > 0 ? iou_sum / iou_classes : 0.0;
    return out;
}

double scene_accuracy(const std::vector<int>& gt, const std::vector<int>& pred) {
    if (gt.empty() || gt.size() != pred.size())
        throw ValidationError("scene_accuracy: need equally many non-empty label lists");
    long long hits = 0;
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (gt[i] == pred[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    if (!a.valid() || !b.valid()) throw ValidationError("box_iou: degenerate box");
    const long long ix0 = std::max(a.x0, b.x0);
    const long long iy0 = std::max(a.y0, b.y0);
    const long long ix1 = std::min(a.x1, b.x1);
    const long long iy1 = std::min(a.y1, b.y1);
    const long long inter =
        ix1 > ix0 && iy1 > iy0 ? (ix1 - ix0) * (iy1 - iy0) : 0;
    const long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

PrCurve average_precision(std::vector<RankedDetection> detections,
                          const std::vector<std::vector<BoundingBox>>& gt_boxes_per_image) {
    long long num_gt = 0;
    for (const auto& boxes : gt_boxes_per_image) num_gt += static_cast<long long>(boxes.size());
    if (num_gt == 0) throw ValidationError("average_precision: no ground-truth boxes");

    std::stable_sort(detections.begin(), detections.end(),
                     [](const RankedDetection& a, const RankedDetection& b) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.image_index != b.image_index) return a.image_index < b.image_index;
                         return a.box_order < b.box_order;
                     });

    std::vector<std::vector<bool>> matched(gt_boxes_per_image.size());
    for (std::size_t i = 0; i < matched.size(); ++i)
        matched[i].assign(gt_boxes_per_image[i].size(), false);

    PrCurve curve;
    curve.num_ground_truth = num_gt;
    long long tp = 0;
    for (std::size_t rank = 0; rank < detections.size(); ++rank) {
        const RankedDetection& det = detections[rank];
        if (det.image_index < 0 ||
            det.image_index >= static_cast<int>(gt_boxes_per_image.size()))
            throw ValidationError("average_precision: detection image index out of range");
        const auto& gts = gt_boxes_per_image[det.image_index];
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t j = 0; j < gts.size(); ++j) {
            if (matched[det.image_index][j]) continue;
            const double iou = box_iou(det.box, gts[j]);
            if (iou > best_iou) {
                best_iou = iou;
                best = static_cast<int>(j);
            }
        }
        const bool is_tp = best >= 0 && best_iou >= 0.5;
        if (is_tp) {
            matched[det.image_index][best] = true;
            ++tp;
        }
        curve.scores.push_back(det.score);
        curve.is_true_positive.push_back(is_tp);
        curve.precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
        curve.recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    }

    // Interpolated precision: running max of precision over recall >= r,
    // evaluated at the 11 recall levels; levels never reached give 0.
    double ap = 0.0;
    for (int level = 0; level <= 10; ++level) {
        const double r = level / 10.0;
        double p_interp = 0.0;
        for (std::size_t k = 0; k < curve.precision.size(); ++k)
            if (curve.recall[k] >= r) p_interp = std::max(p_interp, curve.precision[k]);
        ap += p_interp;
    }
    curve.ap = ap / 11.0;
    return curve;
}

double mean_ap(const std::vector<std::optional<double>>& per_class_ap) {
    double sum = 0.0;
    int count = 0;
    for (const auto& ap : per_class_ap) {
        if (!ap.has_value()) continue;
        sum += *ap;
        ++count;
    }
    if (count == 0) throw ValidationError("mean_ap: no class has a defined AP");
    return sum / count;
}

}  // namespace pxs
