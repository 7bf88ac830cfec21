#pragma once

// Shared fixtures and independent reference implementations used as oracles.
// Everything here is deliberately written as the most literal possible
// translation of the definitions (nested loops, recursion, explicit sets),
// separate from the library's code paths.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iterator>
#include <limits>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pixelscene/common.hpp"
#include "pixelscene/grid.hpp"
#include "pixelscene/metrics.hpp"

namespace testutil {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("pixelscene_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline pxs::LabelMap random_label_map(pxs::Rng& rng, int h, int w, int num_classes,
                                      double ignore_fraction = 0.0) {
    pxs::LabelMap map(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (ignore_fraction > 0.0 && rng.next_real01() < ignore_fraction)
                map.set(y, x, pxs::kIgnoreLabel);
            else
                map.set(y, x, static_cast<std::uint8_t>(rng.next_below(num_classes)));
        }
    return map;
}

inline pxs::ScoreMap random_score_map(pxs::Rng& rng, int h, int w, int c, double lo = -2.0,
                                      double hi = 2.0) {
    pxs::ScoreMap map(h, w, c);
    for (double& v : map.data()) v = static_cast<double>(static_cast<float>(rng.next_real(lo, hi)));
    return map;
}

// --- connected components, recursive flood fill ---------------------------

inline void flood_fill(const std::vector<std::uint8_t>& mask, int h, int w, int y, int x,
                       int id, std::vector<int>& labels, bool eight_connected) {
    labels[static_cast<std::size_t>(y) * w + x] = id;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            if (!eight_connected && dy != 0 && dx != 0) continue;
            const int ny = y + dy;
            const int nx = x + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
            if (!mask[ni] || labels[ni] >= 0) continue;
            flood_fill(mask, h, w, ny, nx, id, labels, eight_connected);
        }
    }
}

// Returns per-pixel component ids (-1 where mask is 0), ids in scan order.
inline std::vector<int> components_oracle(const std::vector<std::uint8_t>& mask, int h, int w,
                                          bool eight_connected = true) {
    std::vector<int> labels(mask.size(), -1);
    int next = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (mask[i] && labels[i] < 0) flood_fill(mask, h, w, y, x, next++, labels, eight_connected);
        }
    return labels;
}

// --- PASCAL 11-point AP, literal reference ---------------------------------

struct OracleDetection {
    double score;
    int image_index;
    int box_order;
    pxs::BoundingBox box;
};

inline double iou_oracle(const pxs::BoundingBox& a, const pxs::BoundingBox& b) {
    // integer pixel membership count, the slow way
    long long inter = 0, uni = 0;
    const int x0 = std::min(a.x0, b.x0), x1 = std::max(a.x1, b.x1);
    const int y0 = std::min(a.y0, b.y0), y1 = std::max(a.y1, b.y1);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const bool in_a = x >= a.x0 && x < a.x1 && y >= a.y0 && y < a.y1;
            const bool in_b = x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1;
            if (in_a && in_b) ++inter;
            if (in_a || in_b) ++uni;
        }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

inline double ap_oracle(std::vector<OracleDetection> dets,
                        const std::vector<std::vector<pxs::BoundingBox>>& gt) {
    long long npos = 0;
    for (const auto& boxes : gt) npos += static_cast<long long>(boxes.size());

    std::stable_sort(dets.begin(), dets.end(), [](const OracleDetection& a,
                                                  const OracleDetection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_index != b.image_index) return a.image_index < b.image_index;
        return a.box_order < b.box_order;
    });

    std::vector<std::vector<bool>> used(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) used[i].assign(gt[i].size(), false);

    std::vector<bool> tp(dets.size(), false);
    for (std::size_t d = 0; d < dets.size(); ++d) {
        double best_iou = 0.0;
        int best = -1;
        const auto& boxes = gt[dets[d].image_index];
        for (std::size_t j = 0; j < boxes.size(); ++j) {
            if (used[dets[d].image_index][j]) continue;
            const double iou = iou_oracle(dets[d].box, boxes[j]);
            if (iou > best_iou) {
                best_iou = iou;
                best = static_cast<int>(j);
            }
        }
        if (best >= 0 && best_iou >= 0.5) {
            tp[d] = true;
            used[dets[d].image_index][best] = true;
        }
    }

    double ap = 0.0;
    for (int level = 0; level <= 10; ++level) {
        const double r = level / 10.0;
        double best_precision = 0.0;
        long long cum_tp = 0;
        for (std::size_t d = 0; d < dets.size(); ++d) {
            if (tp[d]) ++cum_tp;
            const double recall = static_cast<double>(cum_tp) / static_cast<double>(npos);
            const double precision = static_cast<double>(cum_tp) / static_cast<double>(d + 1);
            if (recall >= r) best_precision = std::max(best_precision, precision);
        }
        ap += best_precision;
    }
    return ap / 11.0;
}

// --- segmentation metrics via explicit pixel sets --------------------------

struct SegOracle {
    double pixel_acc;
    double mean_class_acc;
    double mean_iou;
    std::vector<double> iou;  // NaN when class absent from gt and pred
};

inline SegOracle seg_oracle(const std::vector<pxs::LabelMap>& gt,
                            const std::vector<pxs::LabelMap>& pred, int num_classes) {
    using Pixel = std::tuple<int, int, int>;  // (image, y, x)
    std::vector<std::set<Pixel>> gt_sets(num_classes), pred_sets(num_classes);
    long long total = 0, correct = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        for (int y = 0; y < gt[i].height(); ++y) {
            for (int x = 0; x < gt[i].width(); ++x) {
                const std::uint8_t g = gt[i].at(y, x);
                if (g == pxs::kIgnoreLabel) continue;
                const std::uint8_t p = pred[i].at(y, x);
                gt_sets[g].insert({static_cast<int>(i), y, x});
                pred_sets[p].insert({static_cast<int>(i), y, x});
                ++total;
                if (g == p) ++correct;
            }
        }
    }
    SegOracle out;
    out.pixel_acc = static_cast<double>(correct) / static_cast<double>(total);
    out.iou.assign(num_classes, std::numeric_limits<double>::quiet_NaN());
    double acc_sum = 0.0;
    int acc_n = 0;
    double iou_sum = 0.0;
    int iou_n = 0;
    for (int c = 0; c < num_classes; ++c) {
        std::set<Pixel> inter;
        std::set_intersection(gt_sets[c].begin(), gt_sets[c].end(), pred_sets[c].begin(),
                              pred_sets[c].end(), std::inserter(inter, inter.begin()));
        std::set<Pixel> uni;
        std::set_union(gt_sets[c].begin(), gt_sets[c].end(), pred_sets[c].begin(),
                       pred_sets[c].end(), std::inserter(uni, uni.begin()));
        if (!gt_sets[c].empty()) {
            acc_sum += static_cast<double>(inter.size()) / static_cast<double>(gt_sets[c].size());
            ++acc_n;
        }
        if (!uni.empty()) {
            out.iou[c] = static_cast<double>(inter.size()) / static_cast<double>(uni.size());
            iou_sum += out.iou[c];
            ++iou_n;
        }
    }
    out.mean_class_acc = acc_n ? acc_sum / acc_n : 0.0;
    out.mean_iou = iou_n ? iou_sum / iou_n : 0.0;
    return out;
}

// --- symmetric eigenvalues (Jacobi rotations) ------------------------------

inline std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-18) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
    return eig;
}

// --- hinge-loss dual reference solver (projected gradient) -----------------

// min_a 1/2 a'Qa - e'a over [0, C]^n; fixed small steps, many iterations.
inline double dual_qp_oracle(const std::vector<std::vector<double>>& q, double c, int iters) {
    const std::size_t n = q.size();
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::fabs(q[i][j]);
        lipschitz = std::max(lipschitz, row);
    }
    const double step = 1.0 / std::max(lipschitz, 1.0);
    std::vector<double> alpha(n, 0.0), grad(n, 0.0);
    for (int it = 0; it < iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = -1.0;
            for (std::size_t j = 0; j < n; ++j) grad[i] += q[i][j] * alpha[j];
        }
        for (std::size_t i = 0; i < n; ++i)
            alpha[i] = std::clamp(alpha[i] - step * grad[i], 0.0, c);
    }
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        objective -= alpha[i];
        for (std::size_t j = 0; j < n; ++j) objective += 0.5 * alpha[i] * q[i][j] * alpha[j];
    }
    return objective;
}

}  // namespace testutil
