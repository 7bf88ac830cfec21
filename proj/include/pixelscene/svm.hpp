#pragma once

#include <span>
#include <string>
#include <vector>

#include "pixelscene/common.hpp"

namespace pxs {

enum class KernelKind { kLinear, kIntersection, kChi2, kJensenShannon };

KernelKind kernel_from_name(const std::string& name);
std::string kernel_name(KernelKind kind);

// chi2 and jensen_shannon are only defined on non-negative vectors
bool kernel_requires_nonneg(KernelKind kind);

// linear: sum x*y; intersection: sum min(x,y); chi2: sum 2xy/(x+y) with 0/0
// terms dropped; jensen_shannon: sum of x/2*log2((x+y)/x) + y/2*log2((x+y)/y)
// with zero-argument terms dropped.
double kernel_eval(KernelKind kind, std::span<const double> x, std::span<const double> y);

struct SvmTrainOptions {
    double C = 1.0;
    double tol = 1e-4;
    int max_epochs = 1000;
};

// One one-vs-rest binary classifier. Linear models keep an explicit weight
// vector; kernel models keep dual coefficients (alpha_i * y_i) with indices
// into the shared support-vector pool.
struct BinaryClassifier {
    double bias = 0.0;
    std::vector<double> weights;
    std::vector<double> dual_coefs;
    std::vector<int> support_indices;
};

struct ClassTrainInfo {
    int epochs = 0;
    double final_violation = 0.0;
    std::vector<double> epoch_objectives;  // dual objective after each full pass
};

struct SvmModel {
    KernelKind kernel = KernelKind::kLinear;
    int num_classes = 0;
    int dim = 0;  // raw feature length, before bias augmentation
    double C = 1.0;
    std::vector<BinaryClassifier> classifiers;
    std::vector<std::vector<double>> support_vectors;  // shared pool, raw features
    std::vector<ClassTrainInfo> train_info;            // not serialized
};

// One-vs-rest SVMs solved by dual coordinate descent over alpha in [0, C]^n;
// the bias rides along as a constant-1 feature coordinate. Labels must be
// 0..M-1 with at least two distinct values present.
SvmModel train_svm(const std::vector<std::vector<double>>& features,
                   const std::vector<int>& labels, KernelKind kernel,
                   const SvmTrainOptions& options = {});

struct SvmPrediction {
    int class_id = 0;
    std::vector<double> decision_values;
};

// argmax of per-class decision values, ties to the lowest class id
SvmPrediction predict(const SvmModel& model, std::span<const double> feature);

// k-fold cross-validated C selection over a log grid (default {0.01..100});
// returns the grid value with the best mean held-out accuracy, earlier grid
// entries winning ties. Folds are contiguous index ranges, deterministic.
double select_c_kfold(const std::vector<std::vector<double>>& features,
                      const std::vector<int>& labels, KernelKind kernel, int folds = 5,
                      const std::vector<double>& grid = {0.01, 0.1, 1.0, 10.0, 100.0},
                      double tol = 1e-4);

void save_model(const std::string& path, const SvmModel& model);
SvmModel load_model(const std::string& path);

}  // namespace pxs
