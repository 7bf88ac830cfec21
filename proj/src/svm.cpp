#include "pixelscene/svm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "pixelscene/io.hpp"

namespace pxs {

KernelKind kernel_from_name(const std::string& name) {
    if (name == "linear") return KernelKind::kLinear;
    if (name == "intersection") return KernelKind::kIntersection;
    if (name == "chi2") return KernelKind::kChi2;
    if (name == "jensen_shannon") return KernelKind::kJensenShannon;
    throw ValidationError("unknown kernel: " + name);
}

std::string kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::kLinear: return "linear";
        case KernelKind::kIntersection: return "intersection";
        case KernelKind::kChi2: return "chi2";
        case KernelKind::kJensenShannon: return "jensen_shannon";
    }
    throw InternalError("bad kernel kind");
}

bool kernel_requires_nonneg(KernelKind kind) {
    return kind == KernelKind::kChi2 || kind == KernelKind::kJensenShannon;
}

namespace {

void check_domain(KernelKind kind, std::span<const double> v) {
    if (!kernel_requires_nonneg(kind)) return;
    for (const double x : v)
        if (x < 0.0)
            throw ValidationError(kernel_name(kind) + " kernel requires non-negative features");
}

constexpr double kLog2e = 1.4426950408889634073599246810019;  // 1/ln(2)

}  // namespace

double kernel_eval(KernelKind kind, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("kernel_eval: length mismatch");
    check_domain(kind, x);
    check_domain(kind, y);
    double sum = 0.0;
    switch (kind) {
        case KernelKind::kLinear:
            for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
            return sum;
        case KernelKind::kIntersection:
            for (std::size_t i = 0; i < x.size(); ++i) sum += std::min(x[i], y[i]);
            return sum;
        case KernelKind::kChi2:
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] + y[i];
                if (d > 0.0) sum += 2.0 * x[i] * y[i] / d;
            }
            return sum;
        case KernelKind::kJensenShannon:
            for (std::size_t i = 0; i < x.size(); ++i) {
                // evaluate in (min, max) order so k(x,y) == k(y,x) bit-exactly
                const double a = std::min(x[i], y[i]);
                const double b = std::max(x[i], y[i]);
                const double s = a + b;
                double term = 0.0;
                if (a > 0.0) term += 0.5 * a * std::log(s / a) * kLog2e;
                if (b > 0.0) term += 0.5 * b * std::log(s / b) * kLog2e;
                sum += term;
            }
            return sum;
    }
    throw InternalError("bad kernel kind");
}

namespace {

// L1-hinge dual for one binary problem: min_a 1/2 a'Qa - e'a, 0 <= a <= C,
// Q_ij = y_i y_j K~(x_i, x_j) on bias-augmented features. Exact coordinate
// minimization, sweeping i = 0..n-1 until the worst projected gradient over a
// full pass drops below tol.
struct DualResult {
    std::vector<double> alpha;
    ClassTrainInfo info;
};

DualResult solve_dual(const std::vector<std::vector<double>>* gram,  // K~ rows (kernel path)
                      const std::vector<std::vector<double>>* features,  // raw rows (linear path)
                      const std::vector<double>& diag, const std::vector<int8_t>& y,
                      const SvmTrainOptions& opt, std::vector<double>* w_out) {
    const std::size_t n = y.size();
    DualResult res;
    res.alpha.assign(n, 0.0);

    // The linear path keeps the augmented primal weights w (O(d) gradient);
    // the kernel path keeps qalpha_i = (Q alpha)_i = y_i sum_j a_j y_j K~_ij.
    std::vector<double> qalpha;
    std::vector<double> w;
    const bool linear = features != nullptr;
    if (linear)
        w.assign(features->front().size() + 1, 0.0);
    else
        qalpha.assign(n, 0.0);

    const auto gradient = [&](std::size_t i) {
        if (!linear) return qalpha[i] - 1.0;
        double d = w.back();  // bias coordinate
        const auto& xi = (*features)[i];
        for (std::size_t k = 0; k < xi.size(); ++k) d += w[k] * xi[k];
        return y[i] * d - 1.0;
    };

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double grad = gradient(i);
            double projected = grad;
            if (res.alpha[i] <= 0.0)
                projected = std::min(grad, 0.0);
            else if (res.alpha[i] >= opt.C)
                projected = std::max(grad, 0.0);
            worst = std::max(worst, std::fabs(projected));
            if (projected == 0.0) continue;

            const double old = res.alpha[i];
            const double curvature = std::max(diag[i], 1e-12);
            const double next = std::clamp(old - grad / curvature, 0.0, opt.C);
            const double delta = next - old;
            if (delta == 0.0) continue;
            res.alpha[i] = next;
            if (linear) {
                const auto& xi = (*features)[i];
                const double step = delta * y[i];
                for (std::size_t k = 0; k < xi.size(); ++k) w[k] += step * xi[k];
                w.back() += step;
            } else {
                const auto& row = (*gram)[i];
                for (std::size_t j = 0; j < n; ++j)
                    qalpha[j] += delta * y[i] * y[j] * row[j];
            }
        }

        // D(alpha) = 1/2 a'Qa - e'a, written through (Qa)_i = grad_i + 1
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            objective += res.alpha[i] * (0.5 * (gradient(i) + 1.0) - 1.0);
        res.info.epoch_objectives.push_back(objective);
        res.info.epochs = epoch + 1;
        res.info.final_violation = worst;
        if (worst < opt.tol) break;
    }
    if (w_out) *w_out = std::move(w);
    return res;
}

}  // namespace

SvmModel train_svm(const std::vector<std::vector<double>>& features,
                   const std::vector<int>& labels, KernelKind kernel,
                   const SvmTrainOptions& options) {
    if (features.empty() || features.size() != labels.size())
        throw ValidationError("train_svm: need one label per feature vector");
    const std::size_t dim = features.front().size();
    int max_label = 0;
    for (const int l : labels) {
        if (l < 0) throw ValidationError("train_svm: negative class id");
        max_label = std::max(max_label, l);
    }
    const int num_classes = max_label + 1;
    {
        std::vector<bool> seen(num_classes, false);
        for (const int l : labels) seen[l] = true;
        int distinct = 0;
        for (const bool s : seen) distinct += s ? 1 : 0;
        if (distinct < 2) throw ValidationError("train_svm: need at least two distinct classes");
    }
    for (const auto& f : features) {
        if (f.size() != dim) throw ValidationError("train_svm: inconsistent feature lengths");
        for (const double v : f)
            if (!std::isfinite(v)) throw ValidationError("train_svm: non-finite feature value");
        check_domain(kernel, f);
    }

    const std::size_t n = features.size();
    const bool linear = kernel == KernelKind::kLinear;

    // Bias augmentation adds exactly +1 to every kernel entry: all four
    // kernels map the (1, 1) coordinate pair to 1.
    std::vector<std::vector<double>> gram;
    std::vector<double> diag(n, 0.0);
    if (linear) {
        for (std::size_t i = 0; i < n; ++i)
            diag[i] = kernel_eval(kernel, features[i], features[i]) + 1.0;
    } else {
        gram.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double k = kernel_eval(kernel, features[i], features[j]) + 1.0;
                gram[i][j] = k;
                gram[j][i] = k;
            }
            diag[i] = gram[i][i];
        }
    }

    SvmModel model;
    model.kernel = kernel;
    model.num_classes = num_classes;
    model.dim = static_cast<int>(dim);
    model.C = options.C;
    model.classifiers.resize(num_classes);
    model.train_info.resize(num_classes);

    std::map<std::size_t, int> pool_index;  // sample index -> support pool slot
    for (int m = 0; m < num_classes; ++m) {
        std::vector<int8_t> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == m ? 1 : -1;

        std::vector<double> w;
        DualResult dual = solve_dual(linear ? nullptr : &gram, linear ? &features : nullptr,
                                     diag, y, options, linear ? &w : nullptr);
        model.train_info[m] = std::move(dual.info);

        BinaryClassifier& cls = model.classifiers[m];
        if (linear) {
            cls.bias = w.back();
            w.pop_back();
            cls.weights = std::move(w);
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                if (dual.alpha[i] == 0.0) continue;
                auto [it, inserted] =
                    pool_index.try_emplace(i, static_cast<int>(model.support_vectors.size()));
                if (inserted) model.support_vectors.push_back(features[i]);
                cls.dual_coefs.push_back(dual.alpha[i] * y[i]);
                cls.support_indices.push_back(it->second);
                cls.bias += dual.alpha[i] * y[i];  // augmented coordinate contribution
            }
        }
    }
    return model;
}

SvmPrediction predict(const SvmModel& model, std::span<const double> feature) {
    if (static_cast<int>(feature.size()) != model.dim)
        throw ValidationError("predict: feature length " + std::to_string(feature.size()) +
                              " does not match model dim " + std::to_string(model.dim));
    check_domain(model.kernel, feature);

    SvmPrediction out;
    out.decision_values.reserve(model.classifiers.size());
    for (const BinaryClassifier& cls : model.classifiers) {
        double d = cls.bias;
        if (model.kernel == KernelKind::kLinear) {
            for (std::size_t k = 0; k < cls.weights.size(); ++k) d += cls.weights[k] * feature[k];
        } else {
            for (std::size_t s = 0; s < cls.dual_coefs.size(); ++s)
                d += cls.dual_coefs[s] *
                     kernel_eval(model.kernel, model.support_vectors[cls.support_indices[s]],
                                 feature);
        }
        out.decision_values.push_back(d);
    }
    out.class_id = 0;
    for (int m = 1; m < static_cast<int>(out.decision_values.size()); ++m)
        if (out.decision_values[m] > out.decision_values[out.class_id]) out.class_id = m;
    return out;
}

double select_c_kfold(const std::vector<std::vector<double>>& features,
                      const std::vector<int>& labels, KernelKind kernel, int folds,
                      const std::vector<double>& grid, double tol) {
    if (folds < 2) throw ValidationError("select_c_kfold: need at least 2 folds");
    if (grid.empty()) throw ValidationError("select_c_kfold: empty grid");
    const std::size_t n = features.size();
    if (n < static_cast<std::size_t>(folds))
        throw ValidationError("select_c_kfold: fewer samples than folds");

    double best_c = grid.front();
    double best_accuracy = -1.0;
    for (const double c : grid) {
        long long hits = 0, total = 0;
        for (int fold = 0; fold < folds; ++fold) {
            const std::size_t lo = n * fold / folds;
            const std::size_t hi = n * (fold + 1) / folds;
            std::vector<std::vector<double>> train_x;
            std::vector<int> train_y;
            for (std::size_t i = 0; i < n; ++i) {
                if (i >= lo && i < hi) continue;
                train_x.push_back(features[i]);
                train_y.push_back(labels[i]);
            }
            std::set<int> distinct(train_y.begin(), train_y.end());
            if (distinct.size() < 2) continue;  // degenerate fold, skip
            SvmTrainOptions options;
            options.C = c;
            options.tol = tol;
            const SvmModel model = train_svm(train_x, train_y, kernel, options);
            for (std::size_t i = lo; i < hi; ++i) {
                // held-out labels beyond the model's range can never match
                if (labels[i] < model.num_classes &&
                    predict(model, features[i]).class_id == labels[i])
                    ++hits;
                ++total;
            }
        }
        if (total == 0) continue;
        const double accuracy = static_cast<double>(hits) / static_cast<double>(total);
        if (accuracy > best_accuracy) {
            best_accuracy = accuracy;
            best_c = c;
        }
    }
    if (best_accuracy < 0.0) throw ValidationError("select_c_kfold: no valid fold split");
    return best_c;
}

void save_model(const std::string& path, const SvmModel& model) {
    std::string out = "PXSVM 1 " + kernel_name(model.kernel) + " " +
                      std::to_string(model.num_classes) + " " + std::to_string(model.dim) + " " +
                      format_double(model.C) + "\n";
    if (model.kernel == KernelKind::kLinear) {
        for (const BinaryClassifier& cls : model.classifiers) {
            out += format_double(cls.bias);
            for (const double w : cls.weights) {
                out += ' ';
                out += format_double(w);
            }
            out += '\n';
        }
    } else {
        for (const BinaryClassifier& cls : model.classifiers) {
            out += "class " + format_double(cls.bias) + " " +
                   std::to_string(cls.dual_coefs.size()) + "\n";
            for (std::size_t s = 0; s < cls.dual_coefs.size(); ++s)
                out += format_double(cls.dual_coefs[s]) + " " +
                       std::to_string(cls.support_indices[s]) + "\n";
        }
        out += "vectors " + std::to_string(model.support_vectors.size()) + " " +
               std::to_string(model.dim) + "\n";
        for (const auto& sv : model.support_vectors) {
            for (std::size_t k = 0; k < sv.size(); ++k) {
                if (k > 0) out += ' ';
                out += format_double(sv[k]);
            }
            out += '\n';
        }
    }
    write_text_file(path, out);
}

namespace {

std::string next_line(std::istringstream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("truncated SVM model file: " + path);
    return line;
}

}  // namespace

SvmModel load_model(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::istringstream header(next_line(in, path));
    std::string magic, kernel;
    int version = 0, num_classes = 0, dim = 0;
    double c = 0.0;
    if (!(header >> magic >> version >> kernel >> num_classes >> dim >> c) || magic != "PXSVM")
        throw ValidationError("malformed SVM model header in " + path);
    if (version != 1) throw ValidationError("unsupported SVM model version in " + path);
    if (num_classes < 2 || dim < 1) throw ValidationError("invalid SVM model header in " + path);

    SvmModel model;
    model.kernel = kernel_from_name(kernel);
    model.num_classes = num_classes;
    model.dim = dim;
    model.C = c;
    model.classifiers.resize(num_classes);
    model.train_info.resize(num_classes);

    if (model.kernel == KernelKind::kLinear) {
        for (BinaryClassifier& cls : model.classifiers) {
            std::istringstream ls(next_line(in, path));
            if (!(ls >> cls.bias)) throw ValidationError("malformed classifier line in " + path);
            cls.weights.resize(dim);
            for (double& w : cls.weights)
                if (!(ls >> w)) throw ValidationError("truncated classifier line in " + path);
        }
        return model;
    }

    for (BinaryClassifier& cls : model.classifiers) {
        std::istringstream ls(next_line(in, path));
        std::string tag;
        std::size_t count = 0;
        if (!(ls >> tag >> cls.bias >> count) || tag != "class")
            throw ValidationError("malformed class block in " + path);
        cls.dual_coefs.resize(count);
        cls.support_indices.resize(count);
        for (std::size_t s = 0; s < count; ++s) {
            std::istringstream cs(next_line(in, path));
            if (!(cs >> cls.dual_coefs[s] >> cls.support_indices[s]))
                throw ValidationError("malformed dual coefficient line in " + path);
        }
    }
    {
        std::istringstream vs(next_line(in, path));
        std::string tag;
        std::size_t count = 0;
        int vdim = 0;
        if (!(vs >> tag >> count >> vdim) || tag != "vectors" || vdim != dim)
            throw ValidationError("malformed support-vector block in " + path);
        model.support_vectors.resize(count, std::vector<double>(dim));
        for (auto& sv : model.support_vectors) {
            std::istringstream ss(next_line(in, path));
            for (double& v : sv)
                if (!(ss >> v)) throw ValidationError("truncated support vector in " + path);
        }
    }
    for (const BinaryClassifier& cls : model.classifiers)
        for (const int idx : cls.support_indices)
            if (idx < 0 || idx >= static_cast<int>(model.support_vectors.size()))
                throw ValidationError("support index out of range in " + path);
    return model;
}

}  // namespace pxs
