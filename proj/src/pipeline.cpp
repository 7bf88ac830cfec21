#include "pixelscene/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>

#include "pixelscene/dataset.hpp"
#include "pixelscene/detect.hpp"
#include "pixelscene/features.hpp"
#include "pixelscene/io.hpp"
#include "pixelscene/labeling.hpp"
#include "pixelscene/metrics.hpp"
#include "pixelscene/svm.hpp"
#include "pixelscene/toynet.hpp"

namespace fs = std::filesystem;

namespace pxs {

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw ValidationError("invalid boolean for " + key + ": " + value);
}

std::vector<double> parse_scales(const std::string& value) {
    std::vector<double> scales;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) scales.push_back(parse_double(item, "scales"));
    if (scales.empty()) throw ValidationError("scales list is empty");
    return scales;
}

}  // namespace

void PipelineConfig::apply(const std::string& key, const std::string& value) {
    if (key == "out") out_dir = value;
    else if (key == "data") data_dir = value;
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "image_size") image_size = static_cast<int>(parse_int(value, key));
    else if (key == "object_classes") num_object_classes = static_cast<int>(parse_int(value, key));
    else if (key == "structure_classes")
        num_structure_classes = static_cast<int>(parse_int(value, key));
    else if (key == "train_count") train_count = static_cast<int>(parse_int(value, key));
    else if (key == "test_count") test_count = static_cast<int>(parse_int(value, key));
    else if (key == "min_objects") min_objects = static_cast<int>(parse_int(value, key));
    else if (key == "max_objects") max_objects = static_cast<int>(parse_int(value, key));
    else if (key == "noise") noise_stddev = parse_double(value, key);
    else if (key == "iters") iterations = static_cast<int>(parse_int(value, key));
    else if (key == "lr") learning_rate = parse_double(value, key);
    else if (key == "power") power = parse_double(value, key);
    else if (key == "momentum") momentum = parse_double(value, key);
    else if (key == "crop") crop_size = static_cast<int>(parse_int(value, key));
    else if (key == "mirror") mirror_probability = parse_double(value, key);
    else if (key == "hidden") hidden_channels = static_cast<int>(parse_int(value, key));
    else if (key == "atrous_rate") atrous_rate = static_cast<int>(parse_int(value, key));
    else if (key == "scales") scales = parse_scales(value);
    else if (key == "labels_from_gt") labels_from_gt = parse_bool(value, key);
    else if (key == "scene_variant") scene_variant = value;
    else if (key == "svm_c") svm_c = parse_double(value, key);
    else if (key == "svm_tol") svm_tol = parse_double(value, key);
    else if (key == "kernel") kernel = value;
    else if (key == "onehot_delta") onehot_delta = parse_double(value, key);
    else if (key == "raw_scores") raw_scores = parse_bool(value, key);
    else if (key == "min_area") min_area = static_cast<int>(parse_int(value, key));
    else throw ValidationError("unknown pipeline config key: " + key);
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    PipelineConfig config;
    std::istringstream in(read_text_file(path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        const auto eq = line.find('=', start);
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(line_no) +
                                  " is not key=value: " + line);
        config.apply(line.substr(start, eq - start), line.substr(eq + 1));
    }
    return config;
}

namespace {

struct Paths {
    fs::path out;
    fs::path data;
    fs::path model;
    fs::path loss_trace;
    fs::path pred;
    fs::path features;
    fs::path det;

    explicit Paths(const PipelineConfig& config) : out(config.out_dir) {
        if (config.out_dir.empty()) throw ValidationError("pipeline needs an output directory");
        data = config.data_dir.empty() ? out / "data" : fs::path(config.data_dir);
        model = out / "model.pxck";
        loss_trace = out / "loss.txt";
        pred = out / "pred";
        features = out / "features";
        det = out / "det";
    }

    // artifacts are named by the source image's stem so the standalone
    // eval-det / train-scene commands can consume them directly
    std::string pred_labels(const DatasetManifest& manifest, std::size_t i) const {
        return (pred / manifest.split / (stem(manifest, i) + ".png")).string();
    }
    std::string pred_scores(const DatasetManifest& manifest, std::size_t i) const {
        return (pred / manifest.split / (stem(manifest, i) + ".pxsm")).string();
    }
    std::string feature_file(const DatasetManifest& manifest, const std::string& kind,
                             std::size_t i) const {
        return (features / kind / manifest.split / (stem(manifest, i) + ".feat")).string();
    }
    std::string det_file(const DatasetManifest& manifest, std::size_t i) const {
        return (det / (stem(manifest, i) + ".det")).string();
    }
    static std::string stem(const DatasetManifest& manifest, std::size_t i) {
        return fs::path(manifest.records[i].image_path).stem().string();
    }
    std::string scene_model(const std::string& variant) const {
        return (out / ("scene_" + variant + ".pxsvm")).string();
    }
    std::string scene_pred(const std::string& variant) const {
        return (out / ("scene_pred_" + variant + ".txt")).string();
    }
};

ToyRoomsConfig dataset_config(const PipelineConfig& config) {
    ToyRoomsConfig dc;
    dc.image_size = config.image_size;
    dc.num_object_classes = config.num_object_classes;
    dc.num_structure_classes = config.num_structure_classes;
    dc.min_objects = config.min_objects;
    dc.max_objects = config.max_objects;
    dc.noise_stddev = config.noise_stddev;
    dc.seed = derive_seed(config.seed, "data");
    dc.train_count = config.train_count;
    dc.test_count = config.test_count;
    return dc;
}

DatasetManifest load_split(const Paths& paths, const std::string& split) {
    return load_manifest((paths.data / (split + ".manifest")).string());
}

std::vector<int> object_class_ids(const PipelineConfig& config, const DatasetManifest& manifest) {
    std::vector<int> ids;
    for (int c = config.num_structure_classes; c < manifest.palette.num_classes(); ++c)
        ids.push_back(c);
    return ids;
}

std::vector<std::string> selected_variants(const PipelineConfig& config) {
    if (config.scene_variant == "all") return scene_variants();
    for (const std::string& v : scene_variants())
        if (v == config.scene_variant) return {v};
    throw ValidationError("unknown scene variant: " + config.scene_variant);
}

// Probabilities matching a ground-truth labeling exactly: 1 on the labeled
// class. Ignore pixels get a uniform distribution (they are never read by
// detection and never scored by the metrics).
ScoreMap unit_confidences(const LabelMap& labels, int num_classes) {
    ScoreMap scores(labels.height(), labels.width(), num_classes,
                    1.0 / static_cast<double>(num_classes));
    for (int y = 0; y < labels.height(); ++y) {
        for (int x = 0; x < labels.width(); ++x) {
            const std::uint8_t v = labels.at(y, x);
            if (v == kIgnoreLabel) continue;
            for (int c = 0; c < num_classes; ++c)
                scores.set(y, x, c, c == v ? 1.0 : 0.0);
        }
    }
    return scores;
}

std::vector<double> feature_for(const std::string& kind, const LabelMap& labels, int num_classes,
                                double onehot_delta) {
    if (kind == "hist") return l2_normalize(class_histogram(labels, num_classes)).values;
    if (kind == "onehot") return one_hot(labels, num_classes, onehot_delta).bits;
    if (kind == "pyramid") return spatial_pyramid(labels, num_classes).values;
    throw InternalError("unknown feature kind: " + kind);
}

struct VariantSpec {
    std::string feature_kind;
    KernelKind kernel;
};

VariantSpec variant_spec(const PipelineConfig& config, const std::string& variant) {
    const KernelKind additive = kernel_from_name(config.kernel);
    if (variant == "hist_linear") return {"hist", KernelKind::kLinear};
    if (variant == "onehot_linear") return {"onehot", KernelKind::kLinear};
    if (variant == "hist_kernel") return {"hist", additive};
    if (variant == "pyramid_kernel") return {"pyramid", additive};
    if (variant == "onehot_kernel") return {"onehot", additive};
    throw ValidationError("unknown scene variant: " + variant);
}

void write_detections_file(const std::string& path, const std::vector<Detection>& detections) {
    std::string out;
    for (const Detection& d : detections) {
        out += std::to_string(d.class_id) + " " + std::to_string(d.box.x0) + " " +
               std::to_string(d.box.y0) + " " + std::to_string(d.box.x1) + " " +
               std::to_string(d.box.y1) + " " + format_double(d.score) + "\n";
    }
    write_text_file(path, out);
}

std::vector<Detection> read_detections_file(const std::string& path) {
    std::vector<Detection> detections;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Detection d;
        if (!(ls >> d.class_id >> d.box.x0 >> d.box.y0 >> d.box.x1 >> d.box.y1 >> d.score))
            throw ValidationError("malformed detection line in " + path);
        detections.push_back(d);
    }
    return detections;
}

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw ValidationError("stage " + name + " failed: " + e.what());
    }
}

}  // namespace

void stage_data(const PipelineConfig& config) {
    const Paths paths(config);
    fs::create_directories(paths.out);
    if (!config.data_dir.empty()) {
        // external dataset: just check it loads
        load_split(paths, "train");
        load_split(paths, "test");
        return;
    }
    const ToyRoomsConfig dc = dataset_config(config);
    generate_toyrooms(dc, SceneRule::default_rule(dc), paths.data.string());
}

void stage_train(const PipelineConfig& config) {
    if (config.labels_from_gt) return;
    const Paths paths(config);
    const DatasetManifest manifest = load_split(paths, "train");
    if (manifest.size() == 0) throw ValidationError("empty train manifest");

    std::vector<TrainSample> samples;
    samples.reserve(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i)
        samples.push_back(TrainSample{read_rgb_png(manifest.image_path(i)),
                                      read_label_png(manifest.label_path(i))});

    ToyNetConfig net_config;
    net_config.hidden_channels = config.hidden_channels;
    net_config.num_classes = manifest.palette.num_classes();
    net_config.atrous_rate = config.atrous_rate;
    net_config.scales = config.scales;
    const ToyNet net = ToyNet::random_init(net_config, derive_seed(config.seed, "init"));

    TrainConfig tc;
    tc.base_learning_rate = config.learning_rate;
    tc.power = config.power;
    tc.momentum = config.momentum;
    tc.max_iterations = config.iterations;
    tc.crop_size = config.crop_size;
    tc.mirror_probability = config.mirror_probability;
    tc.seed = derive_seed(config.seed, "train");

    const TrainResult result = train(net, samples, tc);
    save_checkpoint(paths.model.string(), result.net);

    std::string trace;
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
        trace += std::to_string(i) + "\t" + format_double(result.loss_trace[i]) + "\n";
    write_text_file(paths.loss_trace.string(), trace);
}

void stage_segment(const PipelineConfig& config) {
    const Paths paths(config);
    fs::create_directories(paths.pred);
    std::optional<ToyNet> net;
    if (!config.labels_from_gt) net = load_checkpoint(paths.model.string());

    for (const std::string split : {"train", "test"}) {
        const DatasetManifest manifest = load_split(paths, split);
        const int num_classes = manifest.palette.num_classes();
        fs::create_directories(paths.pred / split);
        for (std::size_t i = 0; i < manifest.size(); ++i) {
            LabelMap pred_labels(1, 1);
            std::optional<ScoreMap> confidences;
            if (config.labels_from_gt) {
                pred_labels = read_label_png(manifest.label_path(i));
                if (split == "test") confidences = unit_confidences(pred_labels, num_classes);
            } else {
                const Image image = read_rgb_png(manifest.image_path(i));
                const ScoreMap fused = max_fuse(net->forward(image));
                pred_labels = argmax_label(fused);
                if (split == "test")
                    confidences = config.raw_scores ? fused : softmax_map(fused);
            }
            write_label_png(paths.pred_labels(manifest, i), pred_labels);
            if (confidences) write_scoremap(paths.pred_scores(manifest, i), *confidences);
        }
    }
}

void stage_features(const PipelineConfig& config) {
    const Paths paths(config);
    for (const std::string split : {"train", "test"}) {
        const DatasetManifest manifest = load_split(paths, split);
        const int num_classes = manifest.palette.num_classes();
        for (const std::string kind : {"hist", "onehot", "pyramid"})
            fs::create_directories(paths.features / kind / split);
        for (std::size_t i = 0; i < manifest.size(); ++i) {
            const LabelMap labels = read_label_png(paths.pred_labels(manifest, i));
            for (const std::string kind : {"hist", "onehot", "pyramid"})
                write_feature(paths.feature_file(manifest, kind, i),
                              feature_for(kind, labels, num_classes, config.onehot_delta));
        }
    }
}

void stage_scene(const PipelineConfig& config) {
    const Paths paths(config);
    const DatasetManifest train_manifest = load_split(paths, "train");
    const DatasetManifest test_manifest = load_split(paths, "test");

    for (const std::string& variant : selected_variants(config)) {
        const VariantSpec spec = variant_spec(config, variant);
        std::vector<std::vector<double>> train_features;
        std::vector<int> train_labels;
        for (std::size_t i = 0; i < train_manifest.size(); ++i) {
            train_features.push_back(
                read_feature(paths.feature_file(train_manifest, spec.feature_kind, i)));
            train_labels.push_back(train_manifest.records[i].scene_id);
        }
        SvmTrainOptions options;
        options.C = config.svm_c;
        options.tol = config.svm_tol;
        const SvmModel model = train_svm(train_features, train_labels, spec.kernel, options);
        save_model(paths.scene_model(variant), model);

        const SvmModel loaded = load_model(paths.scene_model(variant));
        std::string pred;
        for (std::size_t i = 0; i < test_manifest.size(); ++i) {
            const std::vector<double> f =
                read_feature(paths.feature_file(test_manifest, spec.feature_kind, i));
            pred += std::to_string(predict(loaded, f).class_id) + "\n";
        }
        write_text_file(paths.scene_pred(variant), pred);
    }
}

void stage_detect(const PipelineConfig& config) {
    const Paths paths(config);
    fs::create_directories(paths.det);
    const DatasetManifest manifest = load_split(paths, "test");
    const std::vector<int> classes = object_class_ids(config, manifest);
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const LabelMap labels = read_label_png(paths.pred_labels(manifest, i));
        const ScoreMap confidences = read_scoremap(paths.pred_scores(manifest, i));
        write_detections_file(paths.det_file(manifest, i),
                              detect_objects(labels, confidences, classes, config.min_area));
    }
}

PipelineResult stage_eval(const PipelineConfig& config) {
    const Paths paths(config);
    const DatasetManifest test_manifest = load_split(paths, "test");
    const int num_classes = test_manifest.palette.num_classes();
    std::map<std::string, std::string> metrics;
    metrics["data.num_classes"] = std::to_string(num_classes);
    metrics["data.num_scenes"] = std::to_string(test_manifest.scene_names.size());
    metrics["data.test_count"] = std::to_string(test_manifest.size());

    // segmentation metrics + constant-most-frequent-label baseline
    std::vector<LabelMap> gt = load_label_maps(test_manifest);
    std::vector<LabelMap> pred;
    pred.reserve(gt.size());
    for (std::size_t i = 0; i < test_manifest.size(); ++i)
        pred.push_back(read_label_png(paths.pred_labels(test_manifest, i)));
    const SegMetrics seg = seg_metrics(gt, pred, num_classes);
    metrics["seg.pixel_acc"] = format_double(seg.pixel_accuracy);
    metrics["seg.mean_class_acc"] = format_double(seg.mean_class_accuracy);
    metrics["seg.mean_iou"] = format_double(seg.mean_iou);
    for (int c = 0; c < num_classes; ++c)
        metrics["seg.iou." + test_manifest.palette.names[c]] =
            seg.class_evaluated[c] ? format_double(seg.class_iou[c]) : "na";

    {
        std::vector<long long> counts(num_classes, 0);
        for (const LabelMap& m : gt)
            for (const std::uint8_t v : m.data())
                if (v != kIgnoreLabel) ++counts[v];
        const int majority = static_cast<int>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
        std::vector<LabelMap> constant;
        constant.reserve(gt.size());
        for (const LabelMap& m : gt)
            constant.emplace_back(m.height(), m.width(), static_cast<std::uint8_t>(majority));
        const SegMetrics base = seg_metrics(gt, constant, num_classes);
        metrics["seg.baseline_constant_miou"] = format_double(base.mean_iou);
    }

    // scene accuracy per variant + majority baseline
    std::vector<int> scene_gt;
    for (const ManifestRecord& rec : test_manifest.records) scene_gt.push_back(rec.scene_id);
    for (const std::string& variant : selected_variants(config)) {
        std::vector<int> scene_pred;
        std::istringstream in(read_text_file(paths.scene_pred(variant)));
        std::string line;
        while (std::getline(in, line))
            if (!line.empty())
                scene_pred.push_back(static_cast<int>(parse_int(line, "scene prediction")));
        metrics["scene.acc." + variant] = format_double(scene_accuracy(scene_gt, scene_pred));
    }
    {
        std::map<int, int> freq;
        for (const int s : scene_gt) ++freq[s];
        int best = 0;
        for (const auto& [scene, count] : freq) best = std::max(best, count);
        metrics["scene.baseline_majority"] =
            format_double(static_cast<double>(best) / static_cast<double>(scene_gt.size()));
    }

    // detection AP against GT boxes traced from the GT label maps
    const std::vector<int> classes = object_class_ids(config, test_manifest);
    std::map<int, std::vector<std::vector<BoundingBox>>> gt_boxes;
    for (const int c : classes)
        gt_boxes[c].resize(test_manifest.size());
    for (std::size_t i = 0; i < test_manifest.size(); ++i)
        for (const int c : classes)
            for (const ConnectedComponent& comp :
                 connected_components(BinaryMask::from_labels(gt[i], c)))
                gt_boxes[c][i].push_back(comp.box);

    std::map<int, std::vector<RankedDetection>> det_by_class;
    for (std::size_t i = 0; i < test_manifest.size(); ++i) {
        const std::vector<Detection> dets = read_detections_file(paths.det_file(test_manifest, i));
        for (std::size_t j = 0; j < dets.size(); ++j)
            det_by_class[dets[j].class_id].push_back(RankedDetection{
                dets[j].score, static_cast<int>(i), static_cast<int>(j), dets[j].box});
    }

    std::vector<std::optional<double>> per_class_ap;
    for (const int c : classes) {
        long long num_gt = 0;
        for (const auto& boxes : gt_boxes[c]) num_gt += static_cast<long long>(boxes.size());
        const std::string key = "det.ap." + test_manifest.palette.names[c];
        if (num_gt == 0) {
            metrics[key] = "na";
            per_class_ap.emplace_back(std::nullopt);
            continue;
        }
        const PrCurve curve = average_precision(det_by_class[c], gt_boxes[c]);
        metrics[key] = format_double(curve.ap);
        per_class_ap.emplace_back(curve.ap);
    }
    metrics["det.map"] = format_double(mean_ap(per_class_ap));

    std::string text;
    for (const auto& [key, value] : metrics) text += key + "=" + value + "\n";
    const std::string metrics_path = (paths.out / "metrics.txt").string();
    write_text_file(metrics_path, text);

    // manifest of produced artifacts (relative paths, sorted)
    std::vector<std::string> produced;
    for (const auto& entry : fs::recursive_directory_iterator(paths.out)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), paths.out).string();
        if (rel == "manifest.txt") continue;
        produced.push_back(rel);
    }
    std::sort(produced.begin(), produced.end());
    std::string listing;
    for (const std::string& p : produced) listing += p + "\n";
    write_text_file((paths.out / "manifest.txt").string(), listing);

    return PipelineResult{metrics_path, metrics};
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    run_stage("data", [&] { stage_data(config); return 0; });
    run_stage("train", [&] { stage_train(config); return 0; });
    run_stage("segment", [&] { stage_segment(config); return 0; });
    run_stage("features", [&] { stage_features(config); return 0; });
    run_stage("scene", [&] { stage_scene(config); return 0; });
    run_stage("detect", [&] { stage_detect(config); return 0; });
    return run_stage("eval", [&] { return stage_eval(config); });
}

}  // namespace pxs
