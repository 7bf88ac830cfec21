#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "pixelscene/dataset.hpp"
#include "pixelscene/detect.hpp"
#include "pixelscene/features.hpp"
#include "pixelscene/io.hpp"
#include "pixelscene/labeling.hpp"
#include "pixelscene/metrics.hpp"
#include "pixelscene/pipeline.hpp"
#include "pixelscene/render.hpp"
#include "pixelscene/svm.hpp"
#include "pixelscene/toynet.hpp"

namespace fs = std::filesystem;
using namespace pxs;

namespace {

std::vector<double> parse_scale_list(const std::string& text) {
    std::vector<double> scales;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) scales.push_back(parse_double(item, "scales"));
    if (scales.empty()) throw ValidationError("empty scale list");
    return scales;
}

std::vector<int> parse_class_list(const std::string& text) {
    std::vector<int> classes;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) classes.push_back(static_cast<int>(parse_int(item, "classes")));
    if (classes.empty()) throw ValidationError("empty class list");
    return classes;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void write_det_file(const std::string& path, const std::vector<Detection>& detections) {
    std::string out;
    for (const Detection& d : detections)
        out += std::to_string(d.class_id) + " " + std::to_string(d.box.x0) + " " +
               std::to_string(d.box.y0) + " " + std::to_string(d.box.x1) + " " +
               std::to_string(d.box.y1) + " " + format_double(d.score) + "\n";
    write_text_file(path, out);
}

std::vector<Detection> read_det_file(const std::string& path) {
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

struct GenDataArgs {
    std::string out;
    std::uint64_t seed = 0;
    int train = 500, test = 200, size = 64, classes = 8;
    int min_objects = 1, max_objects = 4;
    double noise = 0.05;
};

void cmd_gen_data(const GenDataArgs& args) {
    ToyRoomsConfig config;
    config.image_size = args.size;
    if (args.classes < 3) throw ValidationError("--classes must be at least 3 (2 structure + 1 object)");
    config.num_object_classes = args.classes - config.num_structure_classes;
    config.min_objects = args.min_objects;
    config.max_objects = args.max_objects;
    config.noise_stddev = args.noise;
    config.seed = args.seed;
    config.train_count = args.train;
    config.test_count = args.test;
    generate_toyrooms(config, SceneRule::default_rule(config), args.out);
    std::cout << "wrote " << args.train << " train / " << args.test << " test images to "
              << args.out << "\n";
}

struct TrainSegArgs {
    std::string data, out;
    int iters = 2000;
    double lr = 0.001, power = 0.9, momentum = 0.9, mirror = 0.5;
    int crop = 48, hidden = 16, atrous_rate = 2;
    std::uint64_t seed = 0;
    std::string scales = "0.5,0.75,1";
};

void cmd_train_seg(const TrainSegArgs& args) {
    const DatasetManifest manifest = load_manifest(args.data);
    std::vector<TrainSample> samples;
    for (std::size_t i = 0; i < manifest.size(); ++i)
        samples.push_back(TrainSample{read_rgb_png(manifest.image_path(i)),
                                      read_label_png(manifest.label_path(i))});
    ToyNetConfig net_config;
    net_config.num_classes = manifest.palette.num_classes();
    net_config.hidden_channels = args.hidden;
    net_config.atrous_rate = args.atrous_rate;
    net_config.scales = parse_scale_list(args.scales);
    const ToyNet net = ToyNet::random_init(net_config, derive_seed(args.seed, "init"));

    TrainConfig tc;
    tc.base_learning_rate = args.lr;
    tc.power = args.power;
    tc.momentum = args.momentum;
    tc.max_iterations = args.iters;
    tc.crop_size = args.crop;
    tc.mirror_probability = args.mirror;
    tc.seed = derive_seed(args.seed, "train");
    const TrainResult result = train(net, samples, tc, [](int iter, double loss) {
        std::fprintf(stderr, "iter %d loss %.6f\n", iter, loss);
    });
    save_checkpoint(args.out, result.net);
    std::cout << "saved " << args.out << "\n";
}

struct SegmentArgs {
    std::string model, image, out_scores, out_labels, per_scale_prefix;
};

void cmd_segment(const SegmentArgs& args) {
    const ToyNet net = load_checkpoint(args.model);
    const Image image = read_rgb_png(args.image);
    const std::vector<ScoreMap> branches = net.forward(image);
    if (!args.per_scale_prefix.empty())
        for (std::size_t s = 0; s < branches.size(); ++s)
            write_scoremap(args.per_scale_prefix + "_s" + std::to_string(s) + ".pxsm",
                           branches[s]);
    const ScoreMap fused = max_fuse(branches);
    if (!args.out_scores.empty()) write_scoremap(args.out_scores, fused);
    if (!args.out_labels.empty()) write_label_png(args.out_labels, argmax_label(fused));
}

void cmd_features(const std::string& labels_path, int classes, const std::string& mode,
                  const std::string& out, double delta, bool raw) {
    const LabelMap labels = read_label_png(labels_path);
    std::vector<double> values;
    if (mode == "hist") {
        const HistogramFeature hist = class_histogram(labels, classes);
        values = raw ? hist.values : l2_normalize(hist).values;
    } else if (mode == "onehot") {
        values = one_hot(labels, classes, delta).bits;
    } else if (mode == "pyramid") {
        values = spatial_pyramid(labels, classes).values;
    } else {
        throw ValidationError("--mode must be hist, onehot or pyramid");
    }
    write_feature(out, values);
}

struct TrainSceneArgs {
    std::string features_dir, manifest, kernel = "chi2", out;
    double c = 1.0, tol = 1e-4;
    bool select_c = false;
};

void cmd_train_scene(const TrainSceneArgs& args) {
    const DatasetManifest manifest = load_manifest(args.manifest);
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const std::string path =
            (fs::path(args.features_dir) / (stem_of(manifest.records[i].image_path) + ".feat"))
                .string();
        features.push_back(read_feature(path));
        labels.push_back(manifest.records[i].scene_id);
    }
    SvmTrainOptions options;
    options.C = args.c;
    options.tol = args.tol;
    const KernelKind kernel = kernel_from_name(args.kernel);
    if (args.select_c) {
        options.C = select_c_kfold(features, labels, kernel);
        std::cout << "selected C=" << format_double(options.C) << " by 5-fold CV\n";
    }
    const SvmModel model = train_svm(features, labels, kernel, options);
    save_model(args.out, model);
    std::cout << "saved " << args.out << "\n";
}

void cmd_classify_scene(const std::string& model_path, const std::string& feature_path) {
    const SvmModel model = load_model(model_path);
    const std::vector<double> feature = read_feature(feature_path);
    const SvmPrediction prediction = predict(model, feature);
    std::cout << "class " << prediction.class_id << "\n";
    for (std::size_t m = 0; m < prediction.decision_values.size(); ++m)
        std::cout << "decision " << m << " " << format_double(prediction.decision_values[m])
                  << "\n";
}

struct DetectArgs {
    std::string labels, scores, classes, out;
    bool raw_scores = false;
    int min_area = 0;
};

void cmd_detect(const DetectArgs& args) {
    const LabelMap labels = read_label_png(args.labels);
    ScoreMap scores = read_scoremap(args.scores);
    if (!args.raw_scores) scores = softmax_map(scores);
    const std::vector<Detection> detections =
        detect_objects(labels, scores, parse_class_list(args.classes), args.min_area);
    write_det_file(args.out, detections);
}

std::vector<std::string> matched_pngs(const std::string& gt_dir, const std::string& pred_dir) {
    std::vector<std::string> names;
    if (!fs::is_directory(gt_dir)) throw ValidationError("not a directory: " + gt_dir);
    if (!fs::is_directory(pred_dir)) throw ValidationError("not a directory: " + pred_dir);
    for (const auto& entry : fs::directory_iterator(gt_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    if (names.empty()) throw ValidationError("no .png files in " + gt_dir);
    for (const std::string& n : names)
        if (!fs::exists(fs::path(pred_dir) / n))
            throw ValidationError("prediction missing for " + n + " in " + pred_dir);
    return names;
}

void cmd_eval_seg(const std::string& gt_dir, const std::string& pred_dir, int classes) {
    std::vector<LabelMap> gt, pred;
    for (const std::string& name : matched_pngs(gt_dir, pred_dir)) {
        gt.push_back(read_label_png((fs::path(gt_dir) / name).string()));
        pred.push_back(read_label_png((fs::path(pred_dir) / name).string()));
    }
    const SegMetrics m = seg_metrics(gt, pred, classes);
    std::printf("%-10s %10s\n", "metric", "value");
    std::printf("%-10s %10.4f\n", "pix_acc", m.pixel_accuracy);
    std::printf("%-10s %10.4f\n", "class_acc", m.mean_class_accuracy);
    std::printf("%-10s %10.4f\n", "mean_iou", m.mean_iou);
    for (int c = 0; c < classes; ++c)
        if (m.class_evaluated[c]) std::printf("iou_%-6d %10.4f\n", c, m.class_iou[c]);
    std::cout << "pixel_acc=" << format_double(m.pixel_accuracy) << "\n";
    std::cout << "mean_class_acc=" << format_double(m.mean_class_accuracy) << "\n";
    std::cout << "mean_iou=" << format_double(m.mean_iou) << "\n";
    for (int c = 0; c < classes; ++c)
        std::cout << "iou_" << c << "="
                  << (m.class_evaluated[c] ? format_double(m.class_iou[c]) : "na") << "\n";
}

void cmd_eval_scene(const std::string& manifest_path, const std::string& pred_path) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    std::vector<int> gt;
    for (const ManifestRecord& rec : manifest.records) gt.push_back(rec.scene_id);
    std::vector<int> pred;
    std::istringstream in(read_text_file(pred_path));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) pred.push_back(static_cast<int>(parse_int(line, "prediction")));
    std::cout << "scene_accuracy=" << format_double(scene_accuracy(gt, pred)) << "\n";
}

void cmd_eval_det(const std::string& manifest_path, const std::string& pred_dir,
                  const std::string& classes_arg) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    std::vector<int> classes;
    if (!classes_arg.empty()) {
        classes = parse_class_list(classes_arg);
    } else {
        for (int c = 2; c < manifest.palette.num_classes(); ++c) classes.push_back(c);
    }

    const std::vector<LabelMap> gt_labels = load_label_maps(manifest);
    std::map<int, std::vector<std::vector<BoundingBox>>> gt_boxes;
    for (const int c : classes) gt_boxes[c].resize(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i)
        for (const int c : classes)
            for (const ConnectedComponent& comp :
                 connected_components(BinaryMask::from_labels(gt_labels[i], c)))
                gt_boxes[c][i].push_back(comp.box);

    std::map<int, std::vector<RankedDetection>> dets;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const std::string path =
            (fs::path(pred_dir) / (stem_of(manifest.records[i].image_path) + ".det")).string();
        if (!fs::exists(path)) throw ValidationError("missing detection file: " + path);
        const std::vector<Detection> file_dets = read_det_file(path);
        for (std::size_t j = 0; j < file_dets.size(); ++j)
            dets[file_dets[j].class_id].push_back(RankedDetection{
                file_dets[j].score, static_cast<int>(i), static_cast<int>(j),
                file_dets[j].box});
    }

    std::vector<std::optional<double>> aps;
    for (const int c : classes) {
        long long num_gt = 0;
        for (const auto& boxes : gt_boxes[c]) num_gt += static_cast<long long>(boxes.size());
        const std::string name = c < manifest.palette.num_classes()
                                     ? manifest.palette.names[c]
                                     : std::to_string(c);
        if (num_gt == 0) {
            std::printf("ap_%-8s %10s\n", name.c_str(), "na");
            std::cout << "ap_" << name << "=na\n";
            aps.emplace_back(std::nullopt);
            continue;
        }
        const PrCurve curve = average_precision(dets[c], gt_boxes[c]);
        std::printf("ap_%-8s %10.4f\n", name.c_str(), curve.ap);
        std::cout << "ap_" << name << "=" << format_double(curve.ap) << "\n";
        aps.emplace_back(curve.ap);
    }
    const double map = mean_ap(aps);
    std::printf("%-11s %10.4f\n", "mean_ap", map);
    std::cout << "mean_ap=" << format_double(map) << "\n";
}

struct RenderArgs {
    std::string labels, image, det, gt_det, palette, out;
    int classes = 0;
};

void cmd_render(const RenderArgs& args) {
    const LabelMap labels = read_label_png(args.labels);
    ClassPalette palette;
    if (!args.palette.empty()) {
        palette = read_palette(args.palette);
    } else {
        int max_label = 0;
        for (const std::uint8_t v : labels.data())
            if (v != kIgnoreLabel) max_label = std::max(max_label, static_cast<int>(v));
        const int count = args.classes > 0 ? args.classes : max_label + 1;
        std::vector<std::string> names;
        for (int c = 0; c < count; ++c) names.push_back("class" + std::to_string(c));
        palette = make_default_palette(names);
    }
    std::optional<Image> base;
    if (!args.image.empty()) base = read_rgb_png(args.image);
    Image out = render_labels(labels, palette, base ? &*base : nullptr);

    std::vector<Detection> detections;
    if (!args.det.empty()) detections = read_det_file(args.det);
    std::optional<std::vector<BoundingBox>> gt_boxes;
    if (!args.gt_det.empty()) {
        gt_boxes.emplace();
        for (const Detection& d : read_det_file(args.gt_det)) gt_boxes->push_back(d.box);
    }
    if (!detections.empty() || gt_boxes) out = render_detections(out, detections, gt_boxes);
    write_rgb_png(args.out, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bottom-up scene understanding from per-pixel class scores"};
    app.require_subcommand(1);

    GenDataArgs gen_args;
    auto* gen = app.add_subcommand("gen-data", "generate the ToyRooms synthetic dataset");
    gen->add_option("--out", gen_args.out, "output directory")->required();
    gen->add_option("--seed", gen_args.seed, "RNG seed");
    gen->add_option("--train", gen_args.train, "train image count");
    gen->add_option("--test", gen_args.test, "test image count");
    gen->add_option("--size", gen_args.size, "image size in pixels");
    gen->add_option("--classes", gen_args.classes, "total classes (2 structure + objects)");
    gen->add_option("--min-objects", gen_args.min_objects, "minimum objects per image");
    gen->add_option("--max-objects", gen_args.max_objects, "maximum objects per image");
    gen->add_option("--noise", gen_args.noise, "color noise stddev");

    TrainSegArgs train_args;
    auto* train_seg = app.add_subcommand("train-seg", "train the pixel labeling network");
    train_seg->add_option("--data", train_args.data, "train manifest")->required();
    train_seg->add_option("--out", train_args.out, "output checkpoint")->required();
    train_seg->add_option("--iters", train_args.iters, "SGD iterations");
    train_seg->add_option("--lr", train_args.lr, "base learning rate");
    train_seg->add_option("--power", train_args.power, "poly schedule power");
    train_seg->add_option("--momentum", train_args.momentum, "SGD momentum");
    train_seg->add_option("--crop", train_args.crop, "training crop size");
    train_seg->add_option("--mirror", train_args.mirror, "mirror probability");
    train_seg->add_option("--hidden", train_args.hidden, "hidden channels");
    train_seg->add_option("--atrous-rate", train_args.atrous_rate, "atrous rate");
    train_seg->add_option("--scales", train_args.scales, "comma-separated scale factors");
    train_seg->add_option("--seed", train_args.seed, "RNG seed");

    SegmentArgs seg_args;
    auto* segment = app.add_subcommand("segment", "run the network on one image");
    segment->add_option("--model", seg_args.model, "checkpoint")->required();
    segment->add_option("--image", seg_args.image, "input RGB PNG")->required();
    segment->add_option("--out-scores", seg_args.out_scores, "fused raw score map (.pxsm)");
    segment->add_option("--out-labels", seg_args.out_labels, "argmax label map (.png)");
    segment->add_option("--per-scale-prefix", seg_args.per_scale_prefix,
                        "also write per-scale score maps with this prefix");

    std::vector<std::string> fuse_inputs;
    std::string fuse_out;
    auto* fuse = app.add_subcommand("fuse", "max-fuse score maps");
    fuse->add_option("--in", fuse_inputs, "input .pxsm files")->required()->expected(-1);
    fuse->add_option("--out", fuse_out, "output .pxsm")->required();

    std::string label_in, label_out;
    auto* label = app.add_subcommand("label", "argmax-label a score map");
    label->add_option("--in", label_in, "input .pxsm")->required();
    label->add_option("--out", label_out, "output label PNG")->required();

    std::string feat_labels, feat_mode = "hist", feat_out;
    int feat_classes = 0;
    double feat_delta = 0.005;
    bool feat_raw = false;
    auto* features = app.add_subcommand("features", "scene descriptors from a label map");
    features->add_option("--labels", feat_labels, "label PNG")->required();
    features->add_option("--classes", feat_classes, "class count")->required();
    features->add_option("--mode", feat_mode, "hist|onehot|pyramid");
    features->add_option("--out", feat_out, "output .feat")->required();
    features->add_option("--delta", feat_delta, "one-hot threshold fraction");
    features->add_flag("--raw", feat_raw, "emit raw counts (hist mode)");

    TrainSceneArgs scene_args;
    auto* train_scene = app.add_subcommand("train-scene", "train the scene classifier");
    train_scene->add_option("--features", scene_args.features_dir, "feature directory")
        ->required();
    train_scene->add_option("--labels", scene_args.manifest, "manifest with scene ids")
        ->required();
    train_scene->add_option("--kernel", scene_args.kernel,
                            "linear|intersection|chi2|jensen_shannon");
    train_scene->add_option("--C", scene_args.c, "regularization C");
    train_scene->add_flag("--select-C", scene_args.select_c,
                          "pick C by 5-fold cross-validation over {0.01..100}");
    train_scene->add_option("--tol", scene_args.tol, "solver tolerance");
    train_scene->add_option("--out", scene_args.out, "output .pxsvm")->required();

    std::string cls_model, cls_feature;
    auto* classify = app.add_subcommand("classify-scene", "classify one feature vector");
    classify->add_option("--model", cls_model, "scene .pxsvm")->required();
    classify->add_option("--features", cls_feature, "input .feat")->required();

    DetectArgs det_args;
    auto* detect = app.add_subcommand("detect", "objects from a labeled segmentation");
    detect->add_option("--labels", det_args.labels, "label PNG")->required();
    detect->add_option("--scores", det_args.scores, "fused score map .pxsm")->required();
    detect->add_option("--classes", det_args.classes, "comma-separated object class ids")
        ->required();
    detect->add_option("--out", det_args.out, "output .det")->required();
    detect->add_flag("--raw-scores", det_args.raw_scores,
                     "score with raw values instead of softmax probabilities");
    detect->add_option("--min-area", det_args.min_area, "drop components smaller than this");

    std::string es_gt, es_pred;
    int es_classes = 0;
    auto* eval_seg = app.add_subcommand("eval-seg", "segmentation metrics");
    eval_seg->add_option("--gt", es_gt, "ground-truth label directory")->required();
    eval_seg->add_option("--pred", es_pred, "predicted label directory")->required();
    eval_seg->add_option("--classes", es_classes, "class count")->required();

    std::string esc_gt, esc_pred;
    auto* eval_scene = app.add_subcommand("eval-scene", "scene classification accuracy");
    eval_scene->add_option("--gt", esc_gt, "test manifest")->required();
    eval_scene->add_option("--pred", esc_pred, "prediction file, one scene id per line")
        ->required();

    std::string ed_gt, ed_pred, ed_classes;
    auto* eval_det = app.add_subcommand("eval-det", "detection AP");
    eval_det->add_option("--gt", ed_gt, "test manifest")->required();
    eval_det->add_option("--pred", ed_pred, "directory of .det files")->required();
    eval_det->add_option("--classes", ed_classes, "comma-separated object class ids");

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "color overlays for inspection");
    render->add_option("--labels", render_args.labels, "label PNG")->required();
    render->add_option("--image", render_args.image, "base RGB PNG to blend with");
    render->add_option("--det", render_args.det, "detections .det (blue boxes)");
    render->add_option("--gt-det", render_args.gt_det, "ground-truth .det (green boxes)");
    render->add_option("--palette", render_args.palette, "palette.txt");
    render->add_option("--classes", render_args.classes, "class count for default palette");
    render->add_option("--out", render_args.out, "output PNG")->required();

    std::string pipe_config;
    std::vector<std::string> pipe_sets;
    PipelineConfig pipe_defaults;
    std::string pipe_out, pipe_data;
    std::optional<std::uint64_t> pipe_seed;
    bool pipe_labels_from_gt = false;
    std::string pipe_variant;
    auto* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
    pipeline->add_option("--config", pipe_config, "key=value config file");
    pipeline->add_option("--out", pipe_out, "output directory");
    pipeline->add_option("--data", pipe_data, "existing dataset directory");
    pipeline->add_option("--seed", pipe_seed, "RNG seed");
    pipeline->add_flag("--labels-from-gt", pipe_labels_from_gt,
                       "skip the network, use ground-truth masks");
    pipeline->add_option("--scene-variant", pipe_variant,
                         "hist_linear|onehot_linear|hist_kernel|pyramid_kernel|onehot_kernel|all");
    pipeline->add_option("--set", pipe_sets, "extra key=value overrides")->expected(-1);

    try {
        app.parse(argc, argv);

        if (*gen) cmd_gen_data(gen_args);
        else if (*train_seg) cmd_train_seg(train_args);
        else if (*segment) cmd_segment(seg_args);
        else if (*fuse) {
            std::vector<ScoreMap> maps;
            for (const std::string& path : fuse_inputs) maps.push_back(read_scoremap(path));
            write_scoremap(fuse_out, max_fuse(maps));
        } else if (*label) {
            write_label_png(label_out, argmax_label(read_scoremap(label_in)));
        } else if (*features) {
            cmd_features(feat_labels, feat_classes, feat_mode, feat_out, feat_delta, feat_raw);
        } else if (*train_scene) cmd_train_scene(scene_args);
        else if (*classify) cmd_classify_scene(cls_model, cls_feature);
        else if (*detect) cmd_detect(det_args);
        else if (*eval_seg) cmd_eval_seg(es_gt, es_pred, es_classes);
        else if (*eval_scene) cmd_eval_scene(esc_gt, esc_pred);
        else if (*eval_det) cmd_eval_det(ed_gt, ed_pred, ed_classes);
        else if (*render) cmd_render(render_args);
        else if (*pipeline) {
            PipelineConfig config =
                pipe_config.empty() ? PipelineConfig{} : PipelineConfig::from_file(pipe_config);
            if (!pipe_out.empty()) config.out_dir = pipe_out;
            if (!pipe_data.empty()) config.data_dir = pipe_data;
            if (pipe_seed) config.seed = *pipe_seed;
            if (pipe_labels_from_gt) config.labels_from_gt = true;
            if (!pipe_variant.empty()) config.scene_variant = pipe_variant;
            for (const std::string& kv : pipe_sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw ValidationError("--set expects key=value, got " + kv);
                config.apply(kv.substr(0, eq), kv.substr(eq + 1));
            }
            const PipelineResult result = run_pipeline(config);
            std::cout << read_text_file(result.metrics_path);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
