#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pixelscene/dataset.hpp"
#include "pixelscene/detect.hpp"
#include "pixelscene/features.hpp"
#include "pixelscene/io.hpp"
#include "pixelscene/labeling.hpp"
#include "pixelscene/metrics.hpp"
#include "pixelscene/pipeline.hpp"
#include "pixelscene/svm.hpp"
#include "pixelscene/toynet.hpp"

namespace py = pybind11;
using namespace pxs;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using I32Array = py::array_t<int, py::array::c_style | py::array::forcecast>;

LabelMap to_label_map(const U8Array& array) {
    if (array.ndim() != 2) throw ValidationError("label array must be 2-D (H, W)");
    LabelMap map(static_cast<int>(array.shape(0)), static_cast<int>(array.shape(1)));
    std::copy(array.data(), array.data() + array.size(), map.data().begin());
    return map;
}

py::array from_label_map(const LabelMap& map) {
    py::array_t<std::uint8_t> out({map.height(), map.width()});
    std::copy(map.data().begin(), map.data().end(), out.mutable_data());
    return out;
}

ScoreMap to_score_map(const F64Array& array) {
    if (array.ndim() != 3) throw ValidationError("score array must be 3-D (H, W, C)");
    ScoreMap map(static_cast<int>(array.shape(0)), static_cast<int>(array.shape(1)),
                 static_cast<int>(array.shape(2)));
    std::copy(array.data(), array.data() + array.size(), map.data().begin());
    return map;
}

py::array from_score_map(const ScoreMap& map) {
    py::array_t<double> out({map.height(), map.width(), map.num_classes()});
    std::copy(map.data().begin(), map.data().end(), out.mutable_data());
    return out;
}

Image to_image(const U8Array& array) {
    if (array.ndim() != 3 || array.shape(2) != 3)
        throw ValidationError("image array must be (H, W, 3) uint8");
    Image image(static_cast<int>(array.shape(0)), static_cast<int>(array.shape(1)));
    std::copy(array.data(), array.data() + array.size(), image.data().begin());
    return image;
}

py::array from_image(const Image& image) {
    py::array_t<std::uint8_t> out({image.height(), image.width(), 3});
    std::copy(image.data().begin(), image.data().end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(const F64Array& array) {
    if (array.ndim() != 1) throw ValidationError("feature array must be 1-D");
    return std::vector<double>(array.data(), array.data() + array.size());
}

BoundingBox to_box(const py::tuple& t) {
    if (t.size() != 4) throw ValidationError("box must be (x0, y0, x1, y1)");
    return BoundingBox{t[0].cast<int>(), t[1].cast<int>(), t[2].cast<int>(), t[3].cast<int>()};
}

py::tuple from_box(const BoundingBox& box) {
    return py::make_tuple(box.x0, box.y0, box.x1, box.y1);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "scene understanding from per-pixel class scores";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    // labeling
    m.def("softmax_map",
          [](const F64Array& scores) { return from_score_map(softmax_map(to_score_map(scores))); },
          py::arg("scores"), "per-pixel softmax over the class axis");
    m.def("max_fuse",
          [](const std::vector<F64Array>& maps) {
              std::vector<ScoreMap> converted;
              for (const auto& a : maps) converted.push_back(to_score_map(a));
              return from_score_map(max_fuse(converted));
          },
          py::arg("maps"), "elementwise maximum across score maps");
    m.def("argmax_label",
          [](const F64Array& scores) { return from_label_map(argmax_label(to_score_map(scores))); },
          py::arg("scores"));
    m.def("resize_scores",
          [](const F64Array& scores, int height, int width, const std::string& mode) {
              const ResizeMode rm = mode == "nearest" ? ResizeMode::kNearest
                                   : mode == "bilinear"
                                       ? ResizeMode::kBilinear
                                       : throw ValidationError("mode must be nearest|bilinear");
              return from_score_map(resize_scores(to_score_map(scores), height, width, rm));
          },
          py::arg("scores"), py::arg("height"), py::arg("width"), py::arg("mode") = "bilinear");

    // features
    m.def("class_histogram",
          [](const U8Array& labels, int num_classes) {
              return class_histogram(to_label_map(labels), num_classes).values;
          },
          py::arg("labels"), py::arg("num_classes"));
    m.def("l2_normalize",
          [](const F64Array& values) {
              return l2_normalize({to_vector(values), false}).values;
          },
          py::arg("values"));
    m.def("one_hot",
          [](const U8Array& labels, int num_classes, double delta_fraction) {
              return one_hot(to_label_map(labels), num_classes, delta_fraction).bits;
          },
          py::arg("labels"), py::arg("num_classes"), py::arg("delta_fraction") = 0.005);
    m.def("spatial_pyramid",
          [](const U8Array& labels, int num_classes) {
              return spatial_pyramid(to_label_map(labels), num_classes).values;
          },
          py::arg("labels"), py::arg("num_classes"));

    // svm
    m.def("kernel_eval",
          [](const std::string& kernel, const F64Array& x, const F64Array& y) {
              return kernel_eval(kernel_from_name(kernel), to_vector(x), to_vector(y));
          },
          py::arg("kernel"), py::arg("x"), py::arg("y"));

    py::class_<SvmModel>(m, "SvmModel")
        .def_static(
            "train",
            [](const F64Array& features, const I32Array& labels, const std::string& kernel,
               double c, double tol) {
                if (features.ndim() != 2) throw ValidationError("features must be (N, D)");
                if (labels.ndim() != 1 || labels.shape(0) != features.shape(0))
                    throw ValidationError("labels must be (N,)");
                std::vector<std::vector<double>> rows(features.shape(0));
                for (py::ssize_t i = 0; i < features.shape(0); ++i)
                    rows[i].assign(features.data() + i * features.shape(1),
                                   features.data() + (i + 1) * features.shape(1));
                const std::vector<int> y(labels.data(), labels.data() + labels.shape(0));
                SvmTrainOptions options;
                options.C = c;
                options.tol = tol;
                return train_svm(rows, y, kernel_from_name(kernel), options);
            },
            py::arg("features"), py::arg("labels"), py::arg("kernel") = "linear",
            py::arg("C") = 1.0, py::arg("tol") = 1e-4)
        .def("predict",
             [](const SvmModel& model, const F64Array& feature) {
                 const SvmPrediction p = predict(model, to_vector(feature));
                 return py::make_tuple(p.class_id, p.decision_values);
             },
             py::arg("feature"))
        .def("save", [](const SvmModel& model, const std::string& path) { save_model(path, model); },
             py::arg("path"))
        .def_static("load", [](const std::string& path) { return load_model(path); },
                    py::arg("path"))
        .def_property_readonly("num_classes", [](const SvmModel& model) { return model.num_classes; })
        .def_property_readonly("dim", [](const SvmModel& model) { return model.dim; })
        .def_property_readonly("kernel",
                               [](const SvmModel& model) { return kernel_name(model.kernel); });

    // detection
    m.def("connected_components",
          [](const U8Array& mask) {
              if (mask.ndim() != 2) throw ValidationError("mask must be 2-D");
              BinaryMask bm;
              bm.height = static_cast<int>(mask.shape(0));
              bm.width = static_cast<int>(mask.shape(1));
              bm.data.assign(mask.data(), mask.data() + mask.size());
              for (auto& v : bm.data) v = v ? 1 : 0;
              py::list out;
              for (const ConnectedComponent& comp : connected_components(bm)) {
                  py::array_t<int> pixels({static_cast<py::ssize_t>(comp.pixels.size()),
                                           static_cast<py::ssize_t>(2)});
                  auto* p = pixels.mutable_data();
                  for (const auto& [y, x] : comp.pixels) {
                      *p++ = y;
                      *p++ = x;
                  }
                  out.append(py::make_tuple(from_box(comp.box), pixels));
              }
              return out;
          },
          py::arg("mask"), "8-connected components as (box, pixel array) tuples");
    m.def("detect_objects",
          [](const U8Array& labels, const F64Array& confidences,
             const std::vector<int>& object_classes, int min_area) {
              py::list out;
              for (const Detection& d : detect_objects(to_label_map(labels),
                                                       to_score_map(confidences),
                                                       object_classes, min_area))
                  out.append(py::make_tuple(d.class_id, from_box(d.box), d.score,
                                            d.pixel_count));
              return out;
          },
          py::arg("labels"), py::arg("confidences"), py::arg("object_classes"),
          py::arg("min_area") = 0,
          "(class_id, box, score, pixel_count) per connected component");

    // metrics
    m.def("seg_metrics",
          [](const std::vector<U8Array>& gt, const std::vector<U8Array>& pred, int num_classes) {
              std::vector<LabelMap> g, p;
              for (const auto& a : gt) g.push_back(to_label_map(a));
              for (const auto& a : pred) p.push_back(to_label_map(a));
              const SegMetrics metrics = seg_metrics(g, p, num_classes);
              py::dict out;
              out["pixel_accuracy"] = metrics.pixel_accuracy;
              out["mean_class_accuracy"] = metrics.mean_class_accuracy;
              out["mean_iou"] = metrics.mean_iou;
              out["class_iou"] = metrics.class_iou;
              return out;
          },
          py::arg("gt"), py::arg("pred"), py::arg("num_classes"));
    m.def("scene_accuracy", &scene_accuracy, py::arg("gt"), py::arg("pred"));
    m.def("box_iou",
          [](const py::tuple& a, const py::tuple& b) { return box_iou(to_box(a), to_box(b)); },
          py::arg("a"), py::arg("b"));
    m.def("average_precision",
          [](const py::list& detections, const std::vector<std::vector<py::tuple>>& gt_boxes) {
              std::vector<RankedDetection> dets;
              for (const auto& item : detections) {
                  const py::tuple t = item.cast<py::tuple>();
                  if (t.size() != 4)
                      throw ValidationError(
                          "detections must be (score, image_index, box_order, box)");
                  dets.push_back(RankedDetection{t[0].cast<double>(), t[1].cast<int>(),
                                                 t[2].cast<int>(), to_box(t[3].cast<py::tuple>())});
              }
              std::vector<std::vector<BoundingBox>> gt(gt_boxes.size());
              for (std::size_t i = 0; i < gt_boxes.size(); ++i)
                  for (const auto& t : gt_boxes[i]) gt[i].push_back(to_box(t));
              const PrCurve curve = average_precision(dets, gt);
              py::dict out;
              out["ap"] = curve.ap;
              out["precision"] = curve.precision;
              out["recall"] = curve.recall;
              out["num_ground_truth"] = curve.num_ground_truth;
              return out;
          },
          py::arg("detections"), py::arg("gt_boxes"),
          "PASCAL 11-point AP; detections are (score, image_index, box_order, box)");
    m.def("mean_ap",
          [](const std::vector<py::object>& per_class) {
              std::vector<std::optional<double>> aps;
              for (const auto& v : per_class)
                  aps.emplace_back(v.is_none() ? std::nullopt
                                               : std::optional<double>(v.cast<double>()));
              return mean_ap(aps);
          },
          py::arg("per_class_ap"), "mean over classes whose AP is not None");

    // toynet
    m.def("poly_lr",
          [](long long iteration, double base_lr, double power, int max_iterations) {
              TrainConfig config;
              config.base_learning_rate = base_lr;
              config.power = power;
              config.max_iterations = max_iterations;
              return poly_lr(iteration, config);
          },
          py::arg("iteration"), py::arg("base_lr") = 0.001, py::arg("power") = 0.9,
          py::arg("max_iterations") = 20000);

    py::class_<ToyNet>(m, "ToyNet")
        .def_static(
            "random_init",
            [](int num_classes, int hidden_channels, int atrous_rate,
               const std::vector<double>& scales, std::uint64_t seed) {
                ToyNetConfig config;
                config.num_classes = num_classes;
                config.hidden_channels = hidden_channels;
                config.atrous_rate = atrous_rate;
                config.scales = scales;
                return ToyNet::random_init(config, seed);
            },
            py::arg("num_classes"), py::arg("hidden_channels") = 16,
            py::arg("atrous_rate") = 2,
            py::arg("scales") = std::vector<double>{0.5, 0.75, 1.0}, py::arg("seed") = 0)
        .def_static("load", [](const std::string& path) { return load_checkpoint(path); },
                    py::arg("path"))
        .def("save", [](const ToyNet& net, const std::string& path) { save_checkpoint(path, net); },
             py::arg("path"))
        .def("forward",
             [](const ToyNet& net, const U8Array& image) {
                 py::list out;
                 for (const ScoreMap& map : net.forward(to_image(image)))
                     out.append(from_score_map(map));
                 return out;
             },
             py::arg("image"), "one full-resolution score map per scale")
        .def_property_readonly("num_classes",
                               [](const ToyNet& net) { return net.config().num_classes; })
        .def_property_readonly("scales", [](const ToyNet& net) { return net.config().scales; });

    m.def("train_toynet",
          [](const ToyNet& net, const std::string& manifest_path, int iterations,
             double learning_rate, double power, int crop_size, double mirror_probability,
             std::uint64_t seed) {
              const DatasetManifest manifest = load_manifest(manifest_path);
              std::vector<TrainSample> samples;
              for (std::size_t i = 0; i < manifest.size(); ++i)
                  samples.push_back(TrainSample{read_rgb_png(manifest.image_path(i)),
                                                read_label_png(manifest.label_path(i))});
              TrainConfig config;
              config.max_iterations = iterations;
              config.base_learning_rate = learning_rate;
              config.power = power;
              config.crop_size = crop_size;
              config.mirror_probability = mirror_probability;
              config.seed = seed;
              TrainResult result = train(net, samples, config);
              return py::make_tuple(result.net, result.loss_trace);
          },
          py::arg("net"), py::arg("manifest"), py::arg("iterations") = 2000,
          py::arg("learning_rate") = 0.001, py::arg("power") = 0.9, py::arg("crop_size") = 48,
          py::arg("mirror_probability") = 0.5, py::arg("seed") = 0,
          "SGD with the poly schedule; returns (net, loss_trace)");

    // dataset + io
    m.def("generate_toyrooms",
          [](const std::string& out_dir, int image_size, int num_object_classes,
             int min_objects, int max_objects, double noise_stddev, std::uint64_t seed,
             int train_count, int test_count) {
              ToyRoomsConfig config;
              config.image_size = image_size;
              config.num_object_classes = num_object_classes;
              config.min_objects = min_objects;
              config.max_objects = max_objects;
              config.noise_stddev = noise_stddev;
              config.seed = seed;
              config.train_count = train_count;
              config.test_count = test_count;
              const GeneratedDataset data =
                  generate_toyrooms(config, SceneRule::default_rule(config), out_dir);
              py::dict out;
              out["train_manifest"] = out_dir + "/train.manifest";
              out["test_manifest"] = out_dir + "/test.manifest";
              out["num_classes"] = config.num_classes();
              out["num_scenes"] = static_cast<int>(data.train.scene_names.size());
              return out;
          },
          py::arg("out_dir"), py::arg("image_size") = 64, py::arg("num_object_classes") = 6,
          py::arg("min_objects") = 1, py::arg("max_objects") = 4,
          py::arg("noise_stddev") = 0.05, py::arg("seed") = 0, py::arg("train_count") = 500,
          py::arg("test_count") = 200);

    m.def("read_label_png",
          [](const std::string& path) { return from_label_map(read_label_png(path)); },
          py::arg("path"));
    m.def("write_label_png",
          [](const std::string& path, const U8Array& labels) {
              write_label_png(path, to_label_map(labels));
          },
          py::arg("path"), py::arg("labels"));
    m.def("read_rgb_png", [](const std::string& path) { return from_image(read_rgb_png(path)); },
          py::arg("path"));
    m.def("write_rgb_png",
          [](const std::string& path, const U8Array& image) {
              write_rgb_png(path, to_image(image));
          },
          py::arg("path"), py::arg("image"));
    m.def("read_scoremap",
          [](const std::string& path) { return from_score_map(read_scoremap(path)); },
          py::arg("path"));
    m.def("write_scoremap",
          [](const std::string& path, const F64Array& scores) {
              write_scoremap(path, to_score_map(scores));
          },
          py::arg("path"), py::arg("scores"));

    // pipeline
    m.def("run_pipeline",
          [](const std::map<std::string, std::string>& options) {
              PipelineConfig config;
              for (const auto& [key, value] : options) config.apply(key, value);
              return run_pipeline(config).metrics;
          },
          py::arg("options"),
          "run every stage; options use the pipeline config keys (out, seed, iters, ...)");
}
