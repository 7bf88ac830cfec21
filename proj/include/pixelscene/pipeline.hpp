#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pxs {

// End-to-end run configuration. Every knob has a CLI flag and a key=value
// config-file entry; defaults reproduce the reference setup.
struct PipelineConfig {
    std::string out_dir;
    std::string data_dir;  // empty: generate ToyRooms under <out>/data

    std::uint64_t seed = 1234;

    // dataset generation
    int image_size = 64;
    int num_object_classes = 6;
    int num_structure_classes = 2;
    int train_count = 500;
    int test_count = 200;
    int min_objects = 1;
    int max_objects = 4;
    double noise_stddev = 0.05;

    // segmentation training
    int iterations = 2000;
    double learning_rate = 0.001;
    double power = 0.9;
    double momentum = 0.9;
    int crop_size = 48;
    double mirror_probability = 0.5;
    int hidden_channels = 16;
    int atrous_rate = 2;
    std::vector<double> scales = {0.5, 0.75, 1.0};

    // scene classification
    bool labels_from_gt = false;  // skip the net, use ground-truth masks
    std::string scene_variant = "all";
    double svm_c = 1.0;
    double svm_tol = 1e-4;
    std::string kernel = "jensen_shannon";
    double onehot_delta = 0.005;

    // detection
    bool raw_scores = false;
    int min_area = 0;

    static PipelineConfig from_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);
};

// The four scene-classifier variants, plus the one-hot/kernel combination
// kept as a reported experiment.
inline const std::vector<std::string>& scene_variants() {
    static const std::vector<std::string> v = {"hist_linear", "onehot_linear", "hist_kernel",
                                               "pyramid_kernel", "onehot_kernel"};
    return v;
}

struct PipelineResult {
    std::string metrics_path;
    std::map<std::string, std::string> metrics;
};

// Individual stages; each works purely through files under config.out_dir so
// any stage can be re-run in isolation with bit-identical outputs.
void stage_data(const PipelineConfig& config);
void stage_train(const PipelineConfig& config);
void stage_segment(const PipelineConfig& config);
void stage_features(const PipelineConfig& config);
void stage_scene(const PipelineConfig& config);
void stage_detect(const PipelineConfig& config);
PipelineResult stage_eval(const PipelineConfig& config);

PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace pxs
