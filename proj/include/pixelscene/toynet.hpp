#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pixelscene/grid.hpp"
#include "pixelscene/image.hpp"

namespace pxs {

// Dense HxWxC activations. Double precision throughout: the backprop path is
// validated against central finite differences, which float cannot support.
struct Tensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int h, int w, int c)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, 0.0) {}

    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    double at(int y, int x, int c) const { return data[index(y, x, c)]; }
    void set(int y, int x, int c, double v) { data[index(y, x, c)] = v; }
};

// Stride-1 zero-padded convolution; rate > 1 spaces the kernel taps apart
// (atrous) without changing the output size.
struct ConvLayer {
    int in_channels = 0;
    int out_channels = 0;
    int kernel_size = 1;
    int rate = 1;
    std::vector<double> weights;  // [out][ky][kx][in]
    std::vector<double> bias;     // [out]

    std::size_t weight_index(int o, int ky, int kx, int i) const {
        return ((static_cast<std::size_t>(o) * kernel_size + ky) * kernel_size + kx) *
                   in_channels + i;
    }

    bool operator==(const ConvLayer&) const = default;
};

struct ToyNetConfig {
    int in_channels = 3;
    int hidden_channels = 16;
    int num_classes = 8;
    int atrous_rate = 2;
    std::vector<double> scales = {0.5, 0.75, 1.0};

    bool operator==(const ToyNetConfig&) const = default;
};

// conv3x3 -> ReLU -> atrous conv3x3 -> ReLU -> conv1x1, run once per input
// scale with shared weights; branch outputs are resized back to the input
// resolution.
class ToyNet {
public:
    explicit ToyNet(const ToyNetConfig& config);

    static ToyNet random_init(const ToyNetConfig& config, std::uint64_t seed);

    const ToyNetConfig& config() const { return config_; }
    int num_layers() const { return 3; }
    ConvLayer& layer(int i) { return layers_[i]; }
    const ConvLayer& layer(int i) const { return layers_[i]; }

    // One full-resolution score map per scale factor.
    std::vector<ScoreMap> forward(const Image& image) const;

    // Raw double-precision branch outputs at full resolution (training path).
    std::vector<Tensor> forward_branches(const Image& image) const;

    bool operator==(const ToyNet&) const = default;

private:
    ToyNetConfig config_;
    std::vector<ConvLayer> layers_;
};

struct TrainConfig {
    double base_learning_rate = 0.001;
    double power = 0.9;
    double momentum = 0.9;
    int max_iterations = 2000;
    int batch_size = 1;
    int crop_size = 48;
    double mirror_probability = 0.5;
    std::uint64_t seed = 0;
};

// base_lr * (1 - iter/max_iter)^power; iter may equal max_iter (yields 0).
double poly_lr(long long iteration, const TrainConfig& config);

struct LayerGradients {
    std::vector<double> weights;
    std::vector<double> bias;
};

struct LossAndGradients {
    double loss = 0.0;
    std::vector<LayerGradients> layers;
};

// Mean cross-entropy of the softmaxed max-fused branch outputs over non-
// ignore pixels, with gradients for every parameter. Fusion routes each
// pixel-class gradient to the lowest-index branch attaining the max.
LossAndGradients loss_and_gradients(const ToyNet& net, const Image& image, const LabelMap& gt);

struct TrainSample {
    Image image;
    LabelMap labels;
};

struct AugmentedSample {
    Image image;
    LabelMap labels;
    bool mirrored = false;
};

// Mirror with probability cfg.mirror_probability, then a uniform random crop
// of cfg.crop_size. Draw order: mirror, crop x, crop y.
AugmentedSample augment_sample(const TrainSample& sample, const TrainConfig& config, Rng& rng);

struct TrainResult {
    ToyNet net;
    std::vector<double> loss_trace;  // one entry per iteration
};

// Plain SGD, batch size 1, poly learning-rate schedule. Deterministic given
// config.seed. logger (optional) fires every 50 iterations and on the last.
TrainResult train(const ToyNet& net, const std::vector<TrainSample>& samples,
                  const TrainConfig& config,
                  const std::function<void(int, double)>& logger = {});

// "PXCK" container with float32 parameters. A freshly initialized or loaded
// net round-trips bit-exactly; saving a trained net rounds its doubles.
void save_checkpoint(const std::string& path, const ToyNet& net);
ToyNet load_checkpoint(const std::string& path, int expected_num_classes = -1);

}  // namespace pxs
