#include "pixelscene/labeling.hpp"

namespace pxs {

ScoreMap softmax_map(const ScoreMap& scores) {
    ScoreMap out = scores;
    const int channels = out.num_classes();
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            detail::softmax_inplace(std::span<double>(out.pixel(y, x), channels));
    return out;
}

ScoreMap max_fuse(const std::vector<ScoreMap>& maps) {
    if (maps.empty()) throw ValidationError("max_fuse needs at least one map");
    ScoreMap out = maps.front();
    for (std::size_t i = 1; i < maps.size(); ++i) {
        const ScoreMap& m = maps[i];
        if (m.height() != out.height() || m.width() != out.width() ||
            m.num_classes() != out.num_classes())
            throw ValidationError("max_fuse inputs must share dimensions");
        for (std::size_t j = 0; j < out.data().size(); ++j)
            out.data()[j] = std::max(out.data()[j], m.data()[j]);
    }
    return out;
}

LabelMap argmax_label(const ScoreMap& scores) {
    LabelMap out(scores.height(), scores.width());
    const int channels = scores.num_classes();
    for (int y = 0; y < scores.height(); ++y)
        for (int x = 0; x < scores.width(); ++x) {
            const int c =
                detail::argmax_lowest(std::span<const double>(scores.pixel(y, x), channels));
            out.set(y, x, static_cast<std::uint8_t>(c));
        }
    return out;
}

}  // namespace pxs
