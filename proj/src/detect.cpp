#include "pixelscene/detect.hpp"

#include <algorithm>

namespace pxs {

BinaryMask BinaryMask::from_labels(const LabelMap& labels, int class_id) {
    BinaryMask mask;
    mask.height = labels.height();
    mask.width = labels.width();
    mask.data.assign(labels.data().size(), 0);
    for (std::size_t i = 0; i < labels.data().size(); ++i)
        mask.data[i] = labels.data()[i] == class_id ? 1 : 0;
    return mask;
}

std::vector<ConnectedComponent> connected_components(const BinaryMask& mask) {
    const int h = mask.height;
    const int w = mask.width;
    std::vector<ConnectedComponent> components;
    if (h == 0 || w == 0) return components;

    std::vector<std::uint8_t> visited(mask.data.size(), 0);
    std::vector<std::pair<int, int>> stack;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t si = static_cast<std::size_t>(sy) * w + sx;
            if (!mask.data[si] || visited[si]) continue;
            ConnectedComponent comp;
            comp.box = {sx, sy, sx + 1, sy + 1};
            visited[si] = 1;
            stack.clear();
            stack.emplace_back(sy, sx);
            while (!stack.empty()) {
                const auto [y, x] = stack.back();
                stack.pop_back();
                comp.pixels.emplace_back(y, x);
                comp.box.x0 = std::min(comp.box.x0, x);
                comp.box.y0 = std::min(comp.box.y0, y);
                comp.box.x1 = std::max(comp.box.x1, x + 1);
                comp.box.y1 = std::max(comp.box.y1, y + 1);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dy == 0 && dx == 0) continue;
                        const int ny = y + dy;
                        const int nx = x + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                        if (!mask.data[ni] || visited[ni]) continue;
                        visited[ni] = 1;
                        stack.emplace_back(ny, nx);
                    }
                }
            }
            std::sort(comp.pixels.begin(), comp.pixels.end());
            components.push_back(std::move(comp));
        }
    }
    return components;
}

std::vector<Detection> detect_objects(const LabelMap& labels, const ScoreMap& confidences,
                                      const std::vector<int>& object_classes, int min_area) {
    if (labels.height() != confidences.height() || labels.width() != confidences.width())
        throw ValidationError("detect_objects: labels and confidences must share dimensions");

    std::vector<Detection> detections;
    for (const int c : object_classes) {
        if (c < 0 || c >= confidences.num_classes())
            throw ValidationError("detect_objects: class id " + std::to_string(c) +
                                  " outside score map range");
        const BinaryMask mask = BinaryMask::from_labels(labels, c);
        for (const ConnectedComponent& comp : connected_components(mask)) {
            if (static_cast<int>(comp.pixels.size()) < min_area) continue;
            double sum = 0.0;
            long long count = 0;
            for (int y = comp.box.y0; y < comp.box.y1; ++y) {
                for (int x = comp.box.x0; x < comp.box.x1; ++x) {
                    if (labels.at(y, x) != c) continue;
                    sum += confidences.at(y, x, c);
                    ++count;
                }
            }
            detections.push_back(Detection{c, comp.box, sum / static_cast<double>(count), count});
        }
    }
    return detections;
}

}  // namespace pxs
