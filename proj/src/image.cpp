#include "pixelscene/image.hpp"

namespace pxs {

Image crop(const Image& image, const BoundingBox& box) {
    if (!box.valid()) throw ValidationError("degenerate bounding box");
    if (box.x0 < 0 || box.y0 < 0 || box.x1 > image.width() || box.y1 > image.height())
        throw ValidationError("crop box out of bounds");
    Image out(box.height(), box.width());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            for (int ch = 0; ch < 3; ++ch)
                out.set(y, x, ch, image.at(box.y0 + y, box.x0 + x, ch));
    return out;
}

Image mirror_horizontal(const Image& image) {
    Image out(image.height(), image.width());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            for (int ch = 0; ch < 3; ++ch)
                out.set(y, x, ch, image.at(y, image.width() - 1 - x, ch));
    return out;
}

}  // namespace pxs
