#pragma once

#include <cmath>
#include <vector>

namespace pxs::interp {

// One output sample = lerp between source indices i0 and i1 with weight t on
// i1. Shared by the forward resize and its backprop transpose so both sides
// always use identical taps.
struct LinearTap {
    int i0 = 0;
    int i1 = 0;
    double t = 0.0;
};

// align-corners-false sample centers, clamped to the valid range
inline std::vector<LinearTap> bilinear_taps(int src, int dst) {
    std::vector<LinearTap> taps(dst);
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
        double s = (i + 0.5) * scale - 0.5;
        if (s < 0.0) s = 0.0;
        if (s > src - 1) s = src - 1;
        const int i0 = static_cast<int>(s);
        taps[i].i0 = i0;
        taps[i].i1 = i0 + 1 < src ? i0 + 1 : i0;
        taps[i].t = s - i0;
    }
    return taps;
}

inline std::vector<int> nearest_taps(int src, int dst) {
    std::vector<int> taps(dst);
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
        int s = static_cast<int>(std::floor((i + 0.5) * scale));
        if (s > src - 1) s = src - 1;
        if (s < 0) s = 0;
        taps[i] = s;
    }
    return taps;
}

// a + t*(b-a) rather than (1-t)*a + t*b: exact when a == b, so constant
// grids survive resizing bit-for-bit.
template <typename T>
inline T lerp(T a, T b, double t) {
    return static_cast<T>(a + t * (b - a));
}

}  // namespace pxs::interp
