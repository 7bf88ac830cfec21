#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pixelscene/grid.hpp"

namespace pxs {

namespace detail {

// In-place softmax of one channel vector. Max-subtraction keeps exp() in
// range; the result is unchanged because softmax is shift-invariant.
template <typename T>
void softmax_inplace(std::span<T> v) {
    T hi = v[0];
    for (const T x : v) hi = std::max(hi, x);
    double sum = 0.0;
    for (T& x : v) {
        const double e = std::exp(static_cast<double>(x) - static_cast<double>(hi));
        x = static_cast<T>(e);
        sum += e;
    }
    for (T& x : v) x = static_cast<T>(static_cast<double>(x) / sum);
}

template <typename T>
int argmax_lowest(std::span<const T> v) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(v.size()); ++c)
        if (v[c] > v[best]) best = c;
    return best;
}

}  // namespace detail

// Per-pixel class probabilities from raw scores.
ScoreMap softmax_map(const ScoreMap& scores);

// Elementwise maximum across equally sized maps (the multi-scale fusion rule).
ScoreMap max_fuse(const std::vector<ScoreMap>& maps);

// Per-pixel argmax over classes; ties go to the lowest class index.
LabelMap argmax_label(const ScoreMap& scores);

}  // namespace pxs
