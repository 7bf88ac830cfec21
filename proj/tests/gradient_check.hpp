#pragma once

// Central finite-difference oracle for toynet backprop. The loss is piecewise
// smooth (ReLU, max fusion); a stencil that straddles a kink makes the
// quotient diverge from the one-sided derivative backprop reports, so
// coordinates whose quotient is unstable across step sizes are resampled.

#include <algorithm>
#include <cmath>

#include "pixelscene/common.hpp"
#include "pixelscene/toynet.hpp"

namespace testutil {

struct GradientCheckResult {
    int checked = 0;
    int passed = 0;
    double worst_rel_error = 0.0;
};

inline GradientCheckResult gradient_check(pxs::ToyNet net, const pxs::Image& image,
                                          const pxs::LabelMap& gt, int layer,
                                          int coords_per_layer, pxs::Rng& rng,
                                          double eps = 1e-4, double tol = 1e-4) {
    const pxs::LossAndGradients analytic = pxs::loss_and_gradients(net, image, gt);
    const std::size_t weight_count = net.layer(layer).weights.size();
    const std::size_t bias_count = net.layer(layer).bias.size();

    GradientCheckResult result;
    int attempts = 0;
    while (result.checked < coords_per_layer && attempts < coords_per_layer * 10) {
        ++attempts;
        const std::size_t k = rng.next_below(weight_count + bias_count);
        double* param = k < weight_count ? &net.layer(layer).weights[k]
                                         : &net.layer(layer).bias[k - weight_count];
        const double g = k < weight_count ? analytic.layers[layer].weights[k]
                                          : analytic.layers[layer].bias[k - weight_count];
        const double saved = *param;
        const auto quotient = [&](double step) {
            *param = saved + step;
            const double up = pxs::loss_and_gradients(net, image, gt).loss;
            *param = saved - step;
            const double down = pxs::loss_and_gradients(net, image, gt).loss;
            *param = saved;
            return (up - down) / (2.0 * step);
        };
        const double coarse = quotient(eps);
        const double fine = quotient(eps / 10.0);
        const double stencil_drift =
            std::fabs(coarse - fine) / std::max({std::fabs(coarse), std::fabs(fine), 1e-8});
        if (stencil_drift > 1e-5) continue;  // kink inside the stencil

        const double rel =
            std::fabs(g - coarse) / std::max({std::fabs(g), std::fabs(coarse), 1e-8});
        ++result.checked;
        if (rel < tol) ++result.passed;
        result.worst_rel_error = std::max(result.worst_rel_error, rel);
    }
    return result;
}

}  // namespace testutil
