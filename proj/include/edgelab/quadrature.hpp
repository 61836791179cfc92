#pragma once

#include <functional>

namespace edgelab {

struct QuadratureOptions {
    double local_tol = 1e-12;      // per-panel error estimate target
    double min_panel = 1e-6;       // hard floor on panel width
    int max_depth = 40;
};

/// Adaptive Simpson integration of f over [a, b].
/// Throws std::runtime_error if the local estimate cannot be met before
/// hitting max_depth with panels still wider than min_panel.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opt = {});

}  // namespace edgelab
