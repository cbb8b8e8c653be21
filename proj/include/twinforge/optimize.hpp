#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace twinforge {

using Objective = std::function<double(const std::vector<double>&)>;

struct Bounds {
    std::vector<std::pair<double, double>> box; // per-dimension [lower, upper]
};

struct FitSearchOptions {
    int grid_points_per_dim = 9;
    int max_evaluations = 400;
    double x_tolerance = 1e-6;   // relative to box width
    double f_tolerance = 1e-12;
    double simplex_scale = 0.08; // initial simplex size relative to box width
};

struct OptimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Best vertex of a regular grid over the box. Deterministic scan order.
OptimizeResult grid_seed(const Objective& f, const Bounds& bounds, int points_per_dim);

/// Bounded Nelder-Mead from a start point; candidate vertices are clamped
/// into the box. Deterministic for identical inputs.
OptimizeResult nelder_mead(const Objective& f, const Bounds& bounds,
                           const std::vector<double>& start, const FitSearchOptions& options);

/// Coarse grid seed followed by local refinement; the standard fit search.
OptimizeResult grid_then_refine(const Objective& f, const Bounds& bounds,
                                const FitSearchOptions& options = {});

} // namespace twinforge
