#include "twinforge/optimize.hpp"

#include "twinforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace twinforge {

namespace {

void check_bounds(const Bounds& bounds) {
    if (bounds.box.empty()) {
        throw Error(ErrorKind::invalid_parameter, "optimizer needs at least one dimension");
    }
    for (const auto& [lo, hi] : bounds.box) {
        if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw Error(ErrorKind::invalid_parameter, "optimizer bounds must be finite, lo <= hi");
        }
    }
}

std::vector<double> clamp_into(const Bounds& bounds, std::vector<double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::clamp(x[i], bounds.box[i].first, bounds.box[i].second);
    }
    return x;
}

} // namespace

OptimizeResult grid_seed(const Objective& f, const Bounds& bounds, int points_per_dim) {
    check_bounds(bounds);
    const std::size_t dims = bounds.box.size();
    const int n = std::max(points_per_dim, 2);

    OptimizeResult best;
    best.value = std::numeric_limits<double>::infinity();

    std::vector<int> idx(dims, 0);
    std::vector<double> x(dims, 0.0);
    while (true) {
        for (std::size_t d = 0; d < dims; ++d) {
            const auto& [lo, hi] = bounds.box[d];
            x[d] = lo + (hi - lo) * static_cast<double>(idx[d]) / static_cast<double>(n - 1);
        }
        const double value = f(x);
        ++best.evaluations;
        if (value < best.value) {
            best.value = value;
            best.x = x;
        }
        std::size_t d = 0;
        while (d < dims && ++idx[d] == n) {
            idx[d] = 0;
            ++d;
        }
        if (d == dims) {
            break;
        }
    }
    return best;
}

OptimizeResult nelder_mead(const Objective& f, const Bounds& bounds,
                           const std::vector<double>& start, const FitSearchOptions& options) {
    check_bounds(bounds);
    const std::size_t dims = bounds.box.size();
    if (start.size() != dims) {
        throw Error(ErrorKind::invalid_parameter, "start point dimension mismatch");
    }

    struct Vertex {
        std::vector<double> x;
        double value;
    };

    OptimizeResult result;
    auto evaluate = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Vertex> simplex;
    simplex.push_back({clamp_into(bounds, start), 0.0});
    simplex.front().value = evaluate(simplex.front().x);
    for (std::size_t d = 0; d < dims; ++d) {
        std::vector<double> x = simplex.front().x;
        const auto& [lo, hi] = bounds.box[d];
        const double width = hi - lo;
        double step = options.simplex_scale * (width > 0.0 ? width : 1.0);
        if (x[d] + step > hi) {
            step = -step;
        }
        x[d] = std::clamp(x[d] + step, lo, hi);
        simplex.push_back({x, evaluate(x)});
    }

    auto order = [&simplex] {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
    };
    order();

    const double alpha = 1.0;
    const double gamma = 2.0;
    const double rho = 0.5;
    const double sigma = 0.5;

    while (result.evaluations < options.max_evaluations) {
        // convergence: simplex extent and value spread
        double extent = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            const double width = std::max(bounds.box[d].second - bounds.box[d].first, 1e-300);
            double lo = simplex.front().x[d];
            double hi = lo;
            for (const Vertex& v : simplex) {
                lo = std::min(lo, v.x[d]);
                hi = std::max(hi, v.x[d]);
            }
            extent = std::max(extent, (hi - lo) / width);
        }
        const double spread = std::abs(simplex.back().value - simplex.front().value);
        if (extent < options.x_tolerance && spread < std::max(options.f_tolerance,
                                                              1e-12 * std::abs(simplex.front().value))) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(dims, 0.0);
        for (std::size_t i = 0; i + 1 < simplex.size(); ++i) {
            for (std::size_t d = 0; d < dims; ++d) {
                centroid[d] += simplex[i].x[d];
            }
        }
        for (double& c : centroid) {
            c /= static_cast<double>(dims);
        }

        auto blend = [&](double factor) {
            std::vector<double> x(dims);
            for (std::size_t d = 0; d < dims; ++d) {
                x[d] = centroid[d] + factor * (centroid[d] - simplex.back().x[d]);
            }
            return clamp_into(bounds, std::move(x));
        };

        const auto reflected = blend(alpha);
        const double f_reflected = evaluate(reflected);
        if (f_reflected < simplex.front().value) {
            const auto expanded = blend(gamma);
            const double f_expanded = evaluate(expanded);
            if (f_expanded < f_reflected) {
                simplex.back() = {expanded, f_expanded};
            } else {
                simplex.back() = {reflected, f_reflected};
            }
        } else if (f_reflected < simplex[simplex.size() - 2].value) {
            simplex.back() = {reflected, f_reflected};
        } else {
            const auto contracted = blend(-rho);
            const double f_contracted = evaluate(contracted);
            if (f_contracted < simplex.back().value) {
                simplex.back() = {contracted, f_contracted};
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 1; i < simplex.size(); ++i) {
                    for (std::size_t d = 0; d < dims; ++d) {
                        simplex[i].x[d] = simplex.front().x[d] +
                                          sigma * (simplex[i].x[d] - simplex.front().x[d]);
                    }
                    simplex[i].x = clamp_into(bounds, std::move(simplex[i].x));
                    simplex[i].value = evaluate(simplex[i].x);
                }
            }
        }
        order();
    }

    order();
    result.x = simplex.front().x;
    result.value = simplex.front().value;
    return result;
}

OptimizeResult grid_then_refine(const Objective& f, const Bounds& bounds,
                                const FitSearchOptions& options) {
    OptimizeResult seed = grid_seed(f, bounds, options.grid_points_per_dim);
    FitSearchOptions local = options;
    local.max_evaluations = std::max(0, options.max_evaluations - seed.evaluations);
    if (local.max_evaluations == 0) {
        return seed;
    }
    OptimizeResult refined = nelder_mead(f, bounds, seed.x, local);
    refined.evaluations += seed.evaluations;
    if (seed.value < refined.value) {
        refined.x = seed.x;
        refined.value = seed.value;
    }
    return refined;
}

} // namespace twinforge
