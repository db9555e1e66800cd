#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pgl {

/// Right-hand side y' = F(r, y); writes F into dy.
using OdeRhs = std::function<void(double r, std::span<const double> y, std::span<double> dy)>;

/// Returns true when integration should stop after an accepted step.
using OdeStop = std::function<bool(double r, std::span<const double> y)>;

struct OdeOptions {
    /// Radii (nondecreasing, inside [r_start, r_end]) where the dense output is
    /// sampled. Radii beyond a stop event are left unsampled.
    std::vector<double> output_radii;
    /// Optional early termination test evaluated after each accepted step.
    OdeStop stop;
    /// Per-component absolute floor added to the relative error scale. Empty
    /// means a floor of 1e-300 (pure relative control).
    std::vector<double> abs_floor;
    double initial_step = 0.0;
    std::size_t max_steps = 2000000;
};

struct OdeTrajectory {
    std::vector<double> radii;               ///< sampled output radii
    std::vector<std::vector<double>> states; ///< dense-output states at radii
    double r_reached = 0.0;
    std::vector<double> final_state;
    bool stopped = false;                    ///< terminated by the stop predicate
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(r, y) from r_start to
/// r_end. The embedded error of every accepted step satisfies
/// |err_i| <= tol * max(|y_i|, |y_new_i|) + floor_i. Dense output is the
/// fourth-order continuous extension of the method.
///
/// Throws InvalidArgument for tol outside (0, 1e-3], r_start >= r_end or a
/// non-finite rhs at y0. Throws NumericalError (with the radius reached) on step
/// underflow (step < 1e-14 * span) or when the state becomes non-finite.
OdeTrajectory integrate_ode(const OdeRhs& rhs, double r_start, double r_end,
                            std::span<const double> y0, double tol,
                            const OdeOptions& options = {});

}  // namespace pgl
