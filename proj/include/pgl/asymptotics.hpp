#pragma once

#include "pgl/profile.hpp"

#include <cstddef>
#include <utility>

namespace pgl {

/// Far-field constants estimated from a profile.
struct AsymptoticFit {
    double tail_const_potential = 0.0;   ///< estimate of lim r^p (1 - f^2)
    double tail_const_derivative = 0.0;  ///< estimate of lim r^{p+1} f'
    double target_potential = 0.0;       ///< p / 2
    double target_derivative = 0.0;      ///< p^2 / 4
    std::pair<double, double> fit_window{0.0, 0.0};
    std::pair<double, double> relative_errors{0.0, 0.0};  ///< potential, derivative
};

/// Two-term Richardson extrapolation in 1/r between the ends of the window.
/// The default window starts at the first node with 1 - f^2 < 1e-3 whose local
/// decay exponent r f' / (1 - f) is within 1% of p, and spans a factor 2 in r
/// (capped at R). Past profile.info.analytic_tail_from the profile is the
/// far-field series itself.
///
/// Throws NumericalError when no such window exists (R too small).
AsymptoticFit tail_constants(const Profile& profile);

/// Same estimate on an explicit window [r1, r2] (ends snapped to nodes).
AsymptoticFit tail_constants(const Profile& profile, double r1, double r2);

struct GradientBound {
    double sup_norm = 0.0;
    double location = 0.0;
    std::size_t index = 0;
    bool at_origin = false;  ///< the maximum sits at node 0
};

/// Maximum of |grad u| over the nodes.
GradientBound gradient_bound_check(const Profile& profile);

/// p max_{[0,a]} |g - g0|, g = |grad u|^p, g0 = (1/p)(1 - r^2/2)^2. Needs 0 < a < sqrt 2.
double g_vs_g0(const Profile& profile, double a);

struct CompactRate {
    double sup_f_dev = 0.0;   ///< max_{[0,b]} |f - r / sqrt 2|
    double sup_df_dev = 0.0;  ///< max_{[0,b]} |f' - 1 / sqrt 2|
};

/// Needs 0 < b < sqrt 2.
CompactRate compact_rate_check(const Profile& profile, double b);

}  // namespace pgl
