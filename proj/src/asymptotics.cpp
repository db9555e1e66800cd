#include "pgl/asymptotics.hpp"

#include "pgl/error.hpp"

#include <algorithm>
#include <cmath>

namespace pgl {
namespace {

// value at r1, r2 -> L where F(r) = L + A / r
double richardson(double r1, double F1, double r2, double F2) { return (r2 * F2 - r1 * F1) / (r2 - r1); }

}  // namespace

AsymptoticFit tail_constants(const Profile& profile, double r1, double r2) {
    const double p = profile.params.p();
    const auto& grid = profile.grid;
    if (!(r1 > 0.0 && r2 > r1 && r2 <= grid.radius()))
        throw InvalidArgument("tail_constants: need 0 < r1 < r2 <= R");
    std::size_t i1 = grid.last_node_not_after(r1);
    if (grid[i1] < r1 && i1 + 1 < grid.size()) ++i1;
    const std::size_t i2 = grid.last_node_not_after(r2);
    if (i2 <= i1) throw NumericalError("tail_constants: fit window holds fewer than two nodes", r1);

    auto pot = [&](std::size_t i) {
        const double w = profile.tail[i] * (1.0 + profile.f[i]);
        return std::pow(grid[i], p) * w;
    };
    auto der = [&](std::size_t i) { return std::pow(grid[i], p + 1.0) * profile.df[i]; };

    AsymptoticFit fit;
    fit.target_potential = 0.5 * p;
    fit.target_derivative = 0.25 * p * p;
    fit.fit_window = {grid[i1], grid[i2]};
    fit.tail_const_potential = richardson(grid[i1], pot(i1), grid[i2], pot(i2));
    fit.tail_const_derivative = richardson(grid[i1], der(i1), grid[i2], der(i2));
    fit.relative_errors = {std::abs(fit.tail_const_potential / fit.target_potential - 1.0),
                           std::abs(fit.tail_const_derivative / fit.target_derivative - 1.0)};
    return fit;
}

AsymptoticFit tail_constants(const Profile& profile) {
    const auto& grid = profile.grid;
    // 1 - f^2 alone is not deep enough at large p: just past the corner near
    // sqrt 2 it is already tiny while f' is still settling. Also ask for the
    // local decay exponent -r (1-f)' / (1-f) to be within 1% of p.
    const double p = profile.params.p();
    auto deep = [&](std::size_t i) {
        const double q = profile.tail[i];
        if (!(grid[i] > 0.0 && q > 0.0 && q * (1.0 + profile.f[i]) < 1e-3)) return false;
        const double exponent = profile.h[i] * profile.f[i] / q;
        return std::abs(exponent - p) < 0.01 * p;
    };
    std::size_t i1 = 0;
    while (i1 < grid.size() && !deep(i1)) ++i1;
    const double R = grid.radius();
    if (i1 + 1 >= grid.size())
        throw NumericalError("tail_constants: no resolved deep-tail node before R (larger R, or a shooting profile)", R);
    return tail_constants(profile, grid[i1], std::min(2.0 * grid[i1], R));
}

GradientBound gradient_bound_check(const Profile& profile) {
    GradientBound b;
    const auto& g = profile.gradient_norm;
    const auto it = std::max_element(g.begin(), g.end());
    b.index = static_cast<std::size_t>(it - g.begin());
    b.sup_norm = *it;
    b.location = profile.grid[b.index];
    b.at_origin = b.index == 0;
    return b;
}

double g_vs_g0(const Profile& profile, double a) {
    if (!(a > 0.0 && a < std::sqrt(2.0))) throw InvalidArgument("g_vs_g0: need 0 < a < sqrt(2)");
    const double p = profile.params.p();
    double d = 0.0;
    for (std::size_t i = 0; i < profile.f.size() && profile.grid[i] <= a; ++i) {
        const double r = profile.grid[i];
        const double g = std::pow(profile.gradient_norm[i], p);
        const double g0 = std::pow(1.0 - 0.5 * r * r, 2) / p;
        d = std::max(d, std::abs(g - g0));
    }
    return p * d;
}

CompactRate compact_rate_check(const Profile& profile, double b) {
    if (!(b > 0.0 && b < std::sqrt(2.0))) throw InvalidArgument("compact_rate_check: need 0 < b < sqrt(2)");
    CompactRate c;
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < profile.f.size() && profile.grid[i] <= b; ++i) {
        c.sup_f_dev = std::max(c.sup_f_dev, std::abs(profile.f[i] - s * profile.grid[i]));
        c.sup_df_dev = std::max(c.sup_df_dev, std::abs(profile.df[i] - s));
    }
    return c;
}

}  // namespace pgl
