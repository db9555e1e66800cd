#include "pgl/profile.hpp"

#include "pgl/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pgl {

Params::Params(double p) : p_(p) {
    if (!(p > 2.0)) throw InvalidArgument("p must exceed 2");
    if (!(p <= 1000.0)) throw InvalidArgument("p must not exceed 1000");
}

double default_radius(const Params& params) {
    const double p = params.p();
    if (params.slow_tail()) return 40.0;
    if (p <= 6.0) return 20.0;
    return std::max(8.0, 4.0 * std::pow(2.0, 4.0 / p));
}

std::string to_string(SolverKind kind) {
    return kind == SolverKind::shooting ? "shooting" : "variational";
}


SolverKind default_solver(const Params& params) {
    return params.p() <= 100.0 ? SolverKind::shooting : SolverKind::variational;
}

RadialGrid default_grid(const Params& params, std::size_t nodes) {
    return RadialGrid::graded(default_radius(params), nodes);
}

Profile solve(const Params& params, const RadialGrid& grid, SolverKind kind, double tol) {
    if (kind == SolverKind::shooting) {
        ShootingOptions o;
        if (tol > 0.0) o.tol = tol;
        return solve_shooting(params, grid, o);
    }
    VariationalOptions o;
    if (tol > 0.0) o.tol = tol;
    return solve_variational(params, grid, o);
}

double h_prime(double p, double r, double f, double tail, double h) {
    const double h2 = h * h;
    const double lead = (1.0 + h2) / (1.0 + (p - 1.0) * h2);
    const double core = (1.0 - h) * (1.0 + (p - 1.0) * h) / r;
    // (2/p) |grad u|^{2-p} r (1 - f^2), evaluated in logs: |grad u| ~ 1/r in the
    // tail makes the power overflow long before the product does
    double forcing = 0.0;
    const double one_minus_f2 = tail * (1.0 + f);
    if (one_minus_f2 != 0.0 && f > 0.0) {
        const double log_grad2 = 2.0 * std::log(f / r) + std::log1p(h2);
        const double log_mag = 0.5 * (2.0 - p) * log_grad2 + std::log(std::abs(one_minus_f2)) + std::log(r);
        forcing = std::copysign(2.0 / p * std::exp(log_mag), one_minus_f2);
    }
    return lead * (core - forcing);
}

OdeRhs profile_rhs(double p) {
    return [p](double r, std::span<const double> y, std::span<double> dy) {
        const double f = y[0], tail = y[1], h = y[2];
        const double df = h * f / r;
        dy[0] = df;
        dy[1] = -df;
        dy[2] = h_prime(p, r, f, tail, h);
    };
}

double series_coefficient(double p, double a) { return std::pow(2.0 * a * a, 1.0 - 0.5 * p) / (p * p); }

double f_infinity(double r) {
    if (r < 0.0) throw InvalidArgument("f_infinity: r must be nonnegative");
    return r < std::sqrt(2.0) ? r / std::sqrt(2.0) : 1.0;
}

namespace {

// derivative of the quadratic through (x0,y0),(x1,y1),(x2,y2), evaluated at x
double quadratic_slope(double x0, double x1, double x2, double y0, double y1, double y2, double x) {
    const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    return l0 * y0 + l1 * y1 + l2 * y2;
}

}  // namespace

Profile profile_from_values(const Params& params, const RadialGrid& grid, std::vector<double> f,
                            SolverInfo info) {
    const std::size_t n = grid.size();
    if (f.size() != n) throw InvalidArgument("profile_from_values: length mismatch");
    const auto r = grid.nodes();
    Profile out{params, grid, {}, {}, {}, {}, {}, 0.0, info};
    out.df.resize(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        out.df[i] = quadratic_slope(r[i - 1], r[i], r[i + 1], f[i - 1], f[i], f[i + 1], r[i]);
    out.df[n - 1] = quadratic_slope(r[n - 3], r[n - 2], r[n - 1], f[n - 3], f[n - 2], f[n - 1], r[n - 1]);
    if (r[0] == 0.0) {
        // f / r ~ a + b r^2 through nodes 1 and 2
        const double g1 = f[1] / r[1], g2 = f[2] / r[2];
        out.df[0] = (g1 * r[2] * r[2] - g2 * r[1] * r[1]) / (r[2] * r[2] - r[1] * r[1]);
    } else {
        out.df[0] = quadratic_slope(r[0], r[1], r[2], f[0], f[1], f[2], r[0]);
    }
    out.f_prime_at_zero = out.df[0];
    out.h.resize(n);
    out.gradient_norm.resize(n);
    out.tail.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.tail[i] = 1.0 - f[i];
        if (r[i] == 0.0) {
            out.h[i] = 1.0;
            out.gradient_norm[i] = std::sqrt(2.0) * out.df[i];
        } else {
            out.h[i] = f[i] > 0.0 ? r[i] * out.df[i] / f[i] : 1.0;
            out.gradient_norm[i] = std::hypot(out.df[i], f[i] / r[i]);
        }
    }
    out.f = std::move(f);
    return out;
}

double sup_distance(const Profile& a, const Profile& b) {
    if (a.f.size() != b.f.size()) throw InvalidArgument("sup_distance: grids differ");
    double d = 0.0;
    for (std::size_t i = 0; i < a.f.size(); ++i) {
        if (a.grid[i] != b.grid[i]) throw InvalidArgument("sup_distance: grids differ");
        d = std::max(d, std::abs(a.f[i] - b.f[i]));
    }
    return d;
}

bool InvariantReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const InvariantCheck& InvariantReport::at(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw InvalidArgument("InvariantReport: no check named " + name);
}

InvariantReport audit(const Profile& profile, double tol) {
    const auto r = profile.grid.nodes();
    const std::size_t n = r.size();
    const double p = profile.params.p();
    InvariantReport report;

    auto check = [&](const std::string& name, auto&& violation, std::size_t first, std::size_t last) {
        InvariantCheck c{name, true, 0.0, 0.0};
        for (std::size_t i = first; i < last; ++i) {
            const double v = violation(i);
            if (!(v <= c.worst) || std::isnan(v)) {
                c.worst = std::isnan(v) ? INFINITY : v;
                c.radius = r[i];
            }
        }
        c.pass = c.worst <= tol;
        report.checks.push_back(c);
    };
    const std::size_t first = r[0] == 0.0 ? 1 : 0;

    check("f_range", [&](std::size_t i) {
        if (r[i] == 0.0) return std::abs(profile.f[i]);
        return std::max(-profile.f[i], -profile.tail[i]);
    }, 0, n);
    check("df_positive", [&](std::size_t i) { return -profile.df[i]; }, 0, n);
    check("h_bounds", [&](std::size_t i) {
        return std::max(profile.h[i] - 1.0, -1.0 / (p - 1.0) - profile.h[i]);
    }, first, n);
    check("h_nonincreasing", [&](std::size_t i) { return profile.h[i + 1] - profile.h[i]; }, first, n - 1);
    check("f_over_r_decreasing", [&](std::size_t i) {
        return profile.f[i + 1] / r[i + 1] - profile.f[i] / r[i];
    }, first, n - 1);
    check("concavity", [&](std::size_t i) {
        // divided second difference times h0 h1: a value-level quantity
        const double h0 = r[i] - r[i - 1], h1 = r[i + 1] - r[i];
        const double d2 = 2.0 * ((profile.f[i + 1] - profile.f[i]) / h1 - (profile.f[i] - profile.f[i - 1]) / h0) /
                          (h0 + h1);
        return d2 * h0 * h1;
    }, 1, n - 1);
    {
        InvariantCheck c{"h_at_origin", true, 0.0, r[first]};
        c.worst = std::max(0.0, std::abs(profile.h[first] - 1.0) - 0.01);
        c.pass = std::abs(profile.h[first] - 1.0) <= 0.01;
        report.checks.push_back(c);
    }
    {
        InvariantCheck c{"f_prime_at_zero_positive", true, 0.0, 0.0};
        c.worst = std::max(0.0, -profile.f_prime_at_zero);
        c.pass = profile.f_prime_at_zero > 0.0;
        report.checks.push_back(c);
    }
    return report;
}

}  // namespace pgl
