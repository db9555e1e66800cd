#include "pgl/banded.hpp"
#include "pgl/error.hpp"
#include "pgl/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pgl {
namespace {

// one Gauss point of one element, with the element's shape functions
struct QPoint {
    std::array<std::size_t, 3> idx{};
    int m = 0;          // 3 (quadratic) or 2 (linear)
    double wr = 0.0;    // weight times r
    double r = 0.0;
    std::array<double, 3> phi{}, dphi{};
};

std::vector<QPoint> quadrature_points(const RadialGrid& grid) {
    static constexpr std::array<double, 3> gx{-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr std::array<double, 3> gw{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const auto x = grid.nodes();
    const std::size_t n = x.size();
    std::vector<QPoint> out;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
        const double x0 = x[i], x1 = x[i + 1], x2 = x[i + 2];
        const double half = 0.5 * (x2 - x0), mid = 0.5 * (x0 + x2);
        for (int q = 0; q < 3; ++q) {
            QPoint pt;
            pt.idx = {i, i + 1, i + 2};
            pt.m = 3;
            pt.r = mid + half * gx[q];
            pt.wr = half * gw[q] * pt.r;
            const double r = pt.r;
            pt.phi = {(r - x1) * (r - x2) / ((x0 - x1) * (x0 - x2)), (r - x0) * (r - x2) / ((x1 - x0) * (x1 - x2)),
                      (r - x0) * (r - x1) / ((x2 - x0) * (x2 - x1))};
            pt.dphi = {((r - x1) + (r - x2)) / ((x0 - x1) * (x0 - x2)),
                       ((r - x0) + (r - x2)) / ((x1 - x0) * (x1 - x2)),
                       ((r - x0) + (r - x1)) / ((x2 - x0) * (x2 - x1))};
            out.push_back(pt);
        }
    }
    if (i + 1 < n) {
        const double x0 = x[i], x1 = x[i + 1];
        const double half = 0.5 * (x1 - x0), mid = 0.5 * (x0 + x1);
        for (int q = 0; q < 3; ++q) {
            QPoint pt;
            pt.idx = {i, i + 1, i + 1};
            pt.m = 2;
            pt.r = mid + half * gx[q];
            pt.wr = half * gw[q] * pt.r;
            pt.phi = {(x1 - pt.r) / (x1 - x0), (pt.r - x0) / (x1 - x0), 0.0};
            pt.dphi = {-1.0 / (x1 - x0), 1.0 / (x1 - x0), 0.0};
            out.push_back(pt);
        }
    }
    return out;
}

struct Problem {
    double p;
    std::size_t n;
    std::vector<QPoint> pts;
    std::vector<double> r;

    double node_radius(std::size_t i) const { return r[i]; }

    double energy(std::span<const double> f) const {
        // compensated: line searches compare energies a few ulps apart
        double e = 0.0, comp = 0.0;
        for (const auto& q : pts) {
            double v = 0.0, d = 0.0;
            for (int j = 0; j < q.m; ++j) {
                v += q.phi[j] * f[q.idx[j]];
                d += q.dphi[j] * f[q.idx[j]];
            }
            const double X = d * d + v * v / (q.r * q.r);
            const double w = 1.0 - v * v;
            const double term = q.wr * (std::pow(X, 0.5 * p) + 0.5 * w * w);
            const double t = e + term;
            comp += std::abs(e) >= std::abs(term) ? (e - t) + term : (term - t) + e;
            e = t;
        }
        return e + comp;
    }

    /// energy(y) - energy(x), formed from y - x so that it keeps its relative
    /// accuracy when the two energies agree to many digits.
    double energy_change(std::span<const double> x, std::span<const double> y) const {
        double e = 0.0, comp = 0.0;
        for (const auto& q : pts) {
            double v = 0.0, d = 0.0, dv = 0.0, dd = 0.0;
            for (int j = 0; j < q.m; ++j) {
                const double fx = x[q.idx[j]], df = y[q.idx[j]] - fx;
                v += q.phi[j] * fx;
                d += q.dphi[j] * fx;
                dv += q.phi[j] * df;
                dd += q.dphi[j] * df;
            }
            const double r2 = q.r * q.r;
            const double X = d * d + v * v / r2;
            const double dX = dd * (2.0 * d + dd) + dv * (2.0 * v + dv) / r2;
            const double kin = X > 0.0 ? std::pow(X, 0.5 * p) * std::expm1(0.5 * p * std::log1p(dX / X))
                                       : std::pow(std::max(X + dX, 0.0), 0.5 * p);
            const double w = 1.0 - v * v, dw = -dv * (2.0 * v + dv);
            const double term = q.wr * (kin + 0.5 * dw * (2.0 * w + dw));
            const double t = e + term;
            comp += std::abs(e) >= std::abs(term) ? (e - t) + term : (term - t) + e;
            e = t;
        }
        return e + comp;
    }

    std::pair<double, double> terms(std::span<const double> f) const {
        double kin = 0.0, pot = 0.0;
        for (const auto& q : pts) {
            double v = 0.0, d = 0.0;
            for (int j = 0; j < q.m; ++j) {
                v += q.phi[j] * f[q.idx[j]];
                d += q.dphi[j] * f[q.idx[j]];
            }
            const double w = 1.0 - v * v;
            kin += q.wr * std::pow(d * d + v * v / (q.r * q.r), 0.5 * p);
            pot += q.wr * 0.5 * w * w;
        }
        return {kin, pot};
    }

    std::vector<double> gradient(std::span<const double> f) const {
        std::vector<double> g(n, 0.0);
        for (const auto& q : pts) {
            double v = 0.0, d = 0.0;
            for (int j = 0; j < q.m; ++j) {
                v += q.phi[j] * f[q.idx[j]];
                d += q.dphi[j] * f[q.idx[j]];
            }
            const double r2 = q.r * q.r;
            const double X = d * d + v * v / r2;
            const double G = X > 0.0 ? std::pow(X, 0.5 * p - 1.0) : 0.0;
            for (int j = 0; j < q.m; ++j)
                g[q.idx[j]] += q.wr * (p * G * (d * q.dphi[j] + v * q.phi[j] / r2) -
                                       2.0 * v * (1.0 - v * v) * q.phi[j]);
        }
        return g;
    }

    BandedSymmetricMatrix hessian(std::span<const double> f) const {
        BandedSymmetricMatrix H(n, 2);
        for (const auto& q : pts) {
            double v = 0.0, d = 0.0;
            for (int j = 0; j < q.m; ++j) {
                v += q.phi[j] * f[q.idx[j]];
                d += q.dphi[j] * f[q.idx[j]];
            }
            const double r2 = q.r * q.r;
            const double X = d * d + v * v / r2;
            const double G = X > 0.0 ? std::pow(X, 0.5 * p - 1.0) : 0.0;
            const double G2 = X > 0.0 ? std::pow(X, 0.5 * p - 2.0) : 0.0;
            std::array<double, 3> a{};
            for (int j = 0; j < q.m; ++j) a[j] = d * q.dphi[j] + v * q.phi[j] / r2;
            for (int j = 0; j < q.m; ++j)
                for (int k = 0; k <= j; ++k) {
                    const double hjk =
                        q.wr * (p * G * (q.dphi[j] * q.dphi[k] + q.phi[j] * q.phi[k] / r2) +
                                p * (p - 2.0) * G2 * a[j] * a[k] + (6.0 * v * v - 2.0) * q.phi[j] * q.phi[k]);
                    // the diagonal is visited once, off-diagonal pairs once each
                    H.add(q.idx[j], q.idx[k], hjk);
                }
        }
        return H;
    }
};

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

double discrete_energy(double p, const RadialGrid& grid, std::span<const double> f) {
    if (f.size() != grid.size()) throw InvalidArgument("discrete_energy: length mismatch");
    const Problem pr{p, grid.size(), quadrature_points(grid), {grid.nodes().begin(), grid.nodes().end()}};
    return pr.energy(f);
}

std::pair<double, double> discrete_energy_terms(double p, const RadialGrid& grid, std::span<const double> f) {
    if (f.size() != grid.size()) throw InvalidArgument("discrete_energy_terms: length mismatch");
    const Problem pr{p, grid.size(), quadrature_points(grid), {grid.nodes().begin(), grid.nodes().end()}};
    return pr.terms(f);
}

namespace {

// Projected Newton descent on x in place; x[0] and x[fixed_from..] stay fixed.
SolverInfo minimize(const Problem& pr, std::vector<double>& x, const VariationalOptions& opts,
                    std::size_t fixed_from = 0) {
    const std::size_t n = pr.n;
    if (fixed_from == 0) fixed_from = n - 1;
    const std::vector<double> pinned(x.begin() + static_cast<std::ptrdiff_t>(fixed_from), x.end());
    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto project = [&](std::vector<double>& y) {
        for (std::size_t i = 1; i < fixed_from; ++i) y[i] = std::clamp(y[i], 0.0, 1.0);
        y[0] = 0.0;
        std::copy(pinned.begin(), pinned.end(), y.begin() + static_cast<std::ptrdiff_t>(fixed_from));
    };
    // free coordinates: interior nodes not pinned at a bound by the gradient
    auto blocked = [&](const std::vector<double>& y, const std::vector<double>& g, std::size_t i) {
        return i == 0 || i >= fixed_from || (y[i] <= 0.0 && g[i] > 0.0) || (y[i] >= 1.0 && g[i] < 0.0);
    };
    auto projected = [&](const std::vector<double>& y, const std::vector<double>& g) {
        std::vector<double> pg(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (!blocked(y, g, i)) pg[i] = g[i];
        return pg;
    };

    double E = pr.energy(x);
    if (!std::isfinite(E)) throw NumericalError("variational: initial energy is not finite");
    if (opts.energy_history) opts.energy_history->assign(1, E);
    std::vector<double> g = pr.gradient(x);
    std::vector<double> pg = projected(x, g);
    std::vector<double> s_prev, y_prev;

    SolverInfo info{SolverKind::variational, opts.tol, 0, max_abs(pg), 0.0};
    for (std::size_t it = 0;; ++it) {
        info.iterations = it;
        info.residual = max_abs(pg);
        if (info.residual <= opts.tol) break;
        if (it >= opts.max_iterations)
            throw NumericalError("variational: no convergence after " + std::to_string(it) +
                                 " iterations (projected gradient " + std::to_string(info.residual) + ")");

        // Newton direction on the free coordinates
        BandedSymmetricMatrix H = pr.hessian(x);
        std::vector<double> rhs(n, 0.0);
        double diag_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(H(i, i)));
        BandedSymmetricMatrix Hf(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            if (blocked(x, g, i)) {
                Hf.add(i, i, 1.0);
                continue;
            }
            rhs[i] = -g[i];
            for (std::size_t j = (i >= 2 ? i - 2 : 0); j <= i; ++j)
                if (!blocked(x, g, j)) Hf.add(i, j, H(i, j));
        }
        std::vector<double> d;
        for (double shift = 0.0; d.empty() && shift <= 1e6 * diag_max;
             shift = shift == 0.0 ? 1e-10 * diag_max : shift * 100.0) {
            BandedSymmetricMatrix Hs = Hf;
            if (shift > 0.0)
                for (std::size_t i = 0; i < n; ++i)
                    if (!blocked(x, g, i)) Hs.add(i, i, shift);
            d = cholesky_solve(Hs, rhs);
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope += g[i] * (d.empty() ? 0.0 : d[i]);
        const bool newton = !d.empty() && slope < 0.0;
        if (!newton) {
            // Barzilai-Borwein projected gradient step
            double step = 1.0 / std::max(diag_max, 1e-300);
            if (!s_prev.empty()) {
                double ss = 0.0, sy = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    ss += s_prev[i] * s_prev[i];
                    sy += s_prev[i] * y_prev[i];
                }
                if (sy > 0.0) step = ss / sy;
            }
            d.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) d[i] = -step * pg[i];
        }

        auto trial = [&](double alpha) {
            std::vector<double> t(n);
            for (std::size_t i = 0; i < n; ++i) t[i] = x[i] + alpha * d[i];
            project(t);
            return t;
        };
        // energy comparisons go through energy_change: near the minimum the
        // decrease is far below the rounding of E itself
        auto armijo = [&](const std::vector<double>& t, double dE) {
            double lin = 0.0;
            for (std::size_t i = 0; i < n; ++i) lin += g[i] * (t[i] - x[i]);
            return std::isfinite(dE) && lin < 0.0 && dE <= 1e-4 * lin && dE < 0.0;
        };

        std::vector<double> best;
        double dE_best = 0.0;
        double alpha = 1.0;
        {
            auto t = trial(alpha);
            double dE = pr.energy_change(x, t);
            if (armijo(t, dE)) {
                best = t;
                dE_best = dE;
                // power-law regions of |grad u|^p take many short Newton steps;
                // extend while the energy keeps falling
                for (int k = 0; k < 12; ++k) {
                    auto t2 = trial(alpha * 2.0);
                    const double dE2 = pr.energy_change(x, t2);
                    if (!(dE2 < dE_best)) break;
                    alpha *= 2.0;
                    best = std::move(t2);
                    dE_best = dE2;
                }
            } else {
                for (int k = 0; k < 60 && best.empty(); ++k) {
                    alpha *= 0.5;
                    t = trial(alpha);
                    dE = pr.energy_change(x, t);
                    if (armijo(t, dE)) {
                        best = t;
                        dE_best = dE;
                    }
                }
            }
        }
        if (best.empty()) {
            // the remaining decrease is below what even energy_change resolves;
            // accept the full step if it is flat to rounding and makes progress
            auto t = trial(1.0);
            const double dE = pr.energy_change(x, t);
            const auto gt = pr.gradient(t);
            double slope_t = 0.0;
            for (std::size_t i = 0; i < n; ++i) slope_t += gt[i] * (t[i] - x[i]);
            const bool flat = std::isfinite(dE) && dE <= 8.0 * eps * std::abs(E);
            if (flat && (max_abs(projected(t, gt)) < info.residual || (newton && std::abs(slope_t) <= 0.5 * std::abs(slope)))) {
                best = t;
                dE_best = dE;
            } else {
                std::size_t worst = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (std::abs(pg[i]) > std::abs(pg[worst])) worst = i;
                char buf[96];
                std::snprintf(buf, sizeof buf, "variational: line search failed (projected gradient %.3g, Newton step %.3g)",
                              info.residual, newton ? max_abs(d) : NAN);
                throw NumericalError(buf, pr.node_radius(worst));
            }
        }

        std::vector<double> g_new = pr.gradient(best);
        s_prev.assign(n, 0.0);
        y_prev.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            s_prev[i] = best[i] - x[i];
            y_prev[i] = g_new[i] - g[i];
        }
        x = std::move(best);
        E = pr.energy(x);
        g = std::move(g_new);
        pg = projected(x, g);
        if (opts.energy_history) opts.energy_history->push_back(E);
    }
    return info;
}

// P2 interpolant of nodal values x on mesh, at r (mesh covers r).
double interpolate_p2(std::span<const double> mesh, std::span<const double> x, double r) {
    const std::size_t n = mesh.size();
    std::size_t i = std::upper_bound(mesh.begin(), mesh.end(), r) - mesh.begin();
    i = i == 0 ? 0 : i - 1;
    i -= i % 2;
    if (i + 2 >= n) {
        const std::size_t a = n - 2;
        return x[a] + (x[a + 1] - x[a]) * (r - mesh[a]) / (mesh[a + 1] - mesh[a]);
    }
    const double x0 = mesh[i], x1 = mesh[i + 1], x2 = mesh[i + 2];
    return x[i] * (r - x1) * (r - x2) / ((x0 - x1) * (x0 - x2)) +
           x[i + 1] * (r - x0) * (r - x2) / ((x1 - x0) * (x1 - x2)) +
           x[i + 2] * (r - x0) * (r - x1) / ((x2 - x0) * (x2 - x1));
}

// For large p, 1 - f falls below double resolution just past r ~ sqrt 2 and f'
// drops to 0 within a rounding width. An element straddling that kink
// overshoots and gets clamped at 1, leaving dips at its midpoint. Treat the
// corner as a free boundary instead: move an even node m to a trial position t,
// pin f = 1 from there on, minimize over the rest, and pick t by the energy.
// The result is sampled back on the caller's grid.
void align_kink(double p, const RadialGrid& grid, std::vector<double>& x, const VariationalOptions& opts,
                SolverInfo& info) {
    const auto r = grid.nodes();
    const std::size_t n = r.size();
    constexpr std::size_t W = 8;  // half-width of the warped patch, in nodes
    std::size_t k = 1;
    while (k + 1 < n && x[k] < 1.0) ++k;
    if (k + 1 >= n || k < 4) return;
    // where the smooth part would reach 1
    const double slope = (x[k - 1] - x[k - 3]) / (r[k - 1] - r[k - 3]);
    double rc = slope > 0.0 ? r[k - 1] + (1.0 - x[k - 1]) / slope : r[k];
    rc = std::clamp(rc, r[k - 2], r[k]);
    std::size_t m = grid.last_node_not_after(rc);
    if (rc - r[m] > r[m + 1] - rc) ++m;
    if (m % 2) m = (rc < r[m]) ? m - 1 : m + 1;
    if (m < W + 1 || m + W + 1 >= n) return;
    const double h = std::min(r[m] - r[m - 1], r[m + 1] - r[m]);

    VariationalOptions inner = opts;
    inner.energy_history = nullptr;
    auto warp = [&](double t) {
        std::vector<double> mesh(r.begin(), r.end());
        for (std::size_t i = m - W; i <= m + W; ++i) {
            const double d = std::abs(static_cast<double>(i) - static_cast<double>(m)) / W;
            mesh[i] += (t - r[m]) * (1.0 - d);
        }
        return mesh;
    };
    struct Trial {
        double E = std::numeric_limits<double>::infinity();
        std::vector<double> mesh, x;
        SolverInfo info;
    };
    Trial best;
    auto evaluate = [&](double t) {
        Trial tr;
        tr.mesh = warp(t);
        const Problem pr{p, n, quadrature_points(RadialGrid(tr.mesh)), tr.mesh};
        tr.x = best.x.empty() ? x : best.x;
        // free boundary at t: f = 1 from node m on
        std::fill(tr.x.begin() + static_cast<std::ptrdiff_t>(m), tr.x.end() - 1, 1.0);
        tr.info = minimize(pr, tr.x, inner, m);
        tr.E = pr.energy(tr.x);
        if (tr.E < best.E) best = tr;
        return tr.E;
    };

    // golden section over the kink position
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = rc - 0.75 * h, b = rc + 0.75 * h;
    double c = b - g * (b - a), d = a + g * (b - a);
    double Ec = evaluate(c), Ed = evaluate(d);
    for (int it = 0; it < 24; ++it) {
        if (Ec <= Ed) {
            b = d;
            d = c;
            Ed = Ec;
            c = b - g * (b - a);
            Ec = evaluate(c);
        } else {
            a = c;
            c = d;
            Ec = Ed;
            d = a + g * (b - a);
            Ed = evaluate(d);
        }
    }
    for (std::size_t i = m - W; i <= m + W; ++i)
        x[i] = std::clamp(interpolate_p2(best.mesh, best.x, r[i]), 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        if (i < m - W || i > m + W) x[i] = best.x[i];
    info.iterations += best.info.iterations;
    info.residual = best.info.residual;
}

}  // namespace

Profile solve_variational(const Params& params, const RadialGrid& grid, const VariationalOptions& opts) {
    const double p = params.p();
    const auto r = grid.nodes();
    const std::size_t n = grid.size();
    if (r[0] != 0.0) throw InvalidArgument("solve_variational: grid must start at r = 0");
    if (!(opts.tol > 0.0)) throw InvalidArgument("solve_variational: tol must be positive");
    const Problem pr{p, n, quadrature_points(grid), {r.begin(), r.end()}};

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::min(r[i], 1.0);
    x[0] = 0.0;
    x[n - 1] = 1.0 - tail_target(p, grid.radius());
    SolverInfo info = minimize(pr, x, opts);
    align_kink(p, grid, x, opts, info);
    return profile_from_values(params, grid, std::move(x), info);
}

}  // namespace pgl
