#include "pgl/error.hpp"
#include "pgl/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

// Shooting for f_p.
//
// The linearization of the profile equation about f_p has a growing mode
// (growth rate ~ r^{p/2-1} in the tail), so a single shot from r = 0 only
// follows the solution for as long as the ~1e-16 resolution of a allows.
// We therefore march: bisect a until the two bracketing trajectories are
// adjacent doubles, advance to the last radius where they still agree to
// kAgree, restart there from the averaged (f, 1 - f) and bisect on h.
// Once the far-field series for 1 - f is accurate to kClosure (relative) the
// tail is closed with it.

namespace pgl {
namespace {

constexpr double kAgree = 1e-9;
constexpr double kClosure = 1e-13;
constexpr double kOnSeries = 1e-8;
// growth rate of the unstable mode is ~ 1 / (r sqrt(1 - f)); marching is cheap
// until 1 - f is this small, so the tail is only closed beyond it
constexpr double kStiff = 1e-6;
constexpr std::size_t kSamples = 400;
constexpr std::size_t kMaxStages = 200000;

using State = std::array<double, 3>;  // f, 1 - f, h

struct Shot {
    int sign = 0;          // +1 overshoot, -1 undershoot
    double miss = 0.0;     // signed relative miss of the end target
    bool closed = false;   // ended in the analytic-tail regime
    OdeTrajectory traj;
};

struct Shooter {
    double p;
    double R;
    double tol;
    OdeRhs rhs;
    TailExpansion tail;

    // Tail regime tests against the series: +1/-1 classify, 2 closes the tail,
    // 0 keeps integrating.
    int tail_verdict(double r, double q, double h) const {
        if (q > 0.01) return 0;
        const auto v = tail(r);
        if (!(v.error <= kClosure * v.q)) return 0;
        const double H = v.r_df / (1.0 - v.q);
        if (q <= kStiff && std::abs(q - v.q) <= kOnSeries * v.q && std::abs(h - H) <= 1e-2 * H) return 2;
        // f' stalls above the series: the forcing wins from here on. Integrating
        // further only resolves cancellation noise in h' and underflows the step.
        if (h < 1e-3 * H && q >= v.q) return -1;
        return 0;
    }

    // The forcing term of h' dwarfs the rest: h falls off a cliff and f' hits
    // zero right after. Once f / r drops the forcing only grows, so this is an
    // undershoot already; integrating on would just underflow the step size.
    bool plunging(double r, std::span<const double> y) const {
        const double f = y[0], q = y[1], h = y[2];
        const double log_grad2 = 2.0 * std::log(f / r) + std::log1p(h * h);
        const double log_forcing = std::log(2.0 / p) + 0.5 * (2.0 - p) * log_grad2 +
                                   std::log(q * (1.0 + f)) + std::log(r);
        const double core = (1.0 - h) * (1.0 + (p - 1.0) * h) / r + 1.0 / r;
        return log_forcing > std::log(core) + std::log(1e4);
    }

    Shot shoot(double r0, const State& y0, std::vector<double> outputs = {}) const {
        OdeOptions o;
        o.output_radii = std::move(outputs);
        bool plunged = false;
        int verdict = 0;
        o.stop = [this, &plunged, &verdict](double r, std::span<const double> y) {
            if (y[1] <= 0.0 || y[2] <= 0.0) return true;
            verdict = tail_verdict(r, y[1], y[2]);
            if (verdict != 0) return true;
            plunged = plunging(r, y);
            return plunged;
        };
        Shot s;
        s.traj = integrate_ode(rhs, r0, R, y0, tol, o);
        const auto& y = s.traj.final_state;
        const double r = s.traj.r_reached;
        if (plunged || verdict == -1) {
            s.sign = -1;
            s.miss = -1.0;
        } else if (y[1] <= 0.0) {
            s.sign = 1;
            s.miss = 1.0;
        } else if (y[2] <= 0.0) {
            s.sign = -1;
            s.miss = -1.0;
        } else {
            s.closed = verdict == 2;
            const double target = s.closed ? tail(r).q : tail(R).q;
            s.miss = (target - y[1]) / target;
            s.sign = s.miss >= 0.0 ? 1 : -1;
        }
        return s;
    }
};

// Start of stage zero: series about the origin, with the start radius pulled in
// when the r^2 coefficient is large.
struct Origin {
    double r0;
    State y0;
};

Origin series_start(double p, double a, double r_start) {
    const double c = series_coefficient(p, a);
    const double r0 = std::min(r_start, 0.01 / std::sqrt(c));
    const double f = a * r0 * (1.0 - 0.5 * c * r0 * r0);
    return {r0, State{f, 1.0 - f, 1.0 - c * r0 * r0}};
}

// For c(a) beyond this the series says h falls to zero within r ~ 1e-7: a
// plain undershoot, and integrating it would only underflow the step size.
constexpr double kHopeless = 1e14;

bool agree(std::span<const double> u, std::span<const double> v) {
    auto rel = [](double x, double y) {
        const double m = std::max(std::abs(x), std::abs(y));
        return m == 0.0 ? 0.0 : std::abs(x - y) / m;
    };
    return rel(u[1], v[1]) <= kAgree && rel(u[2], v[2]) <= kAgree;
}

}  // namespace

double shooting_mismatch(const Params& params, double R, double a, double tol, double r_start) {
    if (!(a > 0.0)) throw InvalidArgument("shooting_mismatch: a must be positive");
    Shooter sh{params.p(), R, tol, profile_rhs(params.p()), TailExpansion(params.p())};
    if (series_coefficient(params.p(), a) > kHopeless) return -1.0;
    const auto start = series_start(params.p(), a, r_start);
    return sh.shoot(start.r0, start.y0).miss;
}

namespace {
Profile shoot_profile(const Params& params, const RadialGrid& grid, const ShootingOptions& opts);
}

Profile solve_shooting(const Params& params, const RadialGrid& grid, const ShootingOptions& opts) {
    try {
        return shoot_profile(params, grid, opts);
    } catch (const NumericalError& e) {
        // at large p the corner of f near r = sqrt(2) sharpens below the
        // resolution of double-precision radii
        throw NumericalError(std::string(e.what()) + " (shooting cannot follow the profile here; "
                             "the variational solver covers this p)", e.radius());
    }
}

namespace {

Profile shoot_profile(const Params& params, const RadialGrid& grid, const ShootingOptions& opts) {
    const double p = params.p();
    const double R = grid.radius();
    if (grid[0] != 0.0) throw InvalidArgument("solve_shooting: grid must start at r = 0");
    if (!(opts.r_start > 0.0)) throw InvalidArgument("solve_shooting: r_start must be positive");
    // the series start has to sit below the first positive node
    const double r_start = std::min(opts.r_start, 0.5 * grid[1]);
    Shooter sh{p, R, opts.tol, profile_rhs(p), TailExpansion(p)};
    const auto nodes = grid.nodes();
    const std::size_t n = nodes.size();

    std::vector<State> node_state(n, State{0.0, 1.0, 1.0});
    std::vector<bool> filled(n, false);

    // stage 0: bisection on a = f'(0)
    auto start_a = [&](double a) { return series_start(p, a, r_start); };
    double lo = std::max(0.05, std::sqrt(0.5 * std::pow(1e4 * p * p, -1.0 / (0.5 * p - 1.0)))), hi = 3.0;
    {
        int tries = 0;
        while (sh.shoot(start_a(lo).r0, start_a(lo).y0).sign > 0) {
            lo *= 0.5;
            if (++tries > 40) throw NumericalError("shooting: no undershooting slope found");
        }
        tries = 0;
        while (sh.shoot(start_a(hi).r0, start_a(hi).y0).sign < 0) {
            hi *= 2.0;
            if (++tries > 40) throw NumericalError("shooting: no overshooting slope found");
        }
    }

    // generic stage driver: params lo < hi bracket (sign(lo) < 0 < sign(hi))
    struct Bracket {
        double lo, hi;
    };
    auto bisect = [&](auto&& make_start, Bracket b) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (b.lo + b.hi);
            if (mid <= b.lo || mid >= b.hi) break;
            const auto s = make_start(mid);
            if (sh.shoot(s.r0, s.y0).sign > 0)
                b.hi = mid;
            else
                b.lo = mid;
        }
        return b;
    };

    Bracket b = bisect(start_a, {lo, hi});
    const double a = 0.5 * (b.lo + b.hi);
    for (std::size_t i = 0; i < n && nodes[i] < start_a(a).r0; ++i) {
        const double r = nodes[i];
        const double c = series_coefficient(p, a);
        const double f = a * r * (1.0 - 0.5 * c * r * r);
        node_state[i] = {f, 1.0 - f, 1.0 - c * r * r};
        filled[i] = true;
    }

    SolverInfo info{SolverKind::shooting, opts.tol, 0, 0.0, 0.0};
    double r_k = 0.0;
    State y_k{};
    std::function<Origin(double)> make_start = start_a;
    double closure_radius = 0.0;
    State closure_state{};

    for (std::size_t stage = 0;; ++stage) {
        if (stage >= kMaxStages) throw NumericalError("shooting: too many restarts", r_k);
        info.iterations = stage + 1;
        const auto s_lo = make_start(b.lo), s_hi = make_start(b.hi);
        const Shot probe_lo = sh.shoot(s_lo.r0, s_lo.y0), probe_hi = sh.shoot(s_hi.r0, s_hi.y0);
        const double r_begin = std::max(s_lo.r0, s_hi.r0);
        double r_end = std::min(probe_lo.traj.r_reached, probe_hi.traj.r_reached);

        // compare the bracket on a sample set; shrink it when the trajectories
        // separate before the first sample
        std::vector<double> samples;
        Shot t_lo, t_hi;
        std::size_t first_bad = 0;
        for (int shrink = 0;; ++shrink) {
            if (shrink > 60) throw NumericalError("shooting: bracket trajectories never agree", r_begin);
            samples.clear();
            for (std::size_t j = 1; j < kSamples; ++j)
                samples.push_back(r_begin + (r_end - r_begin) * double(j) / double(kSamples));
            samples.push_back(r_end);
            for (std::size_t i = 0; i < n; ++i)
                if (nodes[i] >= r_begin && nodes[i] < r_end) samples.push_back(nodes[i]);
            std::sort(samples.begin(), samples.end());
            samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
            t_lo = sh.shoot(s_lo.r0, s_lo.y0, samples);
            t_hi = sh.shoot(s_hi.r0, s_hi.y0, samples);
            const std::size_t m = std::min(t_lo.traj.radii.size(), t_hi.traj.radii.size());
            first_bad = m;
            for (std::size_t j = 0; j < m; ++j)
                if (!agree(t_lo.traj.states[j], t_hi.traj.states[j])) {
                    first_bad = j;
                    break;
                }
            if (first_bad > 0) break;
            r_end = samples.front();
        }

        const bool both_done = first_bad == std::min(t_lo.traj.radii.size(), t_hi.traj.radii.size()) &&
                               agree(t_lo.traj.final_state, t_hi.traj.final_state) &&
                               (t_lo.closed || t_lo.traj.r_reached >= R) &&
                               (t_hi.closed || t_hi.traj.r_reached >= R);
        // record nodes up to the restart (or the end)
        std::size_t last_good = first_bad - 1;
        const double r_next = t_lo.traj.radii[last_good];
        for (std::size_t j = 0; j <= last_good; ++j) {
            const double r = t_lo.traj.radii[j];
            const std::size_t i = grid.last_node_not_after(r);
            if (nodes[i] != r || filled[i]) continue;
            for (int c = 0; c < 3; ++c)
                node_state[i][c] = 0.5 * (t_lo.traj.states[j][c] + t_hi.traj.states[j][c]);
            filled[i] = true;
        }
        if (both_done) {
            const auto& fl = t_lo.traj.final_state;
            const auto& fh = t_hi.traj.final_state;
            const double r_fin = std::min(t_lo.traj.r_reached, t_hi.traj.r_reached);
            if (t_lo.closed || t_hi.closed) {
                closure_radius = r_fin;
                for (int c = 0; c < 3; ++c) closure_state[c] = 0.5 * (fl[c] + fh[c]);
            } else {
                // the end radius is a grid node but was not sampled (r < r_end)
                for (int c = 0; c < 3; ++c) node_state[n - 1][c] = 0.5 * (fl[c] + fh[c]);
                filled[n - 1] = true;
            }
            info.residual = std::abs(0.5 * (t_lo.miss + t_hi.miss));
            break;
        }
        if (!(r_next > r_k))
            throw NumericalError("shooting: marching stalled", r_k);

        // restart at r_next, bisecting on h
        r_k = r_next;
        for (int c = 0; c < 3; ++c)
            y_k[c] = 0.5 * (t_lo.traj.states[last_good][c] + t_hi.traj.states[last_good][c]);
        make_start = [r_k, y_k](double h) { return Origin{r_k, State{y_k[0], y_k[1], h}}; };
        const double h0 = y_k[2];
        double width = 1e-7 * std::abs(h0);
        Bracket nb{h0 - width, h0 + width};
        for (int tries = 0;; ++tries) {
            if (tries > 200) throw NumericalError("shooting: cannot bracket h at restart", r_k);
            const int sl = sh.shoot(r_k, make_start(nb.lo).y0).sign;
            const int su = sh.shoot(r_k, make_start(nb.hi).y0).sign;
            if (sl < 0 && su > 0) break;
            width *= 4.0;
            if (sl > 0) nb.lo = h0 - width;
            if (su < 0) nb.hi = h0 + width;
            nb.lo = std::max(nb.lo, 0.0);
        }
        b = bisect(make_start, nb);
    }

    if (closure_radius > 0.0) {
        info.analytic_tail_from = closure_radius;
        info.residual = std::abs(closure_state[1] - sh.tail(closure_radius).q) / closure_state[1];
        for (std::size_t i = 0; i < n; ++i) {
            if (nodes[i] < closure_radius || filled[i]) continue;
            const auto v = sh.tail(nodes[i]);
            node_state[i] = {1.0 - v.q, v.q, v.r_df / (1.0 - v.q)};
            filled[i] = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!filled[i]) throw NumericalError("shooting: node left unresolved", nodes[i]);

    Profile out{params, grid, {}, {}, {}, {}, {}, a, info};
    out.f.resize(n);
    out.df.resize(n);
    out.h.resize(n);
    out.gradient_norm.resize(n);
    out.tail.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [f, q, h] = node_state[i];
        const double r = nodes[i];
        out.f[i] = f;
        out.tail[i] = q;
        out.h[i] = h;
        if (r == 0.0) {
            out.df[i] = a;
            out.gradient_norm[i] = std::sqrt(2.0) * a;
        } else {
            out.df[i] = h * f / r;
            out.gradient_norm[i] = f / r * std::sqrt(1.0 + h * h);
        }
    }
    return out;
}

}  // namespace

}  // namespace pgl
