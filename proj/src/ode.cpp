#include "pgl/ode.hpp"

#include "pgl/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pgl {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// continuous extension (Hairer & Wanner, contd5)
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool all_finite(std::span<const double> y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

std::string at_radius(const char* what, double r) {
    std::ostringstream os;
    os.precision(17);
    os << what << " at r = " << r;
    return os.str();
}

}  // namespace

OdeTrajectory integrate_ode(const OdeRhs& rhs, double r_start, double r_end,
                            std::span<const double> y0, double tol, const OdeOptions& options) {
    if (!(tol > 0.0 && tol <= 1e-3)) throw InvalidArgument("integrate_ode: tol must lie in (0, 1e-3]");
    if (!(r_start < r_end)) throw InvalidArgument("integrate_ode: r_start must be < r_end");
    const std::size_t n = y0.size();
    if (!options.abs_floor.empty() && options.abs_floor.size() != n)
        throw InvalidArgument("integrate_ode: abs_floor length mismatch");

    std::vector<double> y(y0.begin(), y0.end()), ynew(n), err(n), tmp(n);
    std::vector<std::vector<double>> k(7, std::vector<double>(n));
    rhs(r_start, y, k[0]);
    if (!all_finite(k[0])) throw InvalidArgument("integrate_ode: rhs not finite at y0");

    const double span = r_end - r_start;
    const double min_step = 1e-14 * span;
    auto floor_of = [&](std::size_t i) {
        return options.abs_floor.empty() ? 1e-300 : options.abs_floor[i];
    };

    OdeTrajectory out;
    const auto& want = options.output_radii;
    std::size_t next_out = 0;
    while (next_out < want.size() && want[next_out] < r_start) ++next_out;
    while (next_out < want.size() && want[next_out] == r_start) {
        out.radii.push_back(r_start);
        out.states.push_back(y);
        ++next_out;
    }

    double step = options.initial_step;
    if (step <= 0.0) {
        double scale = 0.0, slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = std::abs(y[i]) + floor_of(i);
            scale = std::max(scale, std::abs(y[i]) / sc);
            slope = std::max(slope, std::abs(k[0][i]) / sc);
        }
        step = slope > 0.0 ? 0.01 * std::max(scale, 1e-3) / slope : 1e-3 * span;
        step = std::clamp(step, 1e-12 * span, 0.1 * span);
    }

    double r = r_start;
    std::vector<double> dense(5 * n);
    while (r < r_end) {
        if (out.accepted_steps + out.rejected_steps >= options.max_steps)
            throw NumericalError(at_radius("integrate_ode: step budget exhausted", r), r);
        const bool last = r + step >= r_end;
        if (last) step = r_end - r;

        auto stage = [&](std::size_t s, double c, std::initializer_list<double> a) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = y[i];
                std::size_t j = 0;
                for (double aj : a) acc += step * aj * k[j++][i];
                tmp[i] = acc;
            }
            rhs(r + c * step, tmp, k[s]);
        };
        stage(1, c2, {a21});
        stage(2, c3, {a31, a32});
        stage(3, c4, {a41, a42, a43});
        stage(4, c5, {a51, a52, a53, a54});
        stage(5, 1.0, {a61, a62, a63, a64, a65});
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + step * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] +
                                     a76 * k[5][i]);
        rhs(r + step, ynew, k[6]);

        double err_norm = 0.0;
        bool finite = all_finite(ynew) && all_finite(k[6]);
        for (std::size_t i = 0; i < n && finite; ++i) {
            err[i] = step * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                             e6 * k[5][i] + e7 * k[6][i]);
            const double sc = tol * std::max(std::abs(y[i]), std::abs(ynew[i])) + floor_of(i);
            err_norm = std::max(err_norm, std::abs(err[i]) / sc);
        }
        if (!finite || !std::isfinite(err_norm)) {
            // retry smaller; a persistently non-finite state is a blow-up
            if (step <= min_step) throw NumericalError(at_radius("integrate_ode: non-finite state", r), r);
            step *= 0.25;
            ++out.rejected_steps;
            continue;
        }
        if (err_norm > 1.0) {
            step *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
            ++out.rejected_steps;
            if (step < min_step)
                throw NumericalError(at_radius("integrate_ode: step underflow", r), r);
            continue;
        }

        // accepted: build dense output and sample requested radii inside the step
        const double r_new = last ? r_end : r + step;
        if (next_out < want.size() && want[next_out] <= r_new) {
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = ynew[i] - y[i];
                const double bspl = step * k[0][i] - ydiff;
                dense[i] = y[i];
                dense[n + i] = ydiff;
                dense[2 * n + i] = bspl;
                dense[3 * n + i] = ydiff - step * k[6][i] - bspl;
                dense[4 * n + i] = step * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] +
                                           d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
            }
            while (next_out < want.size() && want[next_out] <= r_new) {
                const double theta = (want[next_out] - r) / step;
                const double theta1 = 1.0 - theta;
                std::vector<double> s(n);
                for (std::size_t i = 0; i < n; ++i)
                    s[i] = dense[i] + theta * (dense[n + i] +
                                               theta1 * (dense[2 * n + i] +
                                                         theta * (dense[3 * n + i] +
                                                                  theta1 * dense[4 * n + i])));
                out.radii.push_back(want[next_out]);
                out.states.push_back(std::move(s));
                ++next_out;
            }
        }

        r = r_new;
        y.swap(ynew);
        k[0].swap(k[6]);
        ++out.accepted_steps;

        if (options.stop && options.stop(r, y)) {
            out.stopped = true;
            break;
        }
        const double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        step *= std::clamp(factor, 0.2, 5.0);
    }
    out.r_reached = r;
    out.final_state = y;
    return out;
}

}  // namespace pgl
