#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "pgl/energy.hpp"
#include "pgl/error.hpp"
#include "pgl/profile.hpp"

using namespace pgl;

namespace {

Profile hand_built(double p, const std::vector<double>& f, const RadialGrid& g) {
    return profile_from_values(Params(p), g, f);
}

}  // namespace

TEST_CASE("params") {
    CHECK_THROWS_AS(Params(2.0), InvalidArgument);
    CHECK_THROWS_AS(Params(1000.5), InvalidArgument);
    CHECK_NOTHROW(Params(1000.0));
    CHECK(Params(2.04).slow_tail());
    CHECK_FALSE(Params(2.5).slow_tail());
}

TEST_CASE("f_infinity") {
    CHECK(f_infinity(0.0) == 0.0);
    CHECK(f_infinity(std::sqrt(2.0)) == doctest::Approx(1.0));
    CHECK(f_infinity(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(f_infinity(5.0) == 1.0);
}

TEST_CASE("shooting at p = 3: boundary values and audit") {
    const Params params(3.0);
    const Profile pr = solve_shooting(params, default_grid(params));
    CHECK(pr.f[0] == 0.0);
    CHECK(std::abs(pr.h[1] - 1.0) <= 0.01);
    CHECK(pr.f_prime_at_zero > 0.0);
    const auto rep = audit(pr, 1e-8);
    for (const auto& c : rep.checks) {
        CAPTURE(c.name);
        CHECK(c.pass);
    }
    CHECK(rep.checks.size() == 8);
}

TEST_CASE("cross-solver agreement and audits") {
    for (double p : {2.5, 3.0, 4.0, 6.0}) {
        CAPTURE(p);
        const Params params(p);
        const auto grid = default_grid(params);
        const Profile s = solve_shooting(params, grid);
        const Profile v = solve_variational(params, grid);
        CHECK(s.f[0] == 0.0);
        CHECK(v.f[0] == 0.0);
        CHECK(sup_distance(s, v) <= 1e-6);
        CHECK(std::abs(s.f_prime_at_zero - v.f_prime_at_zero) <= 1e-6);
        CHECK(audit(s).all_pass());
        CHECK(audit(v).all_pass());
        if (p == 4.0) CHECK(std::abs(energy(s).total - energy(v).total) <= 1e-6);
    }
}

TEST_CASE("variational: start energy finite and accepted iterates descend") {
    const Params params(3.0);
    const auto grid = default_grid(params);
    std::vector<double> gstar(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) gstar[i] = std::min(grid[i], 1.0);
    gstar.back() = 1.0 - tail_target(3.0, grid.radius());
    const double E0 = discrete_energy(3.0, grid, gstar);
    CHECK(std::isfinite(E0));
    CHECK(E0 > 0.0);

    std::vector<double> history;
    VariationalOptions opt;
    opt.energy_history = &history;
    solve_variational(params, grid, opt);
    REQUIRE(history.size() >= 2);
    CHECK(history.front() == doctest::Approx(E0).epsilon(1e-14));
    // steps whose change is below the rounding of E are judged on the gradient,
    // so allow a few ulps
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t k = 1; k < history.size(); ++k) {
        CAPTURE(k);
        CHECK(history[k] <= history[k - 1] + 16.0 * eps * std::abs(history[k - 1]));
    }
    CHECK(history.back() < history.front());
}

TEST_CASE("audit: r/(1+r) witness") {
    const auto g = RadialGrid::graded(20.0, 2001);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = g[i] / (1.0 + g[i]);
    const auto rep = audit(hand_built(3.0, f, g));
    CHECK(rep.at("h_bounds").pass);
    CHECK(rep.at("f_over_r_decreasing").pass);
    CHECK(rep.at("df_positive").pass);
    CHECK(rep.at("f_range").pass);
    CHECK(rep.at("h_nonincreasing").pass);
}

TEST_CASE("audit: decreasing stretch is reported with its radius") {
    const auto g = RadialGrid::graded(20.0, 2001);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g[i];
        f[i] = r / (1.0 + r);
        // dip on [5, 6] deepest at 5.5
        if (r > 5.0 && r < 6.0) f[i] -= 0.05 * std::pow(std::sin(M_PI * (r - 5.0)), 2);
    }
    const auto rep = audit(hand_built(3.0, f, g));
    const auto& c = rep.at("df_positive");
    CHECK_FALSE(c.pass);
    CHECK(c.worst > 0.0);
    CHECK(c.radius > 5.0);
    CHECK(c.radius < 6.0);
    CHECK_FALSE(rep.all_pass());
    CHECK_THROWS_AS(rep.at("no_such_check"), InvalidArgument);
}

TEST_CASE("audit is pure") {
    const Params params(4.0);
    const Profile pr = solve_shooting(params, default_grid(params));
    const Profile copy = pr;
    audit(pr);
    CHECK(pr.f == copy.f);
    CHECK(pr.h == copy.h);
}

TEST_CASE("grid refinement leaves f'(0) in place") {
    for (double p : {3.0, 4.0}) {
        const Params params(p);
        const double a = solve_shooting(params, default_grid(params, 2001)).f_prime_at_zero;
        const double b = solve_shooting(params, default_grid(params, 4001)).f_prime_at_zero;
        CAPTURE(p);
        CHECK(std::abs(a - b) <= 1e-7);
    }
}

TEST_CASE("tail boundary consistency at R") {
    for (double p : {2.5, 3.0, 4.0, 6.0, 10.0}) {
        const Params params(p);
        const Profile pr = solve_shooting(params, default_grid(params));
        const double R = pr.grid.radius();
        const double target = 0.25 * p * p * std::pow(R, -(p + 1.0));
        CAPTURE(p);
        CHECK(std::abs(pr.df.back() - target) <= 0.1 * target);
        CHECK(pr.tail.back() == doctest::Approx(tail_target(p, R)).epsilon(1e-6));
    }
}

TEST_CASE("far-field series: leading coefficients") {
    for (double p : {2.5, 3.0, 4.0, 10.0}) {
        const TailExpansion t(p);
        const auto c = t.coefficients();
        CHECK(c[0] == doctest::Approx(p / 4.0).epsilon(1e-15));
        CHECK(c[1] == doctest::Approx(p * p / 4.0 * (3.0 / 8.0 + (p - 1.0) * (2.0 * p - 1.0) / 4.0)).epsilon(1e-14));
    }
}

TEST_CASE("far-field series: truncations solve the profile equation to the next order") {
    // the leading far-field balance does not involve h', so with k terms the
    // residual of h' = h_prime(...) relative to h' is O(r^{-(k-1)p})
    for (double p : {3.0, 4.0}) {
        auto residual = [p](std::size_t terms, double r) {
            const TailExpansion t(p, terms);
            const auto v = t(r);
            const double f = 1.0 - v.q;
            const double h = v.r_df / f;
            const double dh = (v.r_df + v.r2_d2f) / (r * f) - v.r_df * v.r_df / (r * f * f);
            return std::abs(dh - h_prime(p, r, f, v.q, h)) / std::abs(dh);
        };
        for (std::size_t terms : {2u, 3u, 4u}) {
            const double r1 = 10.0, r2 = 20.0;
            const double slope = std::log(residual(terms, r1) / residual(terms, r2)) / std::log(r2 / r1);
            CAPTURE(p);
            CAPTURE(terms);
            CHECK(slope == doctest::Approx(static_cast<double>(terms - 1) * p).epsilon(0.05));
        }
    }
}

TEST_CASE("solve dispatch and default solver") {
    CHECK(default_solver(Params(3.0)) == SolverKind::shooting);
    CHECK(default_solver(Params(100.0)) == SolverKind::shooting);
    CHECK(default_solver(Params(150.0)) == SolverKind::variational);
    CHECK(default_radius(Params(3.0)) == 20.0);
    CHECK(default_radius(Params(2.02)) == 40.0);
    CHECK(to_string(SolverKind::variational) == "variational");
}
