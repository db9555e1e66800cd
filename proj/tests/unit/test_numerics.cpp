#include "doctest.h"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pgl/banded.hpp"
#include "pgl/error.hpp"
#include "pgl/grid.hpp"
#include "pgl/ode.hpp"
#include "pgl/profile.hpp"
#include "pgl/roots.hpp"
#include "pgl/stability.hpp"

using namespace pgl;

namespace {

// classical RK4 with a fixed step, independent of the library integrator
std::vector<double> rk4(const OdeRhs& rhs, double r0, double r1, std::vector<double> y, std::size_t steps) {
    const std::size_t m = y.size();
    const double dr = (r1 - r0) / static_cast<double>(steps);
    std::vector<double> k1(m), k2(m), k3(m), k4(m), t(m);
    for (std::size_t s = 0; s < steps; ++s) {
        const double r = r0 + dr * static_cast<double>(s);
        rhs(r, y, k1);
        for (std::size_t i = 0; i < m; ++i) t[i] = y[i] + 0.5 * dr * k1[i];
        rhs(r + 0.5 * dr, t, k2);
        for (std::size_t i = 0; i < m; ++i) t[i] = y[i] + 0.5 * dr * k2[i];
        rhs(r + 0.5 * dr, t, k3);
        for (std::size_t i = 0; i < m; ++i) t[i] = y[i] + dr * k3[i];
        rhs(r + dr, t, k4);
        for (std::size_t i = 0; i < m; ++i) y[i] += dr / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return y;
}

// state (f, 1 - f, h) of the profile series start at p = 3
constexpr double kA3 = 0.535766850742;
std::vector<double> series_start(double p, double a, double r) {
    const double c = series_coefficient(p, a);
    const double f = a * r * (1.0 - 0.5 * c * r * r);
    return {f, 1.0 - f, 1.0 - c * r * r};
}

Eigen::MatrixXd dense(const BandedSymmetricMatrix& m) {
    const std::size_t n = m.order();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return d;
}

}  // namespace

TEST_CASE("ode: zero field keeps the state") {
    const OdeRhs zero = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 0.0; };
    const std::vector<double> y0{1.0};
    OdeOptions opt;
    opt.output_radii = {0.5, 3.0, 7.0};
    const auto tr = integrate_ode(zero, 0.0, 7.0, y0, 1e-8, opt);
    for (const auto& s : tr.states) CHECK(s[0] == 1.0);
    CHECK(tr.final_state[0] == 1.0);
}

TEST_CASE("ode: exponential") {
    const OdeRhs grow = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; };
    const std::vector<double> y0{1.0};
    for (double tol : {1e-6, 1e-8, 1e-10}) {
        const auto tr = integrate_ode(grow, 0.0, 1.0, y0, tol);
        CHECK(std::abs(tr.final_state[0] - std::numbers::e) <= tol * std::numbers::e);
    }
}

TEST_CASE("ode: preconditions and failures") {
    const OdeRhs grow = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; };
    const std::vector<double> y0{1.0};
    CHECK_THROWS_AS(integrate_ode(grow, 0.0, 1.0, y0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(integrate_ode(grow, 0.0, 1.0, y0, 1e-2), InvalidArgument);
    CHECK_THROWS_AS(integrate_ode(grow, 1.0, 1.0, y0, 1e-8), InvalidArgument);
    // y' = y^2 blows up at r = 1
    const OdeRhs blow = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
    try {
        integrate_ode(blow, 0.0, 2.0, y0, 1e-8);
        FAIL("expected a NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.radius() > 0.99);
        CHECK(e.radius() <= 1.0 + 1e-6);
    }
}

TEST_CASE("ode: profile system against a fixed-step RK4 oracle") {
    const double p = 3.0, r0 = 1e-3;
    const auto y0 = series_start(p, kA3, r0);
    const OdeRhs rhs = profile_rhs(p);
    OdeOptions opt;
    opt.output_radii = {0.25, 0.5, 1.0};
    const auto tr = integrate_ode(rhs, r0, 1.0, y0, 1e-10, opt);
    // the oracle integrates in pieces so that every output radius is a step end
    std::vector<double> y = y0;
    double r = r0;
    for (std::size_t k = 0; k < opt.output_radii.size(); ++k) {
        const double r1 = opt.output_radii[k];
        y = rk4(rhs, r, r1, y, static_cast<std::size_t>((r1 - r) / 1e-5));
        r = r1;
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(tr.states[k][i] - y[i]) <= 1e-8);
    }
}

TEST_CASE("ode: tighter tolerance never increases the error on the profile system") {
    const double p = 3.0, r0 = 1e-3, r1 = 1.0;
    const auto y0 = series_start(p, kA3, r0);
    const OdeRhs rhs = profile_rhs(p);
    const auto ref = rk4(rhs, r0, r1, y0, 200000);
    double previous = INFINITY;
    for (double tol = 1e-4; tol >= 1e-9; tol *= 0.5) {
        const auto tr = integrate_ode(rhs, r0, r1, y0, tol);
        double err = 0.0;
        for (std::size_t i = 0; i < 3; ++i) err = std::max(err, std::abs(tr.final_state[i] - ref[i]));
        CAPTURE(tol);
        CHECK(err <= previous);
        previous = err;
    }
}

TEST_CASE("h_prime solves the Euler-Lagrange equation") {
    // oracle: with W = f'^2 + f^2/r^2 and G = W^{p/2-1}, the equation is
    // (r G f')' = G f / r - (2/p) r f (1 - f^2); f'' follows from h' via f' = h f / r
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double p = 2.1 + 20.0 * U(rng);
        const double r = 0.05 + 3.0 * U(rng);
        const double f = 0.05 + 0.9 * U(rng);
        const double h = -0.9 / (p - 1.0) + (1.0 - 1e-3 + 0.9 / (p - 1.0)) * U(rng);
        const double df = h * f / r;
        const double dh = h_prime(p, r, f, 1.0 - f, h);
        const double d2f = dh * f / r + h * df / r - h * f / (r * r);
        const double W = df * df + f * f / (r * r);
        const double dW = 2.0 * df * d2f + 2.0 * (f / r) * (df / r - f / (r * r));
        const double G = std::pow(W, 0.5 * p - 1.0);
        const double dG = (0.5 * p - 1.0) * G * dW / W;
        const double lhs = G * df + r * dG * df + r * G * d2f;
        const double rhs = G * f / r - (2.0 / p) * r * f * (1.0 - f * f);
        CAPTURE(p);
        CAPTURE(r);
        CHECK(std::abs(lhs - rhs) <= 1e-9 * (std::abs(G * df) + std::abs(r * dG * df) + std::abs(r * G * d2f) +
                                             std::abs(G * f / r) + std::abs(r * f)));
    }
}

TEST_CASE("series start coefficient against a fixed-step integration from deeper in") {
    // start at r = 1e-6 where the r^2 correction is negligible, integrate to 1e-4
    // and compare h with 1 - c r^2
    for (double p : {2.5, 3.0, 4.0, 6.0}) {
        const double a = 0.54;
        const double rs = 1e-6, re = 1e-4;
        const auto y = rk4(profile_rhs(p), rs, re, series_start(p, a, rs), 20000);
        const double c = series_coefficient(p, a);
        CAPTURE(p);
        CHECK(std::abs((1.0 - y[2]) - c * re * re) <= 1e-3 * c * re * re);
    }
}

TEST_CASE("quad: constants, linear, and the 1/6 integral") {
    const auto g = RadialGrid::graded(20.0, 2001);
    std::vector<double> one(g.size(), 1.0);
    CHECK(quad(one, g) == doctest::Approx(20.0).epsilon(1e-13));

    const auto u = RadialGrid::uniform(1.0, 101);
    std::vector<double> r(u.nodes().begin(), u.nodes().end());
    CHECK(quad(r, u) == doctest::Approx(0.5).epsilon(1e-14));

    const double s2 = std::sqrt(2.0);
    const auto gs = RadialGrid::graded(s2, 1001);
    std::vector<double> v(gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const double x = gs[i];
        v[i] = 0.5 * std::pow(1.0 - 0.5 * x * x, 2) * x;
    }
    // antiderivative -(1/6)(1 - r^2/2)^3
    auto F = [](double x) { return -std::pow(1.0 - 0.5 * x * x, 3) / 6.0; };
    const double exact = F(s2) - F(0.0);
    CHECK(exact == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(std::abs(quad(v, gs) - exact) <= 1e-10);
}

TEST_CASE("quad: weights, linearity, positivity") {
    for (std::size_t n : {101u, 700u, 2001u, 2002u}) {
        const auto g = RadialGrid::graded(20.0, n);
        double sum = 0.0;
        for (double w : g.weights()) {
            CHECK(w > 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 20.0) <= 1e-12 * 20.0);
        CHECK(g[0] == 0.0);
        CHECK(g.radius() == 20.0);
        for (std::size_t i = 1; i < n; ++i) CHECK(g[i] > g[i - 1]);
    }
    const auto g = RadialGrid::graded(20.0, 2001);
    std::size_t near0 = 0, nearR = 0;
    for (double x : g.nodes()) {
        near0 += x <= 0.1;
        nearR += x >= 19.0;
    }
    CHECK(near0 >= 50);
    CHECK(nearR >= 50);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> a(g.size()), b(g.size()), c(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        a[i] = U(rng);
        b[i] = U(rng);
        c[i] = 2.5 * a[i] - 0.75 * b[i];
    }
    CHECK(quad(c, g) == doctest::Approx(2.5 * quad(a, g) - 0.75 * quad(b, g)).epsilon(1e-12));
    for (auto& x : a) x = std::abs(x);
    CHECK(quad(a, g) > 0.0);
    CHECK_THROWS_AS(quad(std::vector<double>(5, 1.0), g), InvalidArgument);
}

TEST_CASE("quad: convergence order on monomials") {
    // three-point rule on node pairs: exact for quadratics even when the pair is
    // uneven, fourth order on a smoothly graded grid
    auto err = [](int k, std::size_t n) {
        const auto g = RadialGrid::graded(20.0, n);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(g[i] / 20.0, k);
        return std::abs(quad(v, g) - 20.0 / (k + 1));
    };
    for (int k = 0; k <= 2; ++k)
        for (std::size_t n : {41u, 161u, 1281u}) CHECK(err(k, n) <= 1e-13);
    for (int k = 4; k <= 5; ++k) {
        CAPTURE(k);
        // three doublings; fourth order gives 4096, third order only 512
        CHECK(err(k, 161) / err(k, 1281) > 2048.0);
    }
}

TEST_CASE("eigenpairs: diagonal and ordering") {
    BandedSymmetricMatrix m(3, 1);
    m.add(0, 0, 3.0);
    m.add(1, 1, 1.0);
    m.add(2, 2, 2.0);
    const auto e = lowest_eigenpairs(m, 2);
    REQUIRE(e.size() == 2);
    CHECK(e[0].value == doctest::Approx(1.0));
    CHECK(e[1].value == doctest::Approx(2.0));
    CHECK(std::abs(e[0].vector[1]) == doctest::Approx(1.0));
    CHECK_THROWS_AS(lowest_eigenpairs(m, 4), InvalidArgument);
}

TEST_CASE("eigenpairs: Dirichlet Laplacian tends to pi^2") {
    double prev = INFINITY;
    for (std::size_t n : {50u, 100u, 200u, 400u}) {
        const double d = 1.0 / static_cast<double>(n + 1);
        BandedSymmetricMatrix m(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            m.add(i, i, 2.0 / (d * d));
            if (i) m.add(i, i - 1, -1.0 / (d * d));
        }
        const double lam = lowest_eigenpairs(m, 1)[0].value;
        const double err = std::abs(lam - std::numbers::pi * std::numbers::pi);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("eigenpairs: residual bound and a dense oracle on random band matrices") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 60 + 40 * trial, kd = 1 + trial % 4;
        BandedSymmetricMatrix m(n, kd);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = (i >= kd ? i - kd : 0); j <= i; ++j) m.add(i, j, U(rng) * (i == j ? 10.0 : 1.0));
        const auto e = lowest_eigenpairs(m, 5);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(m));
        const double norm = m.norm_inf();
        for (std::size_t k = 0; k < e.size(); ++k) {
            CHECK(std::abs(e[k].value - es.eigenvalues()(static_cast<Eigen::Index>(k))) <= 1e-10 * norm);
            if (k) CHECK(e[k].value >= e[k - 1].value);
            const auto mv = m.multiply(e[k].vector);
            double res = 0.0, nv = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                res += std::pow(mv[i] - e[k].value * e[k].vector[i], 2);
                nv += e[k].vector[i] * e[k].vector[i];
            }
            CHECK(std::sqrt(res) <= 1e-9 * norm);
            CHECK(std::sqrt(nv) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("eigenpairs: discretized E1 imaginary operator against a dense solver") {
    const Params params(3.0);
    const auto grid = RadialGrid::graded(20.0, 399);
    const Profile pr = solve_shooting(params, grid);
    const ModeOperator op = assemble_E1(pr, Part::imaginary);
    REQUIRE(op.dimension() <= 400);
    const BandedSymmetricMatrix w = op.weighted();
    const auto e = lowest_eigenpairs(w, 3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(w));
    for (std::size_t k = 0; k < 3; ++k) {
        CAPTURE(k);
        CHECK(std::abs(e[k].value - es.eigenvalues()(static_cast<Eigen::Index>(k))) <= 1e-8);
    }
}

TEST_CASE("find_root: simple brackets") {
    CHECK(find_root([](double x) { return x - 2.0; }, 0.0, 5.0, 1e-14) == doctest::Approx(2.0).epsilon(1e-14));
    const double s = find_root([](double x) { return x * x - 2.0; }, 1.0, 2.0, 1e-12);
    CHECK(std::abs(s - std::sqrt(2.0)) <= 1e-12);
    // jump sign change
    const double j = find_root([](double x) { return x < 0.3 ? -1.0 : 1.0; }, 0.0, 1.0, 1e-10);
    CHECK(std::abs(j - 0.3) <= 1e-10);
    CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-10), InvalidArgument);
}

TEST_CASE("find_root: shooting mismatch at p = 3 against a scan") {
    const Params params(3.0);
    const double R = default_radius(params);
    auto m = [&](double a) { return shooting_mismatch(params, R, a); };
    // coarse scan of the whole bracket, then a 1e-6 scan inside the cell with the sign change
    double lo = NAN;
    double prev = m(0.1);
    for (double a = 0.101; a <= 1.5; a += 1e-3) {
        const double v = m(a);
        if ((prev < 0.0) != (v < 0.0)) {
            lo = a - 1e-3;
            break;
        }
        prev = v;
    }
    REQUIRE(std::isfinite(lo));
    double scan = NAN;
    prev = m(lo);
    for (int k = 1; k <= 1000; ++k) {
        const double a = lo + 1e-6 * k;
        const double v = m(a);
        if ((prev < 0.0) != (v < 0.0)) {
            scan = a - 0.5e-6;
            break;
        }
        prev = v;
    }
    REQUIRE(std::isfinite(scan));
    const double root = find_root(m, lo, lo + 1e-3, 1e-12);
    CHECK(std::abs(root - scan) <= 0.5e-6);
}
