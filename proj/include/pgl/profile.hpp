#pragma once

#include "pgl/grid.hpp"
#include "pgl/ode.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace pgl {

/// Exponent of the p-Ginzburg-Landau energy; 2 < p <= 1000.
class Params {
public:
    explicit Params(double p);
    double p() const noexcept { return p_; }
    /// p in (2, 2.05]: the tail r^{-p} is barely integrable.
    bool slow_tail() const noexcept { return p_ <= 2.05; }

private:
    double p_;
};

/// Default truncation radius: 20 for p <= 6, max(8, 4 * 2^{4/p}) beyond.
/// Slow-tail exponents get 40.
double default_radius(const Params& params);

enum class SolverKind { shooting, variational };

std::string to_string(SolverKind kind);

struct SolverInfo {
    SolverKind kind = SolverKind::shooting;
    double tol = 0.0;
    std::size_t iterations = 0;  ///< shooting stages or descent iterations
    double residual = 0.0;       ///< final mismatch or gradient max-norm
    double analytic_tail_from = 0.0;  ///< radius where the r^{-p} tail closure took over (0: none)
};

/// Radial degree-one profile f_p sampled on a grid. Node 0 is r = 0.
struct Profile {
    Params params;
    RadialGrid grid;
    std::vector<double> f;
    std::vector<double> df;
    std::vector<double> h;              ///< r f' / f, with h(0) = 1
    std::vector<double> gradient_norm;  ///< (f'^2 + f^2/r^2)^{1/2}
    std::vector<double> tail;           ///< 1 - f, kept separately for precision
    double f_prime_at_zero = 0.0;
    SolverInfo info;
};

/// Far-field expansion 1 - f = sum_k c_k s^k, s = r^{-p}, of the profile
/// equation. c_1 = p/4 and c_2 = (p^2/4)(3/8 + (p-1)(2p-1)/4); later terms follow
/// by recursion. The series is asymptotic (c_{k+1}/c_k grows like k^2 p^3) and
/// is summed up to its smallest term.
class TailExpansion {
public:
    explicit TailExpansion(double p, std::size_t terms = 12);

    struct Value {
        double q = 0.0;      ///< 1 - f
        double r_df = 0.0;   ///< r f'
        double r2_d2f = 0.0; ///< r^2 f''
        double error = 0.0;  ///< magnitude of the smallest retained term in the tail of the sum
    };
    Value operator()(double r) const;
    /// \int_R^\infty |grad u|^p r dr along the series.
    double kinetic_beyond(double R) const;
    /// \int_R^\infty (1/2)(1 - f^2)^2 r dr along the series.
    double potential_beyond(double R) const;
    std::span<const double> coefficients() const noexcept { return c_; }

private:
    double p_;
    std::vector<double> c_;  // c_[k-1] = c_k
};

/// Boundary data imposed at the truncation radius: 1 - f(R) from TailExpansion.
double tail_target(double p, double R);

/// First-order system for y = (f, 1 - f, h):
/// f' = h f / r, (1 - f)' = -h f / r and h' from the Euler-Lagrange equation
/// written in the variable h.
OdeRhs profile_rhs(double p);

/// h' at one radius from the state (f, 1 - f, h).
double h_prime(double p, double r, double f, double tail, double h);

/// Coefficient c(a) of the start h = 1 - c r^2, f = a r (1 - c r^2 / 2).
double series_coefficient(double p, double a);

struct ShootingOptions {
    double tol = 1e-10;
    double r_start = 1e-4;
};

/// Shooting on a = f'(0) (then on h at restart radii, see the implementation
/// notes) so that the trajectory meets 1 - f(R) = (p/4) R^{-p}.
///
/// Throws NumericalError on bracket failure or when the integration cannot be
/// carried to R.
Profile solve_shooting(const Params& params, const RadialGrid& grid, const ShootingOptions& opts = {});

/// Mismatch used by the first shooting stage: signed relative miss of the tail
/// target, with +1 for an overshoot (f reaches 1) and -1 for an undershoot
/// (f' reaches 0) before R.
double shooting_mismatch(const Params& params, double R, double a, double tol = 1e-10,
                         double r_start = 1e-4);

struct VariationalOptions {
    double tol = 1e-8;             ///< max-norm of the projected gradient
    std::size_t max_iterations = 20000;
    /// When set, receives the energy of the start and of every accepted iterate.
    std::vector<double>* energy_history = nullptr;
};

/// Minimizes the discretized energy over nodal values with f(0) = 0, f(R) = the
/// tail target and 0 <= f <= 1, starting from r on [0,1] and 1 beyond.
/// Projected Newton steps (banded Hessian, shifted when indefinite) with an
/// Armijo search that may also extend the step; Barzilai-Borwein projected
/// gradient steps take over when the Newton direction fails to descend.
///
/// Throws NumericalError on non-convergence or line-search failure.
Profile solve_variational(const Params& params, const RadialGrid& grid,
                          const VariationalOptions& opts = {});

/// Discrete energy minimized by solve_variational: f piecewise quadratic on
/// consecutive node pairs [r_{2k}, r_{2k+2}] (a final single interval is
/// linear), three-point Gauss quadrature on each element.
double discrete_energy(double p, const RadialGrid& grid, std::span<const double> f);

/// Kinetic and potential parts of discrete_energy.
std::pair<double, double> discrete_energy_terms(double p, const RadialGrid& grid, std::span<const double> f);

/// Shooting up to p = 100, variational beyond (see solve_shooting for why).
SolverKind default_solver(const Params& params);

/// Graded grid on [0, default_radius(params)].
RadialGrid default_grid(const Params& params, std::size_t nodes = 2001);

/// Runs the chosen solver; tol <= 0 keeps that solver's default tolerance.
Profile solve(const Params& params, const RadialGrid& grid, SolverKind kind, double tol = 0.0);

struct InvariantCheck {
    std::string name;
    bool pass = true;
    double worst = 0.0;     ///< worst violation magnitude (0 when none)
    double radius = 0.0;    ///< where the worst violation occurs
};

struct InvariantReport {
    std::vector<InvariantCheck> checks;
    bool all_pass() const;
    const InvariantCheck& at(const std::string& name) const;
};

/// Evaluates every profile invariant at tolerance tol. Pure.
InvariantReport audit(const Profile& profile, double tol = 1e-8);

/// Limit profile: r / sqrt(2) for r < sqrt(2), 1 beyond.
double f_infinity(double r);

/// Assembles a Profile from nodal f values (derivatives by finite differences
/// of the interpolant). Used by the variational solver and for hand-built
/// profiles in diagnostics.
Profile profile_from_values(const Params& params, const RadialGrid& grid, std::vector<double> f,
                            SolverInfo info = {});

/// Max over nodes of |a.f - b.f|; the grids must coincide.
double sup_distance(const Profile& a, const Profile& b);

}  // namespace pgl
