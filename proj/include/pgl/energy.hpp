#pragma once

#include "pgl/profile.hpp"

namespace pgl {

/// Energy terms of a profile. Grid quadrature on [0, R] (the element energy of
/// discrete_energy_terms for variational profiles) plus the far-field series
/// beyond R; kinetic and potential include their tail parts.
struct EnergyReport {
    double kinetic = 0.0;    ///< \int |grad u|^p r dr
    double potential = 0.0;  ///< (1/2) \int (1 - f^2)^2 r dr
    double total = 0.0;      ///< kinetic + potential, i.e. m_p for a minimizer
    double pohozaev_residual = 0.0;  ///< |kinetic - (2/p) total|
    double tail_correction = 0.0;    ///< part of total that comes from beyond R
};

/// Throws NumericalError when an integrand is not finite.
EnergyReport energy(const Profile& profile);

/// |kinetic - (2/p) m_p| / m_p.
double pohozaev_check(const Profile& profile);

/// I_p of the comparison function f = k r on [0, 1/k], 1 beyond, with
/// k = (1 - ln p / p) / sqrt(2).
double test_function_energy(double p);

struct UpperBoundCheck {
    double bound = 0.0;  ///< test_function_energy(p)
    double m_p = 0.0;
    bool pass = false;   ///< m_p <= bound + slack
};

/// Compares the energy of a computed minimizer with the test-function bound.
UpperBoundCheck upper_bound_check(const Profile& profile, double slack = 1e-6);

/// Solves with the default solver and grid first.
UpperBoundCheck upper_bound_check(const Params& params, double slack = 1e-6);

/// max over nodes of |f - f_infinity(r)|.
double distance_to_limit(const Profile& profile);

/// p max over nodes in [0, a] of |f - (r / sqrt 2)(1 - ln p / p + ln(p g0(r)) / p)|,
/// g0(r) = (1/p)(1 - r^2/2)^2. Requires 0 < a < sqrt 2.
double expansion_check(const Profile& profile, double a);

}  // namespace pgl
