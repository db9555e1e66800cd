#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pgl {

/// Real symmetric band matrix; only the lower band is stored, in LAPACK 'L'
/// band layout (column-major, kd + 1 rows).
class BandedSymmetricMatrix {
public:
    BandedSymmetricMatrix(std::size_t order, std::size_t bandwidth);

    std::size_t order() const noexcept { return order_; }
    std::size_t bandwidth() const noexcept { return kd_; }

    /// Entry (i, j); zero outside the band.
    double operator()(std::size_t i, std::size_t j) const;
    /// Adds v to entries (i, j) and (j, i) (once when i == j).
    void add(std::size_t i, std::size_t j, double v);

    std::vector<double> multiply(std::span<const double> x) const;
    double quadratic_form(std::span<const double> x) const;
    /// Max absolute row sum; an upper bound for the spectral norm.
    double norm_inf() const;
    /// D M D for diagonal D given by d.
    BandedSymmetricMatrix scaled(std::span<const double> d) const;
    bool all_finite() const;

    std::span<const double> packed() const noexcept { return band_; }

private:
    std::size_t order_;
    std::size_t kd_;
    std::vector<double> band_;
};

/// Solves M x = b by banded Cholesky; empty result when M is not numerically
/// positive definite.
std::vector<double> cholesky_solve(const BandedSymmetricMatrix& m, std::span<const double> b);

struct EigenPair {
    double value;
    std::vector<double> vector;  ///< unit 2-norm
};

/// The k algebraically smallest eigenpairs, nondecreasing. Every returned pair
/// satisfies ||Mv - lambda v||_2 <= 1e-9 ||M||_inf.
///
/// Throws InvalidArgument when k > order and NumericalError when the band
/// eigensolver does not converge or the residual bound cannot be met.
std::vector<EigenPair> lowest_eigenpairs(const BandedSymmetricMatrix& m, std::size_t k);

}  // namespace pgl
