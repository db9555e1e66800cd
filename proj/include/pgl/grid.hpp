#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pgl {

/// Node set on a truncated radial domain [0, R] with quadrature weights for
/// integrals of the form \int_0^R g(r) dr.
///
/// The weights implement composite Simpson on consecutive interval pairs
/// (fourth order on smooth nonuniform grids, exact for piecewise quadratics);
/// when the interval count is odd the last interval is integrated with the
/// quadratic through the last three nodes. Weights are required to be positive,
/// which holds for any grid whose neighbouring spacings differ by less than 2x.
class RadialGrid {
public:
    /// Builds a grid from explicit strictly increasing nodes (at least three).
    explicit RadialGrid(std::vector<double> nodes);

    /// Uniform grid with n nodes on [0, R].
    static RadialGrid uniform(double R, std::size_t n);

    /// Graded grid with n nodes on [0, R]: spacing grows geometrically away from
    /// r = 0 and away from r = R and is capped in the interior. For R >= 8 and
    /// n >= 700 at least 50 nodes fall in [0, 0.1] and at least 50 in [R - 1, R].
    static RadialGrid graded(double R, std::size_t n);

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double radius() const noexcept { return nodes_.back(); }
    std::size_t size() const noexcept { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }

    /// Index of the last node with r_i <= r (0 if r < r_0).
    std::size_t last_node_not_after(double r) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Composite quadrature of sampled values on the grid (see RadialGrid).
double quad(std::span<const double> values, const RadialGrid& grid);

}  // namespace pgl
