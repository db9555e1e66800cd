#include "pgl/grid.hpp"

#include "pgl/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pgl {

namespace {

std::vector<double> simpson_weights(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<double> w(n, 0.0);
    const std::size_t intervals = n - 1;
    const std::size_t paired = intervals - intervals % 2;
    for (std::size_t i = 0; i + 2 <= paired; i += 2) {
        const double h0 = x[i + 1] - x[i];
        const double h1 = x[i + 2] - x[i + 1];
        const double s = (h0 + h1) / 6.0;
        w[i] += s * (2.0 - h1 / h0);
        w[i + 1] += s * (h0 + h1) * (h0 + h1) / (h0 * h1);
        w[i + 2] += s * (2.0 - h0 / h1);
    }
    if (intervals % 2 == 1) {
        // quadratic through the last three nodes, integrated over the last interval
        const std::size_t k = n - 3;
        const double h0 = x[k + 1] - x[k];
        const double h1 = x[k + 2] - x[k + 1];
        w[k] += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        w[k + 1] += h1 * (h1 + 3.0 * h0) / (6.0 * h0);
        w[k + 2] += h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
    }
    return w;
}

}  // namespace

RadialGrid::RadialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 3) throw InvalidArgument("RadialGrid needs at least three nodes");
    if (nodes_.front() < 0.0) throw InvalidArgument("RadialGrid nodes must be nonnegative");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1]))
            throw InvalidArgument("RadialGrid nodes must be strictly increasing");
    }
    weights_ = simpson_weights(nodes_);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] > 0.0))
            throw InvalidArgument("RadialGrid grading too abrupt: nonpositive weight at node " +
                                  std::to_string(i));
    }
}

RadialGrid RadialGrid::uniform(double R, std::size_t n) {
    if (!(R > 0.0) || n < 3) throw InvalidArgument("uniform grid needs R > 0 and n >= 3");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = R * static_cast<double>(i) / static_cast<double>(n - 1);
    x.back() = R;
    return RadialGrid(std::move(x));
}

RadialGrid RadialGrid::graded(double R, std::size_t n) {
    if (!(R > 0.0) || n < 3) throw InvalidArgument("graded grid needs R > 0 and n >= 3");
    // target spacing, up to a global scale: linear growth away from both ends
    constexpr double core_spacing = 1e-3;
    constexpr double edge_spacing = 1e-2;
    constexpr double growth = 0.05;
    constexpr double max_spacing = 0.05;
    auto spacing = [R](double r) {
        return std::min({core_spacing + growth * r, edge_spacing + growth * (R - r), max_spacing});
    };

    // cumulative node density on a fine auxiliary mesh, then invert it
    const std::size_t m = std::max<std::size_t>(200000, 50 * n);
    std::vector<double> r(m + 1), cdf(m + 1, 0.0);
    for (std::size_t j = 0; j <= m; ++j) r[j] = R * static_cast<double>(j) / static_cast<double>(m);
    for (std::size_t j = 1; j <= m; ++j)
        cdf[j] = cdf[j - 1] + 0.5 * (r[j] - r[j - 1]) * (1.0 / spacing(r[j]) + 1.0 / spacing(r[j - 1]));
    const double total = cdf.back();

    std::vector<double> x(n);
    x.front() = 0.0;
    x.back() = R;
    std::size_t j = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double target = total * static_cast<double>(i) / static_cast<double>(n - 1);
        while (cdf[j + 1] < target) ++j;
        const double t = (target - cdf[j]) / (cdf[j + 1] - cdf[j]);
        x[i] = r[j] + t * (r[j + 1] - r[j]);
    }
    return RadialGrid(std::move(x));
}

std::size_t RadialGrid::last_node_not_after(double r) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    if (it == nodes_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(nodes_.begin(), it)) - 1;
}

double quad(std::span<const double> values, const RadialGrid& grid) {
    if (values.size() != grid.size())
        throw InvalidArgument("quad: values length " + std::to_string(values.size()) +
                              " does not match grid size " + std::to_string(grid.size()));
    const auto w = grid.weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += w[i] * values[i];
    return sum;
}

}  // namespace pgl
