#include "pgl/banded.hpp"

#include "pgl/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace pgl {

BandedSymmetricMatrix::BandedSymmetricMatrix(std::size_t order, std::size_t bandwidth)
    : order_(order), kd_(bandwidth), band_((bandwidth + 1) * order, 0.0) {
    if (order == 0) throw InvalidArgument("BandedSymmetricMatrix: order must be positive");
    if (bandwidth >= order && order > 1) kd_ = order - 1, band_.assign((kd_ + 1) * order, 0.0);
}

double BandedSymmetricMatrix::operator()(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    if (i - j > kd_) return 0.0;
    return band_[(i - j) + j * (kd_ + 1)];
}

void BandedSymmetricMatrix::add(std::size_t i, std::size_t j, double v) {
    if (i < j) std::swap(i, j);
    if (i >= order_ || i - j > kd_)
        throw InvalidArgument("BandedSymmetricMatrix::add outside band (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
    band_[(i - j) + j * (kd_ + 1)] += v;
}

std::vector<double> BandedSymmetricMatrix::multiply(std::span<const double> x) const {
    if (x.size() != order_) throw InvalidArgument("BandedSymmetricMatrix::multiply size mismatch");
    std::vector<double> y(order_, 0.0);
    for (std::size_t j = 0; j < order_; ++j) {
        y[j] += band_[j * (kd_ + 1)] * x[j];
        const std::size_t last = std::min(order_ - 1, j + kd_);
        for (std::size_t i = j + 1; i <= last; ++i) {
            const double a = band_[(i - j) + j * (kd_ + 1)];
            y[i] += a * x[j];
            y[j] += a * x[i];
        }
    }
    return y;
}

double BandedSymmetricMatrix::quadratic_form(std::span<const double> x) const {
    const auto y = multiply(x);
    double s = 0.0;
    for (std::size_t i = 0; i < order_; ++i) s += x[i] * y[i];
    return s;
}

double BandedSymmetricMatrix::norm_inf() const {
    std::vector<double> row(order_, 0.0);
    for (std::size_t j = 0; j < order_; ++j) {
        row[j] += std::abs(band_[j * (kd_ + 1)]);
        const std::size_t last = std::min(order_ - 1, j + kd_);
        for (std::size_t i = j + 1; i <= last; ++i) {
            const double a = std::abs(band_[(i - j) + j * (kd_ + 1)]);
            row[i] += a;
            row[j] += a;
        }
    }
    return *std::max_element(row.begin(), row.end());
}

BandedSymmetricMatrix BandedSymmetricMatrix::scaled(std::span<const double> d) const {
    if (d.size() != order_) throw InvalidArgument("BandedSymmetricMatrix::scaled size mismatch");
    BandedSymmetricMatrix out(order_, kd_);
    for (std::size_t j = 0; j < order_; ++j) {
        const std::size_t last = std::min(order_ - 1, j + kd_);
        for (std::size_t i = j; i <= last; ++i) {
            const std::size_t at = (i - j) + j * (kd_ + 1);
            out.band_[at] = d[i] * band_[at] * d[j];
        }
    }
    return out;
}

bool BandedSymmetricMatrix::all_finite() const {
    return std::all_of(band_.begin(), band_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

// Inverse iteration for one eigenvector at a computed eigenvalue, orthogonal to
// the vectors in `cluster` (already converged vectors with close eigenvalues).
std::vector<double> inverse_iteration(const BandedSymmetricMatrix& m, double lambda,
                                      const std::vector<const std::vector<double>*>& cluster,
                                      double norm, std::size_t seed) {
    const std::size_t n = m.order();
    const std::size_t kd = m.bandwidth();
    const lapack_int ln = static_cast<lapack_int>(n);
    const lapack_int lkd = static_cast<lapack_int>(kd);
    const lapack_int ldab = 3 * lkd + 1;

    // perturb the shift off the eigenvalue so the factorization stays regular;
    // the offset must stay well below the gap to the next eigenvalue
    const double shift = lambda - 1e-14 * std::max(norm, 1e-300) * (1.0 + 0.1 * static_cast<double>(seed));
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t lo = j >= kd ? j - kd : 0;
        const std::size_t hi = std::min(n - 1, j + kd);
        for (std::size_t i = lo; i <= hi; ++i) {
            double v = m(i, j);
            if (i == j) v -= shift;
            ab[static_cast<std::size_t>(2 * lkd) + i - j + j * static_cast<std::size_t>(ldab)] = v;
        }
    }
    std::vector<lapack_int> ipiv(n);
    const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, ln, ln, lkd, lkd, ab.data(), ldab, ipiv.data());
    if (info < 0) throw NumericalError("lowest_eigenpairs: band factorization failed");
    if (info > 0) ab[static_cast<std::size_t>(2 * lkd) + static_cast<std::size_t>(info - 1) * static_cast<std::size_t>(ldab + 1)] = 1e-300;

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 1.3 * static_cast<double>(seed));
    auto orthonormalize = [&]() {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto* u : cluster) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += (*u)[i] * v[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * (*u)[i];
            }
        }
        double nv = 0.0;
        for (double x : v) nv += x * x;
        nv = std::sqrt(nv);
        if (!(nv > 0.0) || !std::isfinite(nv)) return false;
        for (double& x : v) x /= nv;
        return true;
    };
    orthonormalize();
    // iterate until the direction settles; a residual test against ||M|| would
    // accept vectors far from converged when the eigenvalue is tiny
    for (int iter = 0; iter < 60; ++iter) {
        const std::vector<double> old = v;
        if (LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', ln, lkd, lkd, 1, ab.data(), ldab, ipiv.data(),
                           v.data(), ln) != 0)
            throw NumericalError("lowest_eigenpairs: band solve failed");
        if (!orthonormalize()) throw NumericalError("lowest_eigenpairs: inverse iteration collapsed");
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += old[i] * v[i];
        if (iter >= 1 && 1.0 - std::abs(c) < 1e-14) break;
    }
    return v;
}

}  // namespace

std::vector<double> cholesky_solve(const BandedSymmetricMatrix& m, std::span<const double> b) {
    if (b.size() != m.order()) throw InvalidArgument("cholesky_solve: length mismatch");
    const auto n = static_cast<lapack_int>(m.order());
    const auto kd = static_cast<lapack_int>(m.bandwidth());
    std::vector<double> ab(m.packed().begin(), m.packed().end());
    if (LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'L', n, kd, ab.data(), kd + 1) != 0) return {};
    std::vector<double> x(b.begin(), b.end());
    if (LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'L', n, kd, 1, ab.data(), kd + 1, x.data(), n) != 0) return {};
    return x;
}

std::vector<EigenPair> lowest_eigenpairs(const BandedSymmetricMatrix& m, std::size_t k) {
    const std::size_t n = m.order();
    if (k == 0 || k > n) throw InvalidArgument("lowest_eigenpairs: need 1 <= k <= order");
    if (!m.all_finite()) throw InvalidArgument("lowest_eigenpairs: non-finite matrix entry");

    const lapack_int ln = static_cast<lapack_int>(n);
    const lapack_int kd = static_cast<lapack_int>(m.bandwidth());
    std::vector<double> ab(m.packed().begin(), m.packed().end());
    std::vector<double> w(n), q(1), z(1);
    std::vector<lapack_int> ifail(n);
    lapack_int found = 0;
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'L', ln, kd, ab.data(), kd + 1,
                                           q.data(), 1, 0.0, 0.0, 1, static_cast<lapack_int>(k),
                                           abstol, &found, w.data(), z.data(), 1, ifail.data());
    if (info != 0 || found != static_cast<lapack_int>(k))
        throw NumericalError("lowest_eigenpairs: band eigensolver failed to converge (info = " +
                             std::to_string(info) + ")");

    const double norm = m.norm_inf();
    std::vector<EigenPair> out(k);
    for (std::size_t e = 0; e < k; ++e) {
        std::vector<const std::vector<double>*> cluster;
        for (std::size_t f = 0; f < e; ++f)
            if (std::abs(w[f] - w[e]) <= 1e-6 * norm) cluster.push_back(&out[f].vector);
        out[e].vector = inverse_iteration(m, w[e], cluster, norm, e);
        auto& v = out[e].vector;
        // the Rayleigh quotient is more accurate than the tridiagonal-based value
        // for small eigenvalues of strongly graded matrices
        out[e].value = m.quadratic_form(v);
        // fix the sign so the largest component is positive
        const auto big = std::max_element(v.begin(), v.end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
        if (*big < 0.0)
            for (double& x : v) x = -x;

        const auto mv = m.multiply(v);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            res += (mv[i] - out[e].value * v[i]) * (mv[i] - out[e].value * v[i]);
        if (std::sqrt(res) > 1e-9 * norm)
            throw NumericalError("lowest_eigenpairs: residual bound violated for eigenpair " +
                                 std::to_string(e));
    }
    std::stable_sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
    return out;
}

}  // namespace pgl
