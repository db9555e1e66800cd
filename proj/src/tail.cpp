#include "pgl/error.hpp"
#include "pgl/profile.hpp"

#include <cmath>
#include <functional>

// Substituting f = 1 - Q(s), s = r^{-p}, into
//   (2/p) f (1 - f^2) = G f / r^2 - (1/r) (r G f')',  G = |grad u|^{p-2},
// every term is r^{-p} times a power series in s, and the coefficient of s^k
// on the right only involves c_1 .. c_{k-1}. With P = r f' = p sum k c_k s^k and
// W = f^2 + P^2 (so |grad u|^2 = W / r^2):
//   G f / r^2        = s W^a (1 - Q),              a = (p - 2) / 2
//   (1/r)(r G f')'   = s [(2 - p) V - p s V_s],    V = W^a P

namespace pgl {
namespace {

using Series = std::vector<double>;  // coefficients of s^0 .. s^K

Series mul(const Series& a, const Series& b) {
    Series out(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; i + j < a.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// W^alpha for W_0 = 1
Series power(const Series& w, double alpha) {
    Series b(w.size(), 0.0);
    b[0] = 1.0;
    for (std::size_t n = 1; n < w.size(); ++n) {
        double acc = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            acc += (alpha * double(k) - double(n - k)) * w[k] * b[n - k];
        b[n] = acc / double(n);
    }
    return b;
}

}  // namespace

TailExpansion::TailExpansion(double p, std::size_t terms) : p_(p) {
    if (!(p > 2.0)) throw InvalidArgument("p must exceed 2");
    if (terms < 1) throw InvalidArgument("TailExpansion: need at least one term");
    const std::size_t K = terms;
    Series c(K + 1, 0.0);
    const double alpha = 0.5 * (p - 2.0);
    for (std::size_t k = 1; k <= K; ++k) {
        Series F(K + 1, 0.0), P(K + 1, 0.0), Q2(K + 1, 0.0);
        F[0] = 1.0;
        for (std::size_t i = 1; i <= K; ++i) {
            F[i] = -c[i];
            P[i] = p * double(i) * c[i];
        }
        Series W = mul(F, F);
        const Series PP = mul(P, P);
        for (std::size_t i = 0; i <= K; ++i) W[i] += PP[i];
        const Series Wa = power(W, alpha);
        const Series A = mul(Wa, F);
        const Series V = mul(Wa, P);
        const Series QQ = mul(c, c);
        for (std::size_t i = 0; i <= K; ++i) Q2[i] = 2.0 * c[i] - QQ[i];
        const Series L = mul(F, Q2);
        // coefficient of s^k: right side A - B is shifted by one power of s
        const double rhs = A[k - 1] - ((2.0 - p) - p * double(k - 1)) * V[k - 1];
        c[k] = 0.25 * p * (rhs - 2.0 / p * L[k]);
    }
    c_.assign(c.begin() + 1, c.end());
}

TailExpansion::Value TailExpansion::operator()(double r) const {
    if (!(r > 0.0)) throw InvalidArgument("TailExpansion: r must be positive");
    const double s = std::pow(r, -p_);
    Value v;
    double term_prev = INFINITY, sk = 1.0;
    for (std::size_t k = 1; k <= c_.size(); ++k) {
        sk *= s;
        const double term = c_[k - 1] * sk;
        if (std::abs(term) >= std::abs(term_prev)) break;
        v.q += term;
        v.r_df += p_ * double(k) * term;
        v.r2_d2f -= p_ * p_ * double(k) * double(k) * term;
        v.error = std::abs(term);
        term_prev = term;
    }
    v.r2_d2f -= v.r_df;
    return v;
}

namespace {

// sum_k a_k S^k / d_k up to the smallest term
double sum_smallest(const Series& a, double S, const std::function<double(std::size_t)>& d) {
    double total = 0.0, prev = INFINITY, Sk = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double term = a[k] * Sk / d(k);
        Sk *= S;
        if (a[k] == 0.0) continue;
        if (std::abs(term) >= std::abs(prev)) break;
        total += term;
        prev = term;
    }
    return total;
}

}  // namespace

double TailExpansion::kinetic_beyond(double R) const {
    if (!(R > 0.0)) throw InvalidArgument("TailExpansion: R must be positive");
    const std::size_t K = c_.size();
    Series F(K + 1, 0.0), P(K + 1, 0.0);
    F[0] = 1.0;
    for (std::size_t k = 1; k <= K; ++k) {
        F[k] = -c_[k - 1];
        P[k] = p_ * double(k) * c_[k - 1];
    }
    Series W = mul(F, F);
    const Series PP = mul(P, P);
    for (std::size_t i = 0; i <= K; ++i) W[i] += PP[i];
    // |grad u|^p r = r^{1-p} W^{p/2}; \int_R^\infty r^{1-p-kp} dr = R^{2-p} S^k / (p - 2 + kp)
    const Series b = power(W, 0.5 * p_);
    const double S = std::pow(R, -p_);
    return std::pow(R, 2.0 - p_) * sum_smallest(b, S, [this](std::size_t k) { return p_ - 2.0 + double(k) * p_; });
}

double TailExpansion::potential_beyond(double R) const {
    if (!(R > 0.0)) throw InvalidArgument("TailExpansion: R must be positive");
    const std::size_t K = c_.size();
    Series Q(K + 1, 0.0);
    for (std::size_t k = 1; k <= K; ++k) Q[k] = c_[k - 1];
    const Series QQ = mul(Q, Q);
    Series w(K + 1, 0.0);  // 1 - f^2
    for (std::size_t i = 0; i <= K; ++i) w[i] = 2.0 * Q[i] - QQ[i];
    Series e = mul(w, w);
    for (double& x : e) x *= 0.5;
    // \int_R^\infty r^{1-kp} dr = R^2 S^k / (kp - 2), k >= 2
    const double S = std::pow(R, -p_);
    return R * R * sum_smallest(e, S, [this](std::size_t k) { return k < 2 ? 1.0 : double(k) * p_ - 2.0; });
}

double tail_target(double p, double R) { return TailExpansion(p)(R).q; }

}  // namespace pgl
