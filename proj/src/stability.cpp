#include "pgl/stability.hpp"

#include <array>
#include <cmath>

#include "pgl/error.hpp"

namespace pgl {

const char* to_string(ModeKind kind) {
    switch (kind) {
    case ModeKind::e1_real: return "E1_real";
    case ModeKind::e1_imaginary: return "E1_imag";
    case ModeKind::en: return "En";
    case ModeKind::f2: return "F2";
    case ModeKind::g2: return "G2";
    }
    return "?";
}

namespace {

// Profile state at one radius.
struct Local {
    double r, f, tail, df, h, W, G;
    double one_minus_f2() const { return tail * (1.0 + f); }
};

Local make_local(double p, double r, double f, double tail, double df) {
    Local L{r, f, tail, df, 0.0, 0.0, 0.0};
    L.h = r * df / f;
    const double g = f / r;
    L.W = df * df + g * g;
    L.G = std::exp(0.5 * (p - 2.0) * std::log(L.W));
    return L;
}

Local node_local(const Profile& pr, std::size_t i) {
    return make_local(pr.params.p(), pr.grid[i], pr.f[i], pr.tail[i], pr.df[i]);
}

// Hermite cubic through the nodal values and slopes of the profile.
Local interpolate(const Profile& pr, std::size_t i, double t) {
    const double x0 = pr.grid[i], x1 = pr.grid[i + 1], d = x1 - x0;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double d00 = (6 * t2 - 6 * t) / d, d10 = 3 * t2 - 4 * t + 1, d01 = (-6 * t2 + 6 * t) / d,
                 d11 = 3 * t2 - 2 * t;
    const double f = h00 * pr.f[i] + h10 * d * pr.df[i] + h01 * pr.f[i + 1] + h11 * d * pr.df[i + 1];
    const double tail =
        h00 * pr.tail[i] - h10 * d * pr.df[i] + h01 * pr.tail[i + 1] - h11 * d * pr.df[i + 1];
    const double df = d00 * pr.f[i] + d10 * pr.df[i] + d01 * pr.f[i + 1] + d11 * pr.df[i + 1];
    return make_local(pr.params.p(), x0 + t * d, f, tail, df);
}

// Integrand z^T Q z with z = (values of the blocks, derivatives of the blocks).
struct LocalForm {
    std::size_t m;
    std::array<double, 16> q{};
    double& at(std::size_t i, std::size_t j) { return q[i * 2 * m + j]; }
    void diag(std::size_t i, double v) { at(i, i) += v; }
    // += c l l^T
    void outer(std::span<const double> l, double c) {
        for (std::size_t i = 0; i < 2 * m; ++i)
            for (std::size_t j = 0; j < 2 * m; ++j) at(i, j) += c * l[i] * l[j];
    }
};

// Potential terms V(r) z^T P z (r dr measure) use the same lumped weights as the
// mass; with Gauss points they would not, and a grid-scale oscillation would
// then see only part of its mass in the potential where the stiffness is weak.
using Potential = std::array<double, 4>;

template <class Q, class V>
ModeOperator assemble(const Profile& pr, ModeKind kind, int n, std::size_t m, Q local_form, V potential) {
    const RadialGrid& grid = pr.grid;
    const std::size_t N = grid.size();
    ModeOperator op{kind, n, m, pr.params.p(), grid, BandedSymmetricMatrix(N * m, 2 * m - 1),
                    std::vector<double>(N * m, 0.0), {}};
    const double gx[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double x0 = grid[i], x1 = grid[i + 1], d = x1 - x0;
        for (std::size_t j = 0; j < m; ++j) {
            op.mass[i * m + j] += d * (2 * x0 + x1) / 6.0;
            op.mass[(i + 1) * m + j] += d * (x0 + 2 * x1) / 6.0;
        }
        for (double t : gx) {
            const Local L = interpolate(pr, i, t);
            LocalForm Qf{m};
            local_form(L, Qf);
            // z_k = sum_l B(k, l) x_l over local unknowns x = (node i blocks, node i+1 blocks)
            std::array<double, 16> B{};
            const std::size_t nl = 2 * m;
            for (std::size_t j = 0; j < m; ++j) {
                B[j * nl + j] = 1.0 - t;
                B[j * nl + m + j] = t;
                B[(m + j) * nl + j] = -1.0 / d;
                B[(m + j) * nl + m + j] = 1.0 / d;
            }
            const double w = 0.5 * d;
            for (std::size_t a = 0; a < nl; ++a)
                for (std::size_t b = 0; b <= a; ++b) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < nl; ++k)
                        for (std::size_t l = 0; l < nl; ++l) s += B[k * nl + a] * Qf.q[k * nl + l] * B[l * nl + b];
                    op.form.add(i * m + a, i * m + b, w * s);
                }
        }
    }
    for (std::size_t i = 0; i < N; ++i) {
        Potential P{};
        potential(pr.f[i], pr.tail[i] * (1.0 + pr.f[i]), P);
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b <= a; ++b) op.form.add(i * m + a, i * m + b, op.mass[i * m] * P[a * m + b]);
    }
    return op;
}

std::vector<double> translation_nodal(const Profile& pr) {
    std::vector<double> z(2 * pr.grid.size());
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        z[2 * i] = i == 0 ? pr.df[0] : pr.f[i] / pr.grid[i];
        z[2 * i + 1] = pr.df[i];
    }
    return z;
}

// n = 2 sector: beyond R the coefficients are at their far-field limits, B is
// pinned near 0 by the f^2 B^2 term, and the decaying solution for A is
// A(R) R / r. Its energy (p/4) R^{2-p} A(R)^2 replaces the free end, which would
// miss the exterior part of the translation mode.
void add_exterior(ModeOperator& op) {
    const double R = op.grid.radius();
    const std::size_t last = op.grid.size() - 1;
    op.form.add(2 * last, 2 * last, 0.25 * op.p * std::pow(R, 2.0 - op.p));
}

}  // namespace

BandedSymmetricMatrix ModeOperator::weighted() const {
    std::vector<double> d(mass.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 / std::sqrt(mass[i]);
    return form.scaled(d);
}

ModeOperator assemble_E1(const Profile& pr, Part part) {
    const double p = pr.params.p();
    if (part == Part::imaginary) {
        ModeOperator op = assemble(pr, ModeKind::e1_imaginary, 1, 1, [&](const Local& L, LocalForm& Q) {
            const double K = 0.5 * p * L.G * L.r;
            Q.diag(0, K / (L.r * L.r));
            Q.diag(1, K);
        }, [](double, double w, Potential& P) { P[0] = -w; });
        op.zero_mode = pr.f;
        return op;
    }
    return assemble(pr, ModeKind::e1_real, 1, 1, [&](const Local& L, LocalForm& Q) {
        const double K = 0.5 * p * L.G * L.r;
        Q.diag(0, K / (L.r * L.r));
        Q.diag(1, K);
        const double l[2] = {L.f / (L.r * L.r), L.df};
        Q.outer(l, K * (p - 2.0) / L.W);
    }, [](double f, double w, Potential& P) { P[0] = 2.0 * f * f - w; });
}

ModeOperator assemble_En(int n, const Profile& pr) {
    if (n < 3) throw InvalidArgument("assemble_En: need n >= 3");
    const double p = pr.params.p();
    return assemble(pr, ModeKind::en, n, 2, [&](const Local& L, LocalForm& Q) {
        const double K = 0.5 * p * L.G * L.r, r2 = L.r * L.r;
        Q.diag(0, K * n * n / r2);
        Q.diag(1, K * (2.0 - n) * (2.0 - n) / r2);
        Q.diag(2, K);
        Q.diag(3, K);
        const double l[4] = {n * L.f / r2, (2.0 - n) * L.f / r2, L.df, L.df};
        Q.outer(l, 0.5 * K * (p - 2.0) / L.W);
    }, [](double f, double w, Potential& P) {
        P = {f * f - w, f * f, f * f, f * f - w};
    });
}

ModeOperator assemble_F2(const Profile& pr) {
    const double p = pr.params.p();
    ModeOperator op = assemble(pr, ModeKind::f2, 2, 2, [&](const Local& L, LocalForm& Q) {
        const double K = 0.25 * p * L.G * L.r, r2 = L.r * L.r;
        Q.diag(2, K);
        Q.diag(3, K);
        const double d[4] = {1.0, -1.0, 0.0, 0.0};
        Q.outer(d, 2.0 * K / r2);
        const double l[4] = {-L.f / r2, L.f / r2, 0.0, L.df};
        Q.outer(l, K * (p - 2.0) / L.W);
    }, [](double f, double w, Potential& P) { P = {-0.5 * w, 0.0, 0.0, f * f - 0.5 * w}; });
    add_exterior(op);
    op.zero_mode = translation_nodal(pr);
    return op;
}

G2Coefficients g2_coefficients(double p, double r, double f, double tail, double h) {
    const Local L = make_local(p, r, f, tail, h * f / r);
    const double g = f / r, h2 = h * h;
    const double dh = h_prime(p, r, f, tail, h);
    const double dW = 2.0 * g * g * ((h - 1.0) * (1.0 + h2) / r + h * dh);
    const double dG = 0.5 * (p - 2.0) * L.G * dW / L.W;
    G2Coefficients c;
    c.H = h * L.G / (1.0 + h2);
    c.dH = L.G * (1.0 - h2) * dh / ((1.0 + h2) * (1.0 + h2)) + h / (1.0 + h2) * dG;
    c.d_h2H = 2.0 * h * dh * c.H + h2 * c.dH;
    const double K = 0.25 * p * L.G * r, t = h2 / (1.0 + h2), r2 = r * r, s = 0.25 * p * (p - 2.0);
    const double V = 0.5 * r * L.one_minus_f2();
    c.alpha = K * (1.0 - (p - 2.0) * t);
    c.beta = K * (1.0 + (p - 2.0) * t);
    c.a = K * (2.0 + (p - 2.0) * (1.0 - h2)) / r2 - s * c.d_h2H - V;
    c.b = -K * (2.0 + (p - 2.0) * (1.0 - h2) / (1.0 + h2)) / r2 + s * c.dH;
    c.c = 2.0 * K / r2 - s * c.dH + r * f * f - V;
    return c;
}

G2Operator assemble_G2(const Profile& pr) {
    const double p = pr.params.p();
    G2Operator out{assemble(pr, ModeKind::g2, 2, 2,
                            [&](const Local& L, LocalForm& Q) {
                                // the potential parts of a and c are lumped below
                                const G2Coefficients c = g2_coefficients(p, L.r, L.f, L.tail, L.h);
                                const double w = 0.5 * L.r * L.one_minus_f2();
                                Q.diag(0, c.a + w);
                                Q.at(0, 1) += c.b;
                                Q.at(1, 0) += c.b;
                                Q.diag(1, c.c - L.r * L.f * L.f + w);
                                Q.diag(2, c.alpha);
                                Q.diag(3, c.beta);
                            },
                            [](double f, double w, Potential& P) { P = {-0.5 * w, 0.0, 0.0, f * f - 0.5 * w}; }),
                   {}};
    add_exterior(out.op);
    out.op.zero_mode = translation_nodal(pr);
    CoefficientTables& T = out.tables;
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        if (pr.grid[i] <= 0.0) continue;
        const G2Coefficients c = g2_coefficients(p, pr.grid[i], pr.f[i], pr.tail[i], pr.h[i]);
        T.r.push_back(pr.grid[i]);
        T.alpha.push_back(c.alpha);
        T.beta.push_back(c.beta);
        T.a.push_back(c.a);
        T.b.push_back(c.b);
        T.c.push_back(c.c);
        T.H.push_back(c.H);
    }
    return out;
}

SignCertificate coefficient_signs(const CoefficientTables& T, double p) {
    SignCertificate s;
    s.certified_range = p > 2.0 && p <= 4.0;
    for (std::size_t i = 0; i < T.r.size(); ++i) {
        if (!(T.alpha[i] > 0.0)) {
            s.alpha_positive = false;
            if (!s.first_alpha_violation) s.first_alpha_violation = T.r[i];
        }
        if (!(T.beta[i] > 0.0)) s.beta_positive = false;
        if (!(T.b[i] < 0.0)) {
            s.b_negative = false;
            if (!s.first_b_violation) s.first_b_violation = T.r[i];
        }
    }
    return s;
}

SpectrumReport spectrum(const ModeOperator& op, std::size_t k) {
    const BandedSymmetricMatrix w = op.weighted();
    SpectrumReport rep;
    rep.norm = w.norm_inf();
    rep.tol = 1e-6 * rep.norm;
    std::vector<double> z;
    if (!op.zero_mode.empty()) {
        z.resize(op.zero_mode.size());
        double nz = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            z[i] = std::sqrt(op.mass[i]) * op.zero_mode[i];
            nz += z[i] * z[i];
        }
        for (double& v : z) v /= std::sqrt(nz);
    }
    for (const EigenPair& e : lowest_eigenpairs(w, k)) {
        rep.eigenvalues.push_back(e.value);
        if (e.value < -rep.tol) ++rep.negative_count;
        double c = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) c += z[i] * e.vector[i];
        rep.zero_mode_overlaps.push_back(std::min(1.0, std::abs(c)));
    }
    return rep;
}

// ---- forms on sampled data ----

namespace {

void check_sizes(const Profile& pr, const Sampled& s) {
    if (s.u.size() != pr.grid.size() || s.du.size() != pr.grid.size())
        throw InvalidArgument("sampled data must have one value per grid node");
}

// Sums terms(i, out) over the nodes with r > 0; the integrands of all forms here
// vanish at r = 0 for data of finite form.
template <class Terms>
FormValue integrate_terms(const Profile& pr, Terms terms) {
    const std::size_t N = pr.grid.size();
    std::vector<double> val(N, 0.0), mag(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        if (pr.grid[i] <= 0.0) continue;
        std::array<double, 8> t{};
        const std::size_t used = terms(i, t);
        for (std::size_t k = 0; k < used; ++k) {
            val[i] += t[k];
            mag[i] += std::abs(t[k]);
        }
    }
    return {quad(val, pr.grid), quad(mag, pr.grid)};
}

}  // namespace

FormValue e1_tilde_value(const Profile& pr, const Sampled& phi) {
    check_sizes(pr, phi);
    const double p = pr.params.p();
    return integrate_terms(pr, [&](std::size_t i, std::array<double, 8>& t) {
        const Local L = node_local(pr, i);
        const double K = 0.5 * p * L.G * L.r, u = phi.u[i], du = phi.du[i];
        t[0] = K * du * du;
        t[1] = K * u * u / (L.r * L.r);
        t[2] = -L.r * L.one_minus_f2() * u * u;
        return std::size_t{3};
    });
}

FormValue e1_weighted_gradient(const Profile& pr, const Sampled& w) {
    check_sizes(pr, w);
    const double p = pr.params.p();
    return integrate_terms(pr, [&](std::size_t i, std::array<double, 8>& t) {
        const Local L = node_local(pr, i);
        t[0] = 0.5 * p * L.G * L.r * L.f * L.f * w.du[i] * w.du[i];
        return std::size_t{1};
    });
}

namespace {

std::size_t f2_terms(double p, const Local& L, double a, double da, double b, double db,
                     std::array<double, 8>& t) {
    const double K = 0.25 * p * L.G * L.r, r2 = L.r * L.r;
    const double mixed = L.df * db - L.f / r2 * (a - b);
    t[0] = K * da * da;
    t[1] = K * db * db;
    t[2] = 2.0 * K * (a - b) * (a - b) / r2;
    t[3] = K * (p - 2.0) * mixed * mixed / L.W;
    t[4] = L.r * L.f * L.f * b * b;
    t[5] = -0.5 * L.r * L.one_minus_f2() * (a * a + b * b);
    return 6;
}

std::size_t g2_terms(double p, const Local& L, double a, double da, double b, double db,
                     std::array<double, 8>& t) {
    const G2Coefficients c = g2_coefficients(p, L.r, L.f, L.tail, L.h);
    t[0] = c.alpha * da * da;
    t[1] = c.beta * db * db;
    t[2] = c.a * a * a;
    t[3] = 2.0 * c.b * a * b;
    t[4] = c.c * b * b;
    return 5;
}

}  // namespace

FormValue f2_value(const Profile& pr, const Sampled& A, const Sampled& B) {
    check_sizes(pr, A);
    check_sizes(pr, B);
    const double p = pr.params.p();
    return integrate_terms(pr, [&](std::size_t i, std::array<double, 8>& t) {
        return f2_terms(p, node_local(pr, i), A.u[i], A.du[i], B.u[i], B.du[i], t);
    });
}

FormValue g2_value(const Profile& pr, const Sampled& A, const Sampled& B) {
    check_sizes(pr, A);
    check_sizes(pr, B);
    const double p = pr.params.p();
    return integrate_terms(pr, [&](std::size_t i, std::array<double, 8>& t) {
        return g2_terms(p, node_local(pr, i), A.u[i], A.du[i], B.u[i], B.du[i], t);
    });
}

TranslationIdentity translation_identity(const Profile& pr) {
    const double p = pr.params.p(), R = pr.grid.radius();
    const auto [A, B] = translation_mode(pr);
    TranslationIdentity out;
    out.f2_interior = f2_value(pr, A, B);
    out.g2_interior = g2_value(pr, A, B);

    // beyond R along the far-field series, in x = ln(r / R); the integrands
    // times r decay like e^{-p x}
    const TailExpansion tail(p);
    const double X = 60.0 / p;
    const int panels = 400;
    const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                          0.9061798459386640};
    const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                          0.2369268850561891};
    FormValue f2_out, g2_out;
    for (int k = 0; k < panels; ++k) {
        const double x0 = X * k / panels, x1 = X * (k + 1) / panels;
        for (int j = 0; j < 5; ++j) {
            const double x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gx[j];
            const double w = 0.5 * (x1 - x0) * gw[j];
            const double r = R * std::exp(x);
            const TailExpansion::Value v = tail(r);
            const Local L = make_local(p, r, 1.0 - v.q, v.q, v.r_df / r);
            const double g = L.f / r, a = g, da = g * (L.h - 1.0) / r;
            const double b = L.df, db = v.r2_d2f / (r * r);
            std::array<double, 8> t{};
            for (std::size_t m = f2_terms(p, L, a, da, b, db, t), i = 0; i < m; ++i) {
                f2_out.value += w * r * t[i];
                f2_out.scale += w * r * std::abs(t[i]);
            }
            t = {};
            for (std::size_t m = g2_terms(p, L, a, da, b, db, t), i = 0; i < m; ++i) {
                g2_out.value += w * r * t[i];
                g2_out.scale += w * r * std::abs(t[i]);
            }
        }
    }
    out.f2 = {out.f2_interior.value + f2_out.value, out.f2_interior.scale + f2_out.scale};
    out.g2 = {out.g2_interior.value + g2_out.value, out.g2_interior.scale + g2_out.scale};
    return out;
}

FormValue g2_remainder(const Profile& pr, const Sampled& A, const Sampled& B) {
    check_sizes(pr, A);
    check_sizes(pr, B);
    const double p = pr.params.p();
    return integrate_terms(pr, [&](std::size_t i, std::array<double, 8>& t) {
        const Local L = node_local(pr, i);
        const double h = pr.h[i];
        const double e = h * A.du[i] - (h * h * A.u[i] - B.u[i]) / L.r;
        t[0] = 0.25 * p * (p - 2.0) * L.G * e * e / (1.0 + h * h) * L.r;
        return std::size_t{1};
    });
}

std::pair<Sampled, Sampled> translation_mode(const Profile& pr) {
    const std::size_t N = pr.grid.size();
    const double p = pr.params.p();
    Sampled A{std::vector<double>(N), std::vector<double>(N)}, B = A;
    for (std::size_t i = 0; i < N; ++i) {
        const double r = pr.grid[i];
        if (r <= 0.0) {
            A.u[i] = pr.df[i];
            B.u[i] = pr.df[i];
            continue;  // both slopes vanish at the origin
        }
        const double g = pr.f[i] / r, h = pr.h[i];
        const double dg = g * (h - 1.0) / r;
        A.u[i] = g;
        A.du[i] = dg;
        B.u[i] = pr.df[i];
        B.du[i] = h_prime(p, r, pr.f[i], pr.tail[i], h) * g + h * dg;
    }
    return {A, B};
}

PiconeResult picone_certificate(const Profile& pr, const Sampled& u, const Sampled& v) {
    check_sizes(pr, u);
    check_sizes(pr, v);
    const std::size_t last = pr.grid.size() - 1;
    for (const Sampled* s : {&u, &v})
        if (s->u[0] != 0.0 || s->du[0] != 0.0 || s->u[last] != 0.0 || s->du[last] != 0.0)
            throw InvalidArgument("picone_certificate: test pair must vanish at both ends of the grid");
    const double p = pr.params.p();
    PiconeResult res;
    const FormValue g = g2_value(pr, u, v);
    const FormValue bound = integrate_terms(pr, [&](std::size_t i, std::array<double, 8>& t) {
        if (u.u[i] == 0.0 && v.u[i] == 0.0) return std::size_t{0};
        const double phi = pr.f[i] / pr.grid[i], psi = pr.df[i];
        const double b = g2_coefficients(p, pr.grid[i], pr.f[i], pr.tail[i], pr.h[i]).b;
        const double e = u.u[i] * std::sqrt(psi / phi) - v.u[i] * std::sqrt(phi / psi);
        t[0] = -b * e * e;
        return std::size_t{1};
    });
    res.g2 = g.value;
    res.bound = bound.value;
    res.residual = g.value - bound.value;
    res.scale = g.scale + bound.scale;
    res.pass = res.residual >= -1e-8 * res.scale;
    return res;
}

Profile coarsen(const Profile& pr) {
    const std::size_t N = pr.grid.size();
    if (N % 2 == 0 || N < 5) throw InvalidArgument("coarsen: need an odd node count of at least 5");
    std::vector<double> nodes;
    Profile out = pr;
    out.f.clear();
    out.df.clear();
    out.h.clear();
    out.gradient_norm.clear();
    out.tail.clear();
    for (std::size_t i = 0; i < N; i += 2) {
        nodes.push_back(pr.grid[i]);
        out.f.push_back(pr.f[i]);
        out.df.push_back(pr.df[i]);
        out.h.push_back(pr.h[i]);
        out.gradient_norm.push_back(pr.gradient_norm[i]);
        out.tail.push_back(pr.tail[i]);
    }
    out.grid = RadialGrid(std::move(nodes));
    return out;
}

StabilitySurvey stability_survey(const Profile& pr, int max_mode, std::size_t k) {
    if (max_mode < 2) throw InvalidArgument("stability_survey: need max_mode >= 2");
    const Profile coarse = coarsen(pr);
    StabilitySurvey out;
    out.p = pr.params.p();
    auto add = [&](int n, ModeKind kind, std::size_t copies, const ModeOperator& fine,
                   const ModeOperator& rough) {
        ModeSpectrum m;
        m.n = n;
        m.kind = kind;
        m.copies = copies;
        m.report = spectrum(fine, k);
        const SpectrumReport ref = spectrum(rough, k);
        for (std::size_t i = 0; i < k; ++i) {
            const double lam = m.report.eigenvalues[i];
            m.drift.push_back(std::abs(lam - ref.eigenvalues[i]));
            if (std::abs(lam) <= 100.0 * m.drift.back()) {
                ++m.near_zero;
                if (!fine.zero_mode.empty())
                    out.min_kernel_overlap = std::min(out.min_kernel_overlap, m.report.zero_mode_overlaps[i]);
                else
                    out.min_kernel_overlap = 0.0;  // a near-zero direction with no known kernel element
            }
        }
        out.kernel_dimension += copies * m.near_zero;
        out.negative_count += copies * m.report.negative_count;
        out.modes.push_back(std::move(m));
    };
    add(1, ModeKind::e1_real, 1, assemble_E1(pr, Part::real), assemble_E1(coarse, Part::real));
    add(1, ModeKind::e1_imaginary, 1, assemble_E1(pr, Part::imaginary), assemble_E1(coarse, Part::imaginary));
    add(2, ModeKind::f2, 2, assemble_F2(pr), assemble_F2(coarse));
    for (int n = 3; n <= max_mode; ++n) add(n, ModeKind::en, 1, assemble_En(n, pr), assemble_En(n, coarse));
    return out;
}

}  // namespace pgl
