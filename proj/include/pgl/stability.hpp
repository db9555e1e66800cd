#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pgl/banded.hpp"
#include "pgl/grid.hpp"
#include "pgl/profile.hpp"

namespace pgl {

enum class Part { real, imaginary };

enum class ModeKind { e1_real, e1_imaginary, en, f2, g2 };

const char* to_string(ModeKind kind);

/// Discretized second-variation form on the profile grid. Test functions are
/// continuous piecewise linear; integrals use two Gauss points per interval
/// with the profile interpolated by Hermite cubics. The end r = 0 is free. At
/// r = R the n = 2 operators (F2, G2) carry the energy of the decaying exterior
/// continuation of A, (p/4) R^{2-p} A(R)^2; the others are free there too.
///
/// Nodal vectors of two-block operators are interleaved: (u_0, v_0, u_1, v_1, ...).
struct ModeOperator {
    ModeKind kind = ModeKind::e1_imaginary;
    int mode_index = 1;
    std::size_t blocks = 1;
    double p = 0.0;
    RadialGrid grid;
    BandedSymmetricMatrix form;  ///< v^T form v is the quadratic form value
    std::vector<double> mass;    ///< lumped \int N_i r dr, one entry per unknown
    std::vector<double> zero_mode;  ///< analytic kernel element in nodal form, empty if none

    std::size_t dimension() const noexcept { return form.order(); }
    double value(std::span<const double> v) const { return form.quadratic_form(v); }
    /// M^{-1/2} form M^{-1/2}: eigenvalues are Rayleigh quotients in L^2(r dr).
    BandedSymmetricMatrix weighted() const;
};

/// n = 1. The imaginary part is E~_1; the real part adds 2 f^2 u^2 and the
/// (p-2) term. The two parts do not couple.
ModeOperator assemble_E1(const Profile& profile, Part part);

/// n >= 3, on real pairs (u_1, u_2) = (phi_n, phi_{2-n}).
ModeOperator assemble_En(int n, const Profile& profile);

/// n = 2 in the variables A = phi_0 + phi_2, B = phi_0 - phi_2.
ModeOperator assemble_F2(const Profile& profile);

/// Pointwise coefficients of G_2 written as
/// \int (alpha u'^2 + beta v'^2 + a u^2 + 2 b u v + c v^2) dr.
struct G2Coefficients {
    double alpha = 0.0, beta = 0.0, a = 0.0, b = 0.0, c = 0.0;
    double H = 0.0;         ///< h |grad u|^{p-2} / (1 + h^2)
    double dH = 0.0;        ///< H'
    double d_h2H = 0.0;     ///< (h^2 H)'
};

/// Coefficients at radius r > 0 from the local profile state (f, 1 - f, h).
/// H' uses h' from the profile equation and the exact derivative of |grad u|^2.
G2Coefficients g2_coefficients(double p, double r, double f, double tail, double h);

/// Nodal coefficient tables at the nodes with r > 0.
struct CoefficientTables {
    std::vector<double> r, alpha, beta, a, b, c, H;
};

struct G2Operator {
    ModeOperator op;
    CoefficientTables tables;
};

G2Operator assemble_G2(const Profile& profile);

struct SignCertificate {
    bool alpha_positive = true;
    bool beta_positive = true;
    bool b_negative = true;
    std::optional<double> first_alpha_violation;  ///< radius
    std::optional<double> first_b_violation;
    bool all_hold() const noexcept { return alpha_positive && beta_positive && b_negative; }
    /// Whether all_hold() is a claim: only for 2 < p <= 4.
    bool certified_range = false;
};

SignCertificate coefficient_signs(const CoefficientTables& tables, double p);

struct SpectrumReport {
    std::vector<double> eigenvalues;         ///< lowest k, nondecreasing
    std::vector<double> zero_mode_overlaps;  ///< |cos| against the analytic zero mode, per eigenvalue
    std::size_t negative_count = 0;          ///< eigenvalues below -tol
    double norm = 0.0;                       ///< bound on the weighted operator norm
    double tol = 0.0;                        ///< 1e-6 norm
};

/// Lowest k eigenpairs of the weighted operator.
SpectrumReport spectrum(const ModeOperator& op, std::size_t k);

/// Value of a form evaluated on function data, with the integral of the
/// absolute values of its terms as a magnitude reference.
struct FormValue {
    double value = 0.0;
    double scale = 0.0;
};

/// Smooth test data on the grid nodes: values and exact derivatives.
struct Sampled {
    std::vector<double> u, du;
};

FormValue e1_tilde_value(const Profile& profile, const Sampled& phi);
/// \int (p/2)|grad u|^{p-2} f^2 w'^2 r dr
FormValue e1_weighted_gradient(const Profile& profile, const Sampled& w);
FormValue f2_value(const Profile& profile, const Sampled& A, const Sampled& B);
FormValue g2_value(const Profile& profile, const Sampled& A, const Sampled& B);
/// \int p(p-2)/4 |grad u|^{p-2} (h A' - (h^2 A - B)/r)^2 / (1 + h^2) r dr
FormValue g2_remainder(const Profile& profile, const Sampled& A, const Sampled& B);

/// The analytic n = 2 kernel (A, B) = (f/r, f') with derivatives.
std::pair<Sampled, Sampled> translation_mode(const Profile& profile);

/// F_2 and G_2 of the translation mode on (0, inf): the grid part plus the
/// part beyond R, integrated along the far-field series.
struct TranslationIdentity {
    FormValue f2, g2;
    FormValue f2_interior, g2_interior;  ///< [0, R] only
};

TranslationIdentity translation_identity(const Profile& profile);

struct PiconeResult {
    double g2 = 0.0;      ///< G_2(u, v)
    double bound = 0.0;   ///< \int (-b) (u sqrt(psi/phi) - v sqrt(phi/psi))^2 dr
    double residual = 0.0;  ///< g2 - bound
    double scale = 0.0;
    bool pass = false;    ///< residual >= -1e-8 scale
};

/// Picone lower bound for G_2 with (phi, psi) = (f/r, f'). The pair must vanish
/// on the first and last grid nodes (InvalidArgument otherwise).
PiconeResult picone_certificate(const Profile& profile, const Sampled& u, const Sampled& v);

/// Every mode family at one p: n = 1 (real and imaginary parts), n = 2 (F2,
/// which occurs twice, once for each of the real and imaginary sectors) and
/// En for 3 <= n <= max_mode.
struct ModeSpectrum {
    int n = 1;
    ModeKind kind = ModeKind::e1_imaginary;
    std::size_t copies = 1;
    SpectrumReport report;
    std::vector<double> drift;  ///< |lambda - lambda on every other node|
    std::size_t near_zero = 0;  ///< eigenvalues with |lambda| <= 100 drift
};

struct StabilitySurvey {
    double p = 0.0;
    std::vector<ModeSpectrum> modes;
    std::size_t kernel_dimension = 0;  ///< sum of copies * near_zero
    std::size_t negative_count = 0;
    double min_kernel_overlap = 1.0;   ///< over the near-zero eigenvectors with a known zero mode
    bool stable() const noexcept { return negative_count == 0; }
};

/// The profile grid needs an odd node count so that every other node (the
/// drift reference) keeps both ends.
StabilitySurvey stability_survey(const Profile& profile, int max_mode = 8, std::size_t k = 6);

/// The profile restricted to every other node.
Profile coarsen(const Profile& profile);

}  // namespace pgl
