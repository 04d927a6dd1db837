#pragma once

/// Pointwise algebra of triples of 2-forms on an oriented 4-dimensional
/// frame. Conventions, fixed once and shared with the on-disk CSV schema:
///
///  * A CoframeSample stores the four covectors e^0..e^3 as rows of a 4x4
///    matrix of components in the ambient chart basis. The canonical chart
///    for Gibbons-Hawking work is ordered (dx1, dx2, dx3, theta); the
///    canonical chart coframe is e^0 = -theta, e^i = dx_i, whose 2-form
///    basis below is then (dx1^theta, dx2^theta, dx3^theta, dx23, dx31, dx12)
///    and whose volume e^0123 equals dx1^dx2^dx3^theta.
///
///  * 2-forms carry six components in the basis
///        (e^01, e^02, e^03, e^23, e^31, e^12),
///    and triples are 3x6 matrices with one 2-form per row.
///
///  * The wedge pairing of u, v in this basis is
///        u ^ v = (u1 v4 + u2 v5 + u3 v6 + u4 v1 + u5 v2 + u6 v3) e^0123.

#include "k3glue/errors.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

struct CoframeSample {
    Matrix4 components = Matrix4::Identity();  // rows = e^a in chart basis

    double det() const { return components.determinant(); }
    int orientation() const { return det() > 0 ? 1 : -1; }

    /// Canonical Gibbons-Hawking chart coframe (-theta, dx1, dx2, dx3).
    static CoframeSample gh_chart();

    /// Scaled GH coframe for fiber scale eps and harmonic value h > 0:
    /// e^0 = -eps h^{-1/2} theta, e^i = h^{1/2} dx_i.
    static CoframeSample gh_scaled(double h, double eps);
};

/// Wedge product coefficient of two 2-forms relative to e^0123.
double wedge2(const Vector6& u, const Vector6& v);

/// Interior product of a vector (components in the frame dual to e^a) with a
/// 2-form; returns a 1-form in the e^a basis.
Vector4 contract(const Vector4& vec, const Vector6& form);

/// 1-form wedge 1-form -> 2-form in the six-component basis.
Vector6 wedge11(const Vector4& a, const Vector4& b);

/// Induced map on 2-form components under a change of coframe. If new
/// coframe rows are f = M * e (components of f^a in the e-basis), the matrix
/// maps e-components of a 2-form to... see implementation: it returns L with
/// (form in f-basis) = L * (form in e-basis) for f = M^{-T}-dual change; in
/// practice use push_forward below.
Matrix6 two_form_basis_map(const Matrix4& m);

/// Express a 2-form given in the basis of coframe `from` in the basis of
/// coframe `to` (both over the same chart).
Vector6 push_forward(const Vector6& form, const CoframeSample& from, const CoframeSample& to);

struct TwoFormTriple {
    Coefficients36 coeff = Coefficients36::Zero();  // rows = omega_i
    double mu0 = 1.0;                               // reference volume, units of e^0123
    CoframeSample frame;

    Vector6 form(int i) const { return coeff.row(i).transpose(); }
};

struct IntersectionData {
    Matrix3 Q = Matrix3::Zero();             // (1/2 w_i ^ w_j) / mu0
    Matrix3 Q_normalized = Matrix3::Zero();  // det(Q)^{-1/3} Q
    double mu = 0.0;                         // associated volume (det Q)^{1/3} mu0
    bool definite = false;
};

/// Eq-style intersection matrix and associated volume. Throws
/// NotDefiniteError when det Q <= 0 (with require_definite).
IntersectionData intersection_matrix(const TwoFormTriple& triple, bool require_definite = true);

/// The standard flat triple (e^01+e^23, e^02+e^31, e^03+e^12) on a coframe.
TwoFormTriple standard_flat_triple(const CoframeSample& frame);

/// Gibbons-Hawking triple sample for harmonic value h > 0 and fiber scale
/// eps, on the canonical chart: w_i = eps dx_i^theta + h dx_j^dx_k,
/// expressed in the scaled coframe where its intersection matrix is the
/// identity. mu0 is the scaled-frame volume, equal to eps*h chart units.
TwoFormTriple gh_triple_sample(double h, double eps);

/// Same sample pushed to an arbitrary chart coframe (the triple transforms as
/// 2-form components; Q is invariant).
TwoFormTriple gh_triple_sample(double h, double eps, const CoframeSample& chart_frame);

/// Recover the Riemannian metric of a definite triple: the unique metric with
/// span(w) self-dual and volume form mu. Returns the metric in the CHART
/// basis dual to triple.frame's chart (for the canonical GH chart, index
/// order (dx1, dx2, dx3, theta)).
Matrix4 recover_metric(const TwoFormTriple& triple);

/// Hodge star on 2-form components (same six-component basis, components
/// relative to an orthonormal-or-not chart coframe) for metric g given in
/// chart-dual components and the chart orientation sign (+1 when e^0123 of
/// the coframe is positively oriented). Satisfies star*star = id.
Matrix6 hodge_star(const Matrix4& metric_chart, const CoframeSample& frame, int orientation = 1);

struct SelfdualSplit {
    Eigen::Matrix3d A;        // eta_i^+ = sum_j A_ij w_j
    Coefficients36 eta_minus; // anti-self-dual remainders
    double residual = 0.0;    // reconstruction error
};

/// Decompose a triple of 2-forms against an SU(2)-structure triple (Q = id
/// within tol) and its metric.
SelfdualSplit selfdual_split(const Coefficients36& eta, const TwoFormTriple& su2_triple,
                             double q_tol = 1e-6);

/// Single 2-form version.
SelfdualSplit selfdual_split(const Vector6& eta, const TwoFormTriple& su2_triple,
                             double q_tol = 1e-6);

/// The symmetric matrix (1/2 eta_i^- ^ eta_j^-)/mu_w; negative semidefinite
/// on anti-self-dual inputs.
Matrix3 eta_star_eta(const Coefficients36& eta_minus, const TwoFormTriple& su2_triple);

} // namespace k3glue
