#include "k3glue/triple.hpp"

#include <cmath>

namespace k3glue {

namespace {

// Index pairs of the 2-form basis (e^01, e^02, e^03, e^23, e^31, e^12).
constexpr int kPair[6][2] = {{0, 1}, {0, 2}, {0, 3}, {2, 3}, {3, 1}, {1, 2}};

// slot[a][b] = 6-basis index of e^a^e^b, sign[a][b] = its sign (0 on diagonal).
struct PairTable {
    int slot[4][4];
    double sign[4][4];
    PairTable()
    {
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                slot[a][b] = -1;
                sign[a][b] = 0.0;
            }
        for (int i = 0; i < 6; ++i) {
            const int a = kPair[i][0], b = kPair[i][1];
            slot[a][b] = i;
            sign[a][b] = 1.0;
            slot[b][a] = i;
            sign[b][a] = -1.0;
        }
    }
};

const PairTable& pair_table()
{
    static const PairTable t;
    return t;
}

Matrix3 inverse_sqrt_spd(const Matrix3& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix3> es(m);
    Vector3 inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
    return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace

CoframeSample CoframeSample::gh_chart()
{
    CoframeSample f;
    f.components.setZero();
    f.components(0, 3) = -1.0;  // e^0 = -theta
    f.components(1, 0) = 1.0;
    f.components(2, 1) = 1.0;
    f.components(3, 2) = 1.0;
    return f;
}

CoframeSample CoframeSample::gh_scaled(double h, double eps)
{
    if (!(h > 0.0)) throw NotDefiniteError("gh_scaled: requires h > 0");
    CoframeSample f = gh_chart();
    f.components.row(0) *= eps / std::sqrt(h);
    for (int i = 1; i < 4; ++i) f.components.row(i) *= std::sqrt(h);
    return f;
}

double wedge2(const Vector6& u, const Vector6& v)
{
    return u[0] * v[3] + u[1] * v[4] + u[2] * v[5] + u[3] * v[0] + u[4] * v[1] + u[5] * v[2];
}

Vector4 contract(const Vector4& vec, const Vector6& form)
{
    Vector4 out = Vector4::Zero();
    for (int i = 0; i < 6; ++i) {
        const int a = kPair[i][0], b = kPair[i][1];
        out[b] += vec[a] * form[i];
        out[a] -= vec[b] * form[i];
    }
    return out;
}

Vector6 wedge11(const Vector4& a, const Vector4& b)
{
    Vector6 out;
    for (int i = 0; i < 6; ++i) {
        const int p = kPair[i][0], q = kPair[i][1];
        out[i] = a[p] * b[q] - a[q] * b[p];
    }
    return out;
}

Matrix6 two_form_basis_map(const Matrix4& m)
{
    // e^a = sum_c m(a,c) f^c; returns L with (f-components) = L (e-components).
    const PairTable& t = pair_table();
    Matrix6 L = Matrix6::Zero();
    for (int i = 0; i < 6; ++i) {
        const int a = kPair[i][0], b = kPair[i][1];
        for (int c = 0; c < 4; ++c)
            for (int d = 0; d < 4; ++d) {
                if (t.slot[c][d] < 0) continue;
                L(t.slot[c][d], i) += t.sign[c][d] * m(a, c) * m(b, d);
            }
    }
    return L;
}

Vector6 push_forward(const Vector6& form, const CoframeSample& from, const CoframeSample& to)
{
    const Matrix4 m = from.components * to.components.inverse();
    return two_form_basis_map(m) * form;
}

IntersectionData intersection_matrix(const TwoFormTriple& triple, bool require_definite)
{
    if (!(triple.mu0 > 0.0)) throw NotDefiniteError("intersection_matrix: mu0 must be > 0");
    IntersectionData out;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double q = 0.5 * wedge2(triple.form(i), triple.form(j)) / triple.mu0;
            out.Q(i, j) = q;
            out.Q(j, i) = q;
        }
    const double det = out.Q.determinant();
    Eigen::SelfAdjointEigenSolver<Matrix3> es(out.Q);
    out.definite = det > 0.0 && es.eigenvalues().minCoeff() > 0.0;
    if (!out.definite) {
        if (require_definite)
            throw NotDefiniteError("intersection_matrix: triple is not definite");
        return out;
    }
    const double cbrt_det = std::cbrt(det);
    out.mu = cbrt_det * triple.mu0;
    out.Q_normalized = out.Q / cbrt_det;
    return out;
}

TwoFormTriple standard_flat_triple(const CoframeSample& frame)
{
    TwoFormTriple t;
    t.frame = frame;
    t.mu0 = 1.0;
    t.coeff.setZero();
    for (int i = 0; i < 3; ++i) {
        t.coeff(i, i) = 1.0;
        t.coeff(i, 3 + i) = 1.0;
    }
    return t;
}

TwoFormTriple gh_triple_sample(double h, double eps)
{
    if (!(h > 0.0)) throw NotDefiniteError("gh_triple_sample: requires h > 0");
    TwoFormTriple t = standard_flat_triple(CoframeSample::gh_scaled(h, eps));
    return t;
}

TwoFormTriple gh_triple_sample(double h, double eps, const CoframeSample& chart_frame)
{
    // Scale the given frame's rows the same way gh_scaled scales the
    // canonical chart, then express the standard triple in the given frame.
    if (!(h > 0.0)) throw NotDefiniteError("gh_triple_sample: requires h > 0");
    CoframeSample scaled = chart_frame;
    scaled.components.row(0) *= eps / std::sqrt(h);
    for (int i = 1; i < 4; ++i) scaled.components.row(i) *= std::sqrt(h);

    TwoFormTriple t;
    t.frame = chart_frame;
    for (int i = 0; i < 3; ++i) {
        Vector6 unit = Vector6::Zero();
        unit[i] = 1.0;
        unit[3 + i] = 1.0;
        t.coeff.row(i) = push_forward(unit, scaled, chart_frame).transpose();
    }
    t.mu0 = eps * h;  // scaled-frame volume in chart_frame units
    return t;
}

Matrix4 recover_metric(const TwoFormTriple& triple)
{
    const IntersectionData data = intersection_matrix(triple);

    // Normalize to an exact SU(2)-structure for the associated volume mu.
    const Matrix3 B = inverse_sqrt_spd(data.Q_normalized);
    Coefficients36 w = B * triple.coeff;
    const double mu = data.mu;

    // Urbantke: g(u,v) mu = (1/6) eps_ijk (i_u w_i) ^ (i_v w_j) ^ w_k.
    constexpr int perm[6][4] = {{0, 1, 2, 1},  {1, 2, 0, 1},  {2, 0, 1, 1},
                                {0, 2, 1, -1}, {2, 1, 0, -1}, {1, 0, 2, -1}};
    Matrix4 g_frame;
    for (int u = 0; u < 4; ++u)
        for (int v = u; v < 4; ++v) {
            Vector4 eu = Vector4::Zero(), ev = Vector4::Zero();
            eu[u] = 1.0;
            ev[v] = 1.0;
            double acc = 0.0;
            for (const auto& p : perm) {
                const Vector4 a = contract(eu, w.row(p[0]).transpose());
                const Vector4 b = contract(ev, w.row(p[1]).transpose());
                acc += p[3] * wedge2(wedge11(a, b), w.row(p[2]).transpose());
            }
            g_frame(u, v) = acc / (6.0 * mu);
            g_frame(v, u) = g_frame(u, v);
        }

    // Volume normalization: det(g_frame) must equal mu^2. Exact for exact
    // SU(2)-structures; the rescale absorbs roundoff.
    const double det = g_frame.determinant();
    if (!(det > 0.0)) throw NotDefiniteError("recover_metric: degenerate Urbantke form");
    g_frame *= std::pow(mu * mu / det, 0.25);

    const Matrix4& c = triple.frame.components;
    return c.transpose() * g_frame * c;
}

Matrix6 hodge_star(const Matrix4& metric_chart, const CoframeSample& frame, int orientation)
{
    // Pull the metric back to frame-dual components, diagonalize, and form
    // the star through a g-orthonormal coframe where it is exactly the wedge
    // pairing P. Both basis maps are built from explicit factors (no linear
    // solves), which keeps star*star = id tight even for stiff metrics.
    const Matrix4 cinv = frame.components.inverse();
    const Matrix4 g = cinv.transpose() * metric_chart * cinv;

    Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (g + g.transpose()));
    if (!(es.eigenvalues().minCoeff() > 0.0))
        throw NotDefiniteError("hodge_star: metric not positive definite");
    Matrix4 U = es.eigenvectors();
    if (U.determinant() < 0.0) U.col(3) *= -1.0;  // keep the frame change oriented
    const Vector4 sqrt_lam = es.eigenvalues().cwiseSqrt();

    // Orthonormal coframe rows f = diag(sqrt(lam)) U^T e (covectors scale up
    // with sqrt of the metric eigenvalues), so e = U diag(1/sqrt(lam)) f.
    const Matrix4 e_in_f = U * sqrt_lam.cwiseInverse().asDiagonal();
    const Matrix4 f_in_e = sqrt_lam.asDiagonal() * U.transpose();
    const Matrix6 L_ef = two_form_basis_map(e_in_f);
    const Matrix6 L_fe = two_form_basis_map(f_in_e);

    Matrix6 P = Matrix6::Zero();
    for (int i = 0; i < 3; ++i) {
        P(i, 3 + i) = 1.0;
        P(3 + i, i) = 1.0;
    }
    return (orientation >= 0 ? 1.0 : -1.0) * (L_fe * P * L_ef);
}

SelfdualSplit selfdual_split(const Coefficients36& eta, const TwoFormTriple& su2_triple,
                             double q_tol)
{
    const IntersectionData data = intersection_matrix(su2_triple);
    if ((data.Q_normalized - Matrix3::Identity()).norm() > q_tol)
        throw NotDefiniteError("selfdual_split: reference triple is not an SU(2)-structure");

    SelfdualSplit out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.A(i, j) = 0.5 * wedge2(eta.row(i).transpose(), su2_triple.form(j)) / data.mu;
    out.eta_minus = eta - out.A * su2_triple.coeff;

    const Matrix4 g = recover_metric(su2_triple);
    const Matrix6 star = hodge_star(g, su2_triple.frame, su2_triple.frame.orientation());
    double residual = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Vector6 em = out.eta_minus.row(i).transpose();
        residual = std::max(residual, (star * em + em).norm());
        // Reconstruction is exact by construction; assert anyway.
        const Vector6 rec = (out.A * su2_triple.coeff).row(i).transpose() + em;
        residual = std::max(residual, (rec - eta.row(i).transpose()).norm());
    }
    out.residual = residual;
    return out;
}

SelfdualSplit selfdual_split(const Vector6& eta, const TwoFormTriple& su2_triple, double q_tol)
{
    Coefficients36 rows = Coefficients36::Zero();
    rows.row(0) = eta.transpose();
    SelfdualSplit full = selfdual_split(rows, su2_triple, q_tol);
    return full;
}

Matrix3 eta_star_eta(const Coefficients36& eta_minus, const TwoFormTriple& su2_triple)
{
    const IntersectionData data = intersection_matrix(su2_triple);
    Matrix3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double v =
                0.5 * wedge2(eta_minus.row(i).transpose(), eta_minus.row(j).transpose()) /
                data.mu;
            out(i, j) = v;
            out(j, i) = v;
        }
    return out;
}

} // namespace k3glue
