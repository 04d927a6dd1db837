#include "k3glue/gh_geometry.hpp"

#include <cmath>

#include "k3glue/errors.hpp"
#include "k3glue/quadrature.hpp"

namespace k3glue {

GhPotentialSample HarmonicFieldPotential::sample(const Vector3& x) const
{
    const Vector3 frac = field_->torus().to_fractional(x);
    GhPotentialSample out;
    if (field_->trivial()) return out;  // h_eps == 1
    const FieldEval ev = field_->eval(frac, 2);
    out.h = 1.0 + eps_ * ev.h;
    out.grad = eps_ * ev.grad;
    out.hess = eps_ * ev.hess;
    return out;
}

GhPotentialSample PolePotential::sample(const Vector3& x) const
{
    GhPotentialSample out;
    out.h = lambda_ + ell_.dot(x);
    out.grad = ell_;
    for (const auto& [p, k] : poles_) {
        const Vector3 d = x - p;
        const double r = d.norm();
        if (r < 1e-14) throw SingularityError("PolePotential: evaluation at a pole");
        out.h += 0.5 * k / r;
        out.grad += -0.5 * k * d / (r * r * r);
        out.hess += 0.5 * k *
                    (3.0 * d * d.transpose() / (r * r) - Matrix3::Identity()) / (r * r * r);
    }
    return out;
}

GhConnection levi_civita_gh(const GhPotential& pot, const Vector3& x)
{
    const GhPotentialSample s = pot.sample(x);
    if (!(s.h > 0.0)) throw NotDefiniteError("levi_civita_gh: h must be positive");
    const double eps = pot.fiber_scale();
    const double h = s.h;

    GhConnection c;
    c.h = h;
    c.grad_h = s.grad;
    // dtheta(xi_i, xi_j) = eps_{ijk} d_k h / eps
    for (int i = 0; i < 3; ++i) {
        const int j = cyc1(i), k = cyc2(i);
        c.dtheta(i, j) = s.grad[k] / eps;
        c.dtheta(j, i) = -s.grad[k] / eps;
    }

    const double e2 = eps * eps;
    c.nabla_xi_xi = 0.5 * e2 * s.grad / (h * h * h);
    for (int i = 0; i < 3; ++i) {
        c.nabla_xii_xi_horizontal.row(i) = 0.5 * e2 / (h * h) * c.dtheta.row(i);
        c.nabla_xii_xi_vertical[i] = -0.5 * s.grad[i] / h;
        c.nabla_xi_theta_i_vertical[i] = -0.5 * e2 * s.grad[i] / (h * h * h);
        c.nabla_xi_theta_i_horizontal.row(i) = 0.5 * e2 / (h * h) * c.dtheta.row(i);
    }
    c.nabla_xi_theta = 0.5 * s.grad / h;
    return c;
}

Vector3 poincare_gauge_potential(const GhPotential& pot, const Vector3& center,
                                 const Vector3& x, int quadrature_order)
{
    const Vector3 d = x - center;
    if (d.norm() == 0.0) return Vector3::Zero();
    const double eps = pot.fiber_scale();
    Vector3 acc = Vector3::Zero();
    for (const auto& nd : gauss_legendre(quadrature_order, 0.0, 1.0)) {
        const Vector3 b = pot.sample(center + nd.x * d).grad / eps;
        acc += nd.w * nd.x * b.cross(d);
    }
    return acc;
}

Matrix4 gh_metric_chart(const GhPotential& pot, const Vector3& center, const Vector3& x)
{
    const GhPotentialSample s = pot.sample(x);
    if (!(s.h > 0.0)) throw NotDefiniteError("gh_metric_chart: h must be positive");
    const double eps = pot.fiber_scale();
    const Vector3 a = poincare_gauge_potential(pot, center, x);

    // g = h dx.dx + eps^2 h^{-1} (dt + A.dx)^2
    Matrix4 g = Matrix4::Zero();
    const double f = eps * eps / s.h;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) g(i, j) = f * a[i] * a[j];
        g(i, i) += s.h;
        g(i, 3) = g(3, i) = f * a[i];
    }
    g(3, 3) = f;
    return g;
}

std::array<Matrix4, 4> fd_christoffels(const GhPotential& pot, const Vector3& center,
                                       const Vector3& x, double step)
{
    // dg[c] = d g / d x_c by central differences (t-derivatives vanish).
    const Matrix4 g0 = gh_metric_chart(pot, center, x);
    std::array<Matrix4, 4> dg;
    dg[3] = Matrix4::Zero();
    for (int cdir = 0; cdir < 3; ++cdir) {
        Vector3 dx = Vector3::Zero();
        dx[cdir] = step;
        dg[cdir] =
            (gh_metric_chart(pot, center, x + dx) - gh_metric_chart(pot, center, x - dx)) /
            (2.0 * step);
    }
    const Matrix4 ginv = g0.inverse();
    std::array<Matrix4, 4> gamma;
    for (int a = 0; a < 4; ++a) {
        gamma[a].setZero();
        for (int b = 0; b < 4; ++b)
            for (int cc = 0; cc < 4; ++cc) {
                double acc = 0.0;
                for (int d = 0; d < 4; ++d)
                    acc += ginv(a, d) * (dg[b](d, cc) + dg[cc](b, d) - dg[d](b, cc));
                gamma[a](b, cc) = 0.5 * acc;
            }
    }
    return gamma;
}

CurvatureDiagnostics fd_curvature(const GhPotential& pot, const Vector3& x, double step)
{
    CurvatureDiagnostics out;
    out.step = step;

    const auto gamma0 = fd_christoffels(pot, x, x, step);
    std::array<std::array<Matrix4, 4>, 3> gp, gm;
    for (int cdir = 0; cdir < 3; ++cdir) {
        Vector3 dx = Vector3::Zero();
        dx[cdir] = step;
        gp[cdir] = fd_christoffels(pot, x, x + dx, step);
        gm[cdir] = fd_christoffels(pot, x, x - dx, step);
    }

    // R^a_{b c d} = d_c Gamma^a_{d b} - d_d Gamma^a_{c b} + Gamma Gamma terms.
    double riem[4][4][4][4];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int cc = 0; cc < 4; ++cc)
                for (int d = 0; d < 4; ++d) {
                    double v = 0.0;
                    if (cc < 3) v += (gp[cc][a](d, b) - gm[cc][a](d, b)) / (2.0 * step);
                    if (d < 3) v -= (gp[d][a](cc, b) - gm[d][a](cc, b)) / (2.0 * step);
                    for (int e = 0; e < 4; ++e)
                        v += gamma0[a](cc, e) * gamma0[e](d, b) -
                             gamma0[a](d, e) * gamma0[e](cc, b);
                    riem[a][b][cc][d] = v;
                }

    const Matrix4 g = gh_metric_chart(pot, x, x);
    const Matrix4 ginv = g.inverse();

    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d) {
            double v = 0.0;
            for (int a = 0; a < 4; ++a) v += riem[a][b][a][d];
            out.ricci(b, d) = v;
        }
    // |Ric|^2 = Ric_{bd} Ric_{b'd'} g^{bb'} g^{dd'}
    double ric2 = 0.0;
    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d)
            for (int bp = 0; bp < 4; ++bp)
                for (int dp = 0; dp < 4; ++dp)
                    ric2 += out.ricci(b, d) * out.ricci(bp, dp) * ginv(b, bp) * ginv(d, dp);
    out.ric_norm = std::sqrt(std::abs(ric2));

    // |Rm|^2 with the first index lowered.
    double low[4][4][4][4];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int cc = 0; cc < 4; ++cc)
                for (int d = 0; d < 4; ++d) {
                    double v = 0.0;
                    for (int e = 0; e < 4; ++e) v += g(a, e) * riem[e][b][cc][d];
                    low[a][b][cc][d] = v;
                }
    double rm2 = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int cc = 0; cc < 4; ++cc)
                for (int d = 0; d < 4; ++d) {
                    double up = 0.0;
                    for (int ap = 0; ap < 4; ++ap)
                        for (int bp = 0; bp < 4; ++bp)
                            for (int cp = 0; cp < 4; ++cp)
                                for (int dp = 0; dp < 4; ++dp)
                                    up += ginv(a, ap) * ginv(b, bp) * ginv(cc, cp) *
                                          ginv(d, dp) * low[ap][bp][cp][dp];
                    rm2 += low[a][b][cc][d] * up;
                }
    out.rm_norm = std::sqrt(std::abs(rm2));
    return out;
}

VerticalDerivatives vertical_derivatives_closed_form(const GhPotential& pot, const Vector3& x)
{
    const GhConnection c = levi_civita_gh(pot, x);
    VerticalDerivatives out;
    // At the gauge center A = 0, so theta = dt and theta_i = dx_i.
    out.nabla_xi_theta.head<3>() = c.nabla_xi_theta;
    for (int i = 0; i < 3; ++i) {
        out.nabla_xi_theta_i.row(i).head<3>() = c.nabla_xi_theta_i_horizontal.row(i);
        out.nabla_xi_theta_i(i, 3) = c.nabla_xi_theta_i_vertical[i];
    }
    return out;
}

VerticalDerivatives vertical_derivatives_fd(const GhPotential& pot, const Vector3& x,
                                            double step)
{
    const auto gamma = fd_christoffels(pot, x, x, step);
    VerticalDerivatives out;
    // (nabla_xi w)_mu = -Gamma^lambda_{t mu} w_lambda for a coordinate-constant
    // 1-form w; at the gauge center theta = dt, theta_i = dx_i.
    for (int mu = 0; mu < 4; ++mu) {
        out.nabla_xi_theta[mu] = -gamma[3](3, mu);
        for (int i = 0; i < 3; ++i) out.nabla_xi_theta_i(i, mu) = -gamma[i](3, mu);
    }
    return out;
}

} // namespace k3glue
