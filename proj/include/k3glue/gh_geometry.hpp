#pragma once

/// Geometry of Gibbons-Hawking metrics  g = h g_3 + eps^2 h^{-1} theta^2
/// with monopole relation d(eps theta) = *dh on a flat 3-dimensional chart:
/// closed-form Levi-Civita data in the invariant frame, local metric samples
/// in a radial (Poincare) gauge, and finite-difference curvature diagnostics.
///
/// Chart coordinate order everywhere: (x1, x2, x3, t) with theta = dt + A.dx.

#include <array>
#include <memory>

#include "k3glue/harmonic_field.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

struct GhPotentialSample {
    double h = 1.0;
    Vector3 grad = Vector3::Zero();
    Matrix3 hess = Matrix3::Zero();
};

/// The harmonic potential entering the metric, in ambient coordinates.
class GhPotential {
public:
    virtual ~GhPotential() = default;
    virtual GhPotentialSample sample(const Vector3& x) const = 0;
    virtual double fiber_scale() const = 0;  // eps
};

/// h_eps = 1 + eps*h of a periodic monopole field (positions ambient). The
/// optional override rescales a unit-epsilon field without rebuilding its
/// Ewald tables (h itself does not depend on epsilon).
class HarmonicFieldPotential final : public GhPotential {
public:
    explicit HarmonicFieldPotential(const HarmonicField& field)
        : field_(&field), eps_(field.epsilon())
    {
    }
    HarmonicFieldPotential(const HarmonicField& field, double eps_override)
        : field_(&field), eps_(eps_override)
    {
    }
    GhPotentialSample sample(const Vector3& x) const override;
    double fiber_scale() const override { return eps_; }

private:
    const HarmonicField* field_;
    double eps_;
};

/// Closed-form GH potential h = lambda + sum_m k_m/(2|x - p_m|) + ell.x.
class PolePotential final : public GhPotential {
public:
    PolePotential(double lambda, std::vector<std::pair<Vector3, double>> poles,
                  const Vector3& ell = Vector3::Zero(), double eps = 1.0)
        : lambda_(lambda), poles_(std::move(poles)), ell_(ell), eps_(eps)
    {
    }
    GhPotentialSample sample(const Vector3& x) const override;
    double fiber_scale() const override { return eps_; }

private:
    double lambda_;
    std::vector<std::pair<Vector3, double>> poles_;
    Vector3 ell_;
    double eps_;
};

/// Connection coefficients of the GH metric in the frame (xi, xi_1, xi_2,
/// xi_3): the Koszul-formula display, evaluated pointwise.
struct GhConnection {
    double h = 1.0;
    Vector3 grad_h = Vector3::Zero();
    Matrix3 dtheta = Matrix3::Zero();  // dtheta(xi_i, xi_j) = eps_{ijk} d_k h / eps

    Vector3 nabla_xi_xi;                 // horizontal, = (eps^2/2) h^{-3} grad h
    Matrix3 nabla_xii_xi_horizontal;     // row i: (eps^2/2) h^{-2} (xi_i . dtheta)^sharp
    Vector3 nabla_xii_xi_vertical;       // entry i: -(1/2) h^{-1} d_i h
    Vector3 nabla_xi_theta;              // (1/2) h^{-1} dh, dx-components
    Vector3 nabla_xi_theta_i_vertical;   // entry i: -(eps^2/2) h^{-3} d_i h (theta-coefficient)
    Matrix3 nabla_xi_theta_i_horizontal; // row i: (eps^2/2) h^{-2} dtheta(xi_i, .)
};

GhConnection levi_civita_gh(const GhPotential& pot, const Vector3& x);

/// Local gauge potential A with curl A = grad h / eps, radial (Poincare)
/// gauge about `center`: A vanishes at the center and is transverse to rays.
Vector3 poincare_gauge_potential(const GhPotential& pot, const Vector3& center,
                                 const Vector3& x, int quadrature_order = 12);

/// Metric components in the chart (x1, x2, x3, t), gauge centered at `center`.
Matrix4 gh_metric_chart(const GhPotential& pot, const Vector3& center, const Vector3& x);

/// Christoffel symbols Gamma^a_{bc} by second-order central differences of
/// gh_metric_chart (gauge centered at `center`). Gamma[a](b,c).
std::array<Matrix4, 4> fd_christoffels(const GhPotential& pot, const Vector3& center,
                                       const Vector3& x, double step);

struct CurvatureDiagnostics {
    Matrix4 ricci = Matrix4::Zero();
    double ric_norm = 0.0;  // Frobenius norm of Ric with indices raised once
    double rm_norm = 0.0;   // |Rm| = sqrt(R_abcd R^abcd)
    double step = 0.0;
};

/// Finite-difference Riemann tensor diagnostics at x (gauge centered at x).
CurvatureDiagnostics fd_curvature(const GhPotential& pot, const Vector3& x, double step);

/// Chart components (dx1, dx2, dx3, dt) of nabla_xi theta and nabla_xi theta_i
/// at x in the gauge centered at x (so A(x) = 0 and theta|_x = dt).
struct VerticalDerivatives {
    Vector4 nabla_xi_theta = Vector4::Zero();
    Eigen::Matrix<double, 3, 4> nabla_xi_theta_i = Eigen::Matrix<double, 3, 4>::Zero();
};

VerticalDerivatives vertical_derivatives_closed_form(const GhPotential& pot, const Vector3& x);
VerticalDerivatives vertical_derivatives_fd(const GhPotential& pot, const Vector3& x,
                                            double step);

} // namespace k3glue
