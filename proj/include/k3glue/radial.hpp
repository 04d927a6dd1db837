#pragma once

/// Radial-gauge 1-form potentials of closed 2-forms on (annuli in) R^3.
///
/// A 2-form eta on R^3 is identified with its dual vector field V via
/// eta = V_1 dx2^dx3 + V_2 dx3^dx1 + V_3 dx1^dx2; closedness is div V = 0.
/// With rays from `center`, the radial gauge (no d rho component) potential is
///     a(rho s) = -(1/rho) int_rho^inf  r (V(r s) x s) dr      (from infinity)
///     a(rho s) = +(1/rho) int_0^rho    r (V(r s) x s) dr      (from the origin)
/// for a unit direction s; d a = eta whenever eta is closed and the boundary
/// flux vanishes (decay at infinity, or eta -> 0 at the center).

#include <functional>

#include "k3glue/errors.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

using VectorField3 = std::function<Vector3(const Vector3&)>;

enum class RadialMode { FromInfinity, FromOrigin };

struct RadialPotentialParams {
    RadialMode mode = RadialMode::FromInfinity;
    double rho_far = 0.0;      // outer quadrature limit (FromInfinity); required
    double decay_order = 3.0;  // |V| ~ rho^{-p} beyond rho_far; feeds the tail model
    int panels = 12;           // log-spaced composite Gauss-Legendre panels
    int nodes = 8;
    bool check_decay = true;   // FromInfinity: verify fitted slope <= -(2+margin)
};

class RadialGaugePotential {
public:
    RadialGaugePotential(VectorField3 dual_field, const Vector3& center,
                         const RadialPotentialParams& params);

    /// Ambient components of the 1-form at center + rho*dir (|dir| = 1);
    /// transverse to dir by construction.
    Vector3 evaluate(double rho, const Vector3& dir) const;

    /// Fitted log-log slope of |V| along a ray over [rho_lo, rho_hi].
    double decay_slope(const Vector3& dir, double rho_lo, double rho_hi, int n = 8) const;

    const RadialPotentialParams& params() const { return params_; }

private:
    VectorField3 field_;
    Vector3 center_;
    RadialPotentialParams params_;

    Vector3 integrate(double lo, double hi, const Vector3& dir) const;
};

} // namespace k3glue
