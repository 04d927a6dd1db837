#pragma once

/// Gauss-Legendre rules and product quadrature on the unit sphere.

#include <vector>

#include "k3glue/types.hpp"

namespace k3glue {

struct QuadratureNode1D {
    double x;
    double w;
};

/// Gauss-Legendre nodes and weights on [-1, 1], exact for degree <= 2n-1.
std::vector<QuadratureNode1D> gauss_legendre(int n);

/// Gauss-Legendre nodes mapped to [a, b].
std::vector<QuadratureNode1D> gauss_legendre(int n, double a, double b);

struct SphereNode {
    Vector3 dir;  // unit vector
    double w;     // weight; weights sum to 4*pi
};

/// Product rule: Gauss-Legendre in cos(theta) x uniform in phi.
/// n_theta polar nodes, 2*n_theta azimuthal nodes.
std::vector<SphereNode> sphere_rule(int n_theta);

/// Eight fixed, antipodally unbalanced unit directions spread over the sphere,
/// chosen away from coordinate axes and diagonals so that symmetric multipoles
/// do not vanish along them. Frozen constants: reused for decay fits.
const std::vector<Vector3>& eight_ray_design();

} // namespace k3glue
