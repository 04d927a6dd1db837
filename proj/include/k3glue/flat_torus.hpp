#pragma once

/// Flat 3-torus R^3 / Lambda. Positions are handled in fractional coordinates
/// (coefficients with respect to the lattice basis); ambient vectors carry the
/// metric. The standard involution is x -> -x in either coordinate system.

#include "k3glue/errors.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

class FlatTorus {
public:
    /// basis columns are the lattice generators; det(basis) must be > 0.
    explicit FlatTorus(const Matrix3& basis);

    const Matrix3& basis() const { return basis_; }
    const Matrix3& dual_basis() const { return dual_; }  // dual^T * basis = id
    double volume() const { return volume_; }
    double inj_radius() const { return inj_radius_; }  // half shortest nonzero lattice vector

    Vector3 to_ambient(const Vector3& frac) const { return basis_ * frac; }
    Vector3 to_fractional(const Vector3& ambient) const { return dual_.transpose() * ambient; }

    /// Reduce fractional coordinates to [0, 1)^3.
    static Vector3 wrap_fractional(const Vector3& frac);

    /// Shortest ambient representative of the fractional displacement between
    /// two points (minimal image).
    Vector3 min_image(const Vector3& frac_a, const Vector3& frac_b) const;

    /// Torus distance between fractional points.
    double distance(const Vector3& frac_a, const Vector3& frac_b) const;

private:
    Matrix3 basis_;
    Matrix3 dual_;
    double volume_ = 0.0;
    double inj_radius_ = 0.0;
};

} // namespace k3glue
