#include "k3glue/flat_torus.hpp"

#include <cmath>
#include <limits>

namespace k3glue {

FlatTorus::FlatTorus(const Matrix3& basis) : basis_(basis)
{
    volume_ = basis.determinant();
    if (!(volume_ > 0.0))
        throw GeometryError("FlatTorus: basis must have positive determinant");
    dual_ = basis.inverse().transpose();

    // Shortest nonzero lattice vector over a generous shell of coefficients.
    double min_sq = std::numeric_limits<double>::max();
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
            for (int k = -2; k <= 2; ++k) {
                if (i == 0 && j == 0 && k == 0) continue;
                const Vector3 v = basis_ * Vector3(i, j, k);
                min_sq = std::min(min_sq, v.squaredNorm());
            }
    inj_radius_ = 0.5 * std::sqrt(min_sq);
}

Vector3 FlatTorus::wrap_fractional(const Vector3& frac)
{
    Vector3 w;
    for (int i = 0; i < 3; ++i) {
        w[i] = frac[i] - std::floor(frac[i]);
        if (w[i] >= 1.0) w[i] = 0.0;  // guards frac[i] = -1e-17
    }
    return w;
}

Vector3 FlatTorus::min_image(const Vector3& frac_a, const Vector3& frac_b) const
{
    const Vector3 d0 = frac_a - frac_b;
    Vector3 best = Vector3::Zero();
    double best_sq = std::numeric_limits<double>::max();
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int k = -1; k <= 1; ++k) {
                Vector3 d = d0;
                d[0] -= std::round(d0[0]) - i;
                d[1] -= std::round(d0[1]) - j;
                d[2] -= std::round(d0[2]) - k;
                const Vector3 v = basis_ * d;
                const double sq = v.squaredNorm();
                if (sq < best_sq) {
                    best_sq = sq;
                    best = v;
                }
            }
    return best;
}

double FlatTorus::distance(const Vector3& frac_a, const Vector3& frac_b) const
{
    return min_image(frac_a, frac_b).norm();
}

} // namespace k3glue
