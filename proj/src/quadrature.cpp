#include "k3glue/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace k3glue {

std::vector<QuadratureNode1D> gauss_legendre(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    std::vector<QuadratureNode1D> nodes(n);
    // Newton iteration from the Chebyshev estimate; standard symmetric layout.
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        nodes[i] = {-x, w};
        nodes[n - 1 - i] = {x, w};
    }
    return nodes;
}

std::vector<QuadratureNode1D> gauss_legendre(int n, double a, double b)
{
    auto nodes = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (auto& nd : nodes) {
        nd.x = mid + half * nd.x;
        nd.w *= half;
    }
    return nodes;
}

std::vector<SphereNode> sphere_rule(int n_theta)
{
    const auto polar = gauss_legendre(n_theta);  // nodes in cos(theta)
    const int n_phi = 2 * n_theta;
    std::vector<SphereNode> nodes;
    nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    for (const auto& p : polar) {
        const double ct = p.x;
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int k = 0; k < n_phi; ++k) {
            const double phi = 2.0 * kPi * (k + 0.5) / n_phi;
            SphereNode nd;
            nd.dir = Vector3(st * std::cos(phi), st * std::sin(phi), ct);
            nd.w = p.w * (2.0 * kPi / n_phi);
            nodes.push_back(nd);
        }
    }
    return nodes;
}

const std::vector<Vector3>& eight_ray_design()
{
    static const std::vector<Vector3> rays = [] {
        std::vector<Vector3> r = {
            Vector3(0.813, 0.342, 0.471),   Vector3(-0.254, 0.891, 0.376),
            Vector3(0.437, -0.762, 0.478),  Vector3(-0.683, -0.421, 0.596),
            Vector3(0.921, -0.183, -0.344), Vector3(-0.356, 0.274, -0.894),
            Vector3(0.152, 0.661, -0.735),  Vector3(-0.567, -0.796, -0.212),
        };
        for (auto& v : r) v.normalize();
        return r;
    }();
    return rays;
}

} // namespace k3glue
