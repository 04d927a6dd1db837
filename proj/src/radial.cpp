#include "k3glue/radial.hpp"

#include <cmath>
#include <limits>

#include "k3glue/fit.hpp"
#include "k3glue/quadrature.hpp"

namespace k3glue {

RadialGaugePotential::RadialGaugePotential(VectorField3 dual_field, const Vector3& center,
                                           const RadialPotentialParams& params)
    : field_(std::move(dual_field)), center_(center), params_(params)
{
    if (params_.mode == RadialMode::FromInfinity) {
        if (!(params_.rho_far > 0.0))
            throw GeometryError("RadialGaugePotential: rho_far required for FromInfinity");
        if (params_.decay_order > 0.0 && !(params_.decay_order > 2.0))
            throw AccuracyError("RadialGaugePotential: tail needs decay order > 2");
    }
}

Vector3 RadialGaugePotential::integrate(double lo, double hi, const Vector3& dir) const
{
    // Log-spaced composite panels handle the power-law integrands.
    Vector3 acc = Vector3::Zero();
    if (!(hi > lo)) return acc;
    const double safe_lo = std::max(lo, 1e-12 * hi);
    const bool log_spaced = safe_lo > 0.0 && hi / safe_lo > 4.0;
    for (int p = 0; p < params_.panels; ++p) {
        double a, b;
        if (log_spaced) {
            const double la = std::log(safe_lo), lb = std::log(hi);
            a = std::exp(la + (lb - la) * p / params_.panels);
            b = std::exp(la + (lb - la) * (p + 1) / params_.panels);
            if (p == 0) a = lo;
        } else {
            a = lo + (hi - lo) * p / params_.panels;
            b = lo + (hi - lo) * (p + 1) / params_.panels;
        }
        for (const auto& nd : gauss_legendre(params_.nodes, a, b)) {
            const Vector3 v = field_(center_ + nd.x * dir);
            acc += nd.w * nd.x * v.cross(dir);
        }
    }
    return acc;
}

Vector3 RadialGaugePotential::evaluate(double rho, const Vector3& dir) const
{
    if (!(rho > 0.0)) throw GeometryError("RadialGaugePotential: rho must be positive");
    if (params_.mode == RadialMode::FromOrigin) {
        return integrate(0.0, rho, dir) / rho;
    }
    double p = params_.decay_order;
    if (p <= 0.0 || params_.check_decay) {
        const double slope = decay_slope(dir, 0.25 * params_.rho_far, params_.rho_far);
        if (params_.check_decay && slope > -2.0)
            throw AccuracyError("RadialGaugePotential: field decays too slowly for a bounded "
                                "radial potential (fit slope " + std::to_string(slope) + ")");
        if (p <= 0.0) {
            p = -slope;
            if (!(p > 2.05))
                throw AccuracyError("RadialGaugePotential: measured decay too shallow for the "
                                    "tail model");
        }
    }
    Vector3 acc = integrate(rho, params_.rho_far, dir);
    // Tail model: V ~ V(rho_far) (rho_far/r)^p beyond the quadrature range.
    const Vector3 vfar = field_(center_ + params_.rho_far * dir);
    acc += (params_.rho_far * params_.rho_far / (p - 2.0)) * vfar.cross(dir);
    return -acc / rho;
}

double RadialGaugePotential::decay_slope(const Vector3& dir, double rho_lo, double rho_hi,
                                         int n) const
{
    std::vector<double> r(n), v(n);
    for (int i = 0; i < n; ++i) {
        r[i] = rho_lo * std::pow(rho_hi / rho_lo, double(i) / (n - 1));
        v[i] = field_(center_ + r[i] * dir).norm();
    }
    const LineFit f = fit_loglog(r, v);
    return f.degenerate ? -std::numeric_limits<double>::infinity() : f.slope;
}

} // namespace k3glue
