#include "k3glue/alf_models.hpp"

#include <cmath>

#include "k3glue/fit.hpp"
#include "k3glue/radial.hpp"

namespace k3glue {

int MultiTaubNut::total_weight() const
{
    double acc = 0.0;
    for (const auto& [p, k] : poles) acc += k;
    return static_cast<int>(std::lround(acc));
}

namespace {

GhSampleData gh_data_from(double h)
{
    GhSampleData out;
    out.h = h;
    out.triple = gh_triple_sample(h, 1.0, CoframeSample::gh_chart());
    out.metric = Matrix4::Zero();
    out.metric(0, 0) = out.metric(1, 1) = out.metric(2, 2) = h;
    out.metric(3, 3) = 1.0 / h;
    return out;
}

} // namespace

GhSampleData model_sample(const AsymptoticModel& model, const Vector3& x)
{
    if (model.dihedral && model.k % 2 != 0)
        throw GeometryError("model_sample: dihedral models require even k");
    const double rho = x.norm();
    if (!(rho > 0.0)) throw GeometryError("model_sample: rho must be positive");
    const double h = model.h(rho);
    if (!(h > 0.0)) throw GeometryError("model_sample: outside the positivity domain");
    return gh_data_from(h);
}

GhSampleData multi_tn_sample(const MultiTaubNut& mtn, const Vector3& x)
{
    double h = mtn.lambda + mtn.ell.dot(x);
    for (const auto& [p, k] : mtn.poles) {
        const double r = (x - p).norm();
        if (r < 1e-12) throw SingularityError("multi_tn_sample: pole collision");
        h += 0.5 * k / r;
    }
    if (!(h > 0.0)) throw GeometryError("multi_tn_sample: outside the positivity domain");
    return gh_data_from(h);
}

PolePotential model_potential(const AsymptoticModel& model)
{
    return PolePotential(model.lambda, {{Vector3::Zero(), static_cast<double>(model.k)}});
}

PolePotential multi_tn_potential(const MultiTaubNut& mtn)
{
    std::vector<std::pair<Vector3, double>> poles(mtn.poles.begin(), mtn.poles.end());
    return PolePotential(mtn.lambda, std::move(poles), mtn.ell);
}

DecayFit decay_exponent(const MultiTaubNut& mtn, const AsymptoticModel& model,
                        const std::vector<Vector3>& rays, double rho_min, double rho_max,
                        int n_rho, const Vector3& center)
{
    if (mtn.total_weight() != model.k)
        throw GeometryError("decay_exponent: total pole weight must equal the model k");

    // Dual vector of *d(delta h): the gradient of h_mtn - h_model. Both
    // pole terms use the same expression so an exactly matching pole
    // cancels to zero in floating point.
    auto pole_grad = [](const Vector3& d, double k) -> Vector3 {
        const double r = d.norm();
        return -0.5 * k * d / (r * r * r);
    };
    auto grad_delta = [&](const Vector3& y) {
        Vector3 g = mtn.ell;
        for (const auto& [p, k] : mtn.poles) g += pole_grad(y - p, k);
        g -= pole_grad(y - center, static_cast<double>(model.k));
        return g;
    };
    auto delta_h = [&](const Vector3& y) {
        double v = mtn.lambda - model.lambda + mtn.ell.dot(y);
        for (const auto& [p, k] : mtn.poles) v += 0.5 * k / (y - p).norm();
        v -= 0.5 * model.k / (y - center).norm();
        return v;
    };

    RadialPotentialParams rp;
    rp.mode = RadialMode::FromInfinity;
    rp.rho_far = 16.0 * rho_max;
    rp.decay_order = 0.0;    // measure the rate per ray for the tail model
    rp.check_decay = false;  // the fit itself reports the measured rate
    const RadialGaugePotential beta(grad_delta, center, rp);

    DecayFit out;
    out.ray_slopes.reserve(rays.size());
    std::vector<double> rho(n_rho);
    for (int t = 0; t < n_rho; ++t)
        rho[t] = rho_min * std::pow(rho_max / rho_min, double(t) / (n_rho - 1));

    for (const auto& ray : rays) {
        const Vector3 dir = ray.normalized();
        std::vector<double> norms(n_rho);
        for (int t = 0; t < n_rho; ++t) {
            const Vector3 x = center + rho[t] * dir;
            const double hg = model.h(rho[t]);
            const double hm_val = hg + delta_h(x);
            const Vector3 b = beta.evaluate(rho[t], dir);
            // Difference in the chart (dx, theta_model), then normalize to the
            // model orthonormal frame (sqrt(hg) dx, theta/sqrt(hg)).
            Matrix4 dg = Matrix4::Zero();
            const double dh = hm_val - hg;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) dg(i, j) = b[i] * b[j] / hm_val;
                dg(i, i) += dh;
                dg(i, 3) = dg(3, i) = b[i] / hm_val;
            }
            dg(3, 3) = 1.0 / hm_val - 1.0 / hg;
            Vector4 scale(1.0 / std::sqrt(hg), 1.0 / std::sqrt(hg), 1.0 / std::sqrt(hg),
                          std::sqrt(hg));
            dg = scale.asDiagonal() * dg * scale.asDiagonal();
            norms[t] = dg.norm();
            out.max_difference = std::max(out.max_difference, norms[t]);
        }
        const LineFit f = fit_loglog(rho, norms);
        out.ray_slopes.push_back(f.degenerate ? 0.0 : f.slope);
    }

    if (out.max_difference < 1e-13) {
        out.degenerate = true;
        return out;
    }
    double mean = 0.0, lo = out.ray_slopes.front(), hi = out.ray_slopes.front();
    for (double s : out.ray_slopes) {
        mean += s;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    mean /= static_cast<double>(out.ray_slopes.size());
    out.exponent = -mean;
    out.spread = hi - lo;
    return out;
}

double dihedral_invariance_residual(const GhPotential& pot, const std::vector<Vector3>& probes)
{
    double worst = 0.0;
    for (const Vector3& x : probes) {
        const GhPotentialSample a = pot.sample(x);
        const GhPotentialSample b = pot.sample(-x);
        worst = std::max(worst, std::abs(a.h - b.h));
        worst = std::max(worst, (a.grad + b.grad).norm());
        // Triple coefficients in the canonical basis transform trivially under
        // the simultaneous involution; their discrepancy is the h-discrepancy
        // scaled into each slot.
        const TwoFormTriple ta = gh_triple_sample(a.h, pot.fiber_scale());
        const TwoFormTriple tb = gh_triple_sample(b.h, pot.fiber_scale());
        const Matrix4 delta = ta.frame.components - tb.frame.components;
        worst = std::max(worst, delta.cwiseAbs().maxCoeff());
    }
    return worst;
}

TopologyRow topology_table(const ALFClass& cls)
{
    TopologyRow row;
    if (cls.kind == ALFKind::Cyclic) {
        if (cls.index < -1) throw GeometryError("topology_table: A_k requires k >= -1");
        if (cls.index == -1) return {"Z", 0, 0, 0};
        return {"1", cls.index, cls.index + 1, 3 * cls.index};
    }
    if (cls.index < 0) throw GeometryError("topology_table: D_m requires m >= 0");
    if (cls.index == 0) return {"Z2", 0, 1, 0};
    return {"1", cls.index, cls.index + 1, 3 * cls.index};
}

EulerParameterCount euler_and_parameters(const std::array<int, 8>& m,
                                         const std::vector<PairSpec>& pairs)
{
    int sum_m = 0, sum_k = 0;
    for (int j = 0; j < 8; ++j) {
        if (m[j] < 0) throw GeometryError("euler_and_parameters: negative dihedral weight");
        sum_m += m[j];
    }
    for (const auto& p : pairs) {
        if (p.weight < 1) throw GeometryError("euler_and_parameters: pair weight must be >= 1");
        sum_k += p.weight;
    }
    if (sum_m + sum_k != 16)
        throw GeometryError("euler_and_parameters: unbalanced configuration (sum " +
                            std::to_string(sum_m + sum_k) + ")");
    EulerParameterCount out;
    out.chi = sum_k + sum_m + 8;
    const int n = static_cast<int>(pairs.size());
    out.parameters = 6 + 3 * n + 4 + 3 * sum_m + 3 * (sum_k - n);
    return out;
}

EulerParameterCount euler_and_parameters(const ChargeConfig& config)
{
    return euler_and_parameters(config.dihedral_weights(), config.pairs());
}

} // namespace k3glue
