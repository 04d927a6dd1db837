#include "k3glue/harmonic_field.hpp"

#include <cmath>

#include "k3glue/errors.hpp"
#include "k3glue/parallel.hpp"
#include "k3glue/quadrature.hpp"

namespace k3glue {

HarmonicField::HarmonicField(const ChargeConfig& config, double epsilon,
                             const EwaldParams& params)
    : HarmonicField(config, epsilon,
                    config.all_charges_zero()
                        ? nullptr
                        : std::make_shared<const Ewald>(config.torus(), params))
{
}

HarmonicField::HarmonicField(const ChargeConfig& config, double epsilon,
                             std::shared_ptr<const Ewald> ewald)
    : config_(config), epsilon_(epsilon), ewald_(std::move(ewald))
{
    if (!(epsilon > 0.0)) throw HypothesisError("HarmonicField: epsilon must be > 0");
    trivial_ = config_.all_charges_zero();
    if (trivial_) return;  // h == 0, skip all table construction

    if (!ewald_) ewald_ = std::make_shared<const Ewald>(config_.torus(), EwaldParams{});
    for (const auto& p : config_.punctures()) {
        if (p.charge == 0.0) continue;
        source_frac_.push_back(p.position);
        source_charge_.push_back(p.charge);
    }
    sf_cos_.resize(ewald_->reciprocal().size());
    sf_sin_.resize(ewald_->reciprocal().size());
    for (std::size_t t = 0; t < ewald_->reciprocal().size(); ++t) {
        const Vector3& k = ewald_->reciprocal()[t].k;
        double sc = 0.0, ss = 0.0;
        for (std::size_t a = 0; a < source_frac_.size(); ++a) {
            const double phase = k.dot(config_.torus().to_ambient(source_frac_[a]));
            sc += source_charge_[a] * std::cos(phase);
            ss += source_charge_[a] * std::sin(phase);
        }
        sf_cos_[t] = sc;
        sf_sin_[t] = ss;
    }
}

FieldEval HarmonicField::eval(const Vector3& frac, int derivs) const
{
    FieldEval out;
    if (trivial_) return out;

    const FlatTorus& torus = config_.torus();
    const double guard = 1e-9 * torus.inj_radius();

    // Real-space screened sum, one image loop per charged source.
    const double r_cut = ewald_->real_cutoff();
    const double r_cut_sq = r_cut * r_cut;
    for (std::size_t a = 0; a < source_frac_.size(); ++a) {
        Vector3 rel = frac - source_frac_[a];
        for (int i = 0; i < 3; ++i) rel[i] -= std::round(rel[i]);
        const Vector3 x = torus.to_ambient(rel);
        const double q = source_charge_[a];
        for (const Vector3& s : ewald_->shifts()) {
            const Vector3 d = x - s;
            const double r_sq = d.squaredNorm();
            if (r_sq > r_cut_sq) continue;
            const double r = std::sqrt(r_sq);
            if (r < guard)
                throw SingularityError("HarmonicField::eval: point at a charged puncture");
            double f, fp_over_r, fpp;
            ewald_->real_kernel(r, f, fp_over_r, fpp);
            out.h += q * f;
            if (derivs >= 1) out.grad += q * fp_over_r * d;
            if (derivs >= 2) {
                const Vector3 u = d / r;
                out.hess += q * (fpp * (u * u.transpose()) +
                                 fp_over_r * (Matrix3::Identity() - u * u.transpose()));
            }
        }
    }

    // Reciprocal sum via structure factors:
    // sum_a q_a cos(k.(x - x_a)) = cos(k.x) sf_cos + sin(k.x) sf_sin.
    const Vector3 x = torus.to_ambient(frac);
    const auto& recip = ewald_->reciprocal();
    for (std::size_t t = 0; t < recip.size(); ++t) {
        const Vector3& k = recip[t].k;
        const double coeff = recip[t].coeff;
        const double phase = k.dot(x);
        const double c = std::cos(phase), sn = std::sin(phase);
        const double even = c * sf_cos_[t] + sn * sf_sin_[t];
        const double odd = -sn * sf_cos_[t] + c * sf_sin_[t];
        out.h += coeff * even;
        if (derivs >= 1) out.grad += coeff * odd * k;
        if (derivs >= 2) out.hess += -coeff * even * (k * k.transpose());
    }
    // Total charge is zero, so the per-source self constants cancel exactly.
    return out;
}

double flux(const HarmonicField& field, int puncture_index, double sigma, int n_theta)
{
    const auto& punctures = field.config().punctures();
    const auto& p = punctures[static_cast<std::size_t>(puncture_index)];
    const FlatTorus& torus = field.torus();

    if (!(sigma > 0.0) || sigma >= torus.inj_radius() / 4.0)
        throw GeometryError("flux: sigma must lie in (0, inj_radius/4)");
    for (std::size_t b = 0; b < punctures.size(); ++b) {
        if (static_cast<int>(b) == puncture_index) continue;
        const double d = torus.distance(p.position, punctures[b].position);
        if (sigma >= 0.5 * d)
            throw GeometryError("flux: sphere of radius sigma reaches another puncture's ball");
    }
    if (field.trivial()) return 0.0;

    const auto nodes = sphere_rule(n_theta);
    double acc = 0.0;
    for (const auto& nd : nodes) {
        const Vector3 frac = p.position + torus.to_fractional(sigma * nd.dir);
        const FieldEval ev = field.eval(frac, 1);
        acc += nd.w * ev.grad.dot(nd.dir);
    }
    return -(sigma * sigma / (2.0 * kPi)) * acc;
}

RegularPartData regular_part(const HarmonicField& field, int puncture_index, int n_theta,
                             double tol)
{
    const auto& p = field.config().punctures()[static_cast<std::size_t>(puncture_index)];
    const FlatTorus& torus = field.torus();
    const double rho0 = field.config().rho0();
    const double c = p.charge;

    RegularPartData out;
    out.puncture = puncture_index;

    if (field.trivial()) return out;  // h == 0: lambda = 0, ell = 0

    const auto nodes = sphere_rule(n_theta);
    constexpr int kSMin = 2, kSMax = 6;
    const int nr = kSMax - kSMin + 1;
    std::vector<double> radii(nr), means(nr);
    std::vector<Vector3> first_harmonic(nr);

    for (int s = kSMin; s <= kSMax; ++s) {
        const double rho = rho0 * std::pow(2.0, -s);
        double mean = 0.0;
        Vector3 fh = Vector3::Zero();
        for (const auto& nd : nodes) {
            const Vector3 frac = p.position + torus.to_fractional(rho * nd.dir);
            const double u = field.eval(frac, 0).h - c / (2.0 * rho);
            mean += nd.w * u;
            fh += nd.w * u * nd.dir;
        }
        const int idx = s - kSMin;
        radii[idx] = rho;
        means[idx] = mean / (4.0 * kPi);
        // mean of u * n over the sphere is (rho/3) grad u(0) + O(rho^3)
        first_harmonic[idx] = fh * (3.0 / (4.0 * kPi * rho));
    }

    // Richardson in rho^2 (Neville table on (rho^2, mean)).
    std::vector<double> tab = means;
    std::vector<double> t2(nr);
    for (int i = 0; i < nr; ++i) t2[i] = radii[i] * radii[i];
    for (int level = 1; level < nr; ++level)
        for (int i = nr - 1; i >= level; --i)
            tab[i] = tab[i] + (tab[i] - tab[i - 1]) * t2[i] / (t2[i - level] - t2[i]);
    out.lambda = tab[nr - 1];
    out.lambda_spread = std::abs(tab[nr - 1] - tab[nr - 2]);
    if (!std::isfinite(out.lambda) || out.lambda_spread > 1e3 * tol)
        throw AccuracyError("regular_part: Richardson extrapolation did not settle");

    // Least-squares fit of the first harmonic against rho^2 per component;
    // the intercept is the regular-part gradient.
    Vector3 ell = Vector3::Zero();
    {
        double sx = 0, sxx = 0;
        for (int i = 0; i < nr; ++i) {
            sx += t2[i];
            sxx += t2[i] * t2[i];
        }
        const double mx = sx / nr;
        const double denom = sxx - nr * mx * mx;
        for (int comp = 0; comp < 3; ++comp) {
            double sy = 0, sxy = 0;
            for (int i = 0; i < nr; ++i) {
                sy += first_harmonic[i][comp];
                sxy += t2[i] * first_harmonic[i][comp];
            }
            const double my = sy / nr;
            const double slope = (sxy - nr * mx * my) / denom;
            ell[comp] = my - slope * mx;
        }
    }

    if (p.kind == PunctureKind::Dihedral) {
        if (ell.norm() > tol)
            throw AccuracyError("regular_part: nonzero gradient extracted at a fixed point");
        out.ell = Vector3::Zero();
    } else {
        out.ell = ell;
    }
    out.ell_bound = ell.norm();
    return out;
}

PositivityScan positivity_threshold(const ChargeConfig& config, int grid_n, int threads)
{
    PositivityScan scan;
    for (int s = 3; s <= 16; ++s) scan.tested.push_back(std::pow(2.0, -s));

    if (config.all_charges_zero()) {
        // h_eps == 1 > 1/2 everywhere; the whole scan validates.
        scan.valid.assign(scan.tested.size(), 1);
        scan.min_h_eps.assign(scan.tested.size(), 1.0);
        scan.eps0 = scan.tested.front();
        return scan;
    }

    std::vector<int> bad;
    for (int j = 0; j < 8; ++j)
        if (config.dihedral_weights()[j] <= 1) bad.push_back(j);

    // h is epsilon-independent: sample once, threshold per epsilon.
    HarmonicField field(config, 1.0);
    const FlatTorus& torus = config.torus();

    struct Sample {
        Vector3 frac;
        double h;
        double bad_dist;  // distance to the nearest bad puncture
    };
    std::vector<Vector3> points;
    for (int a = 0; a < grid_n; ++a)
        for (int b = 0; b < grid_n; ++b)
            for (int c = 0; c < grid_n; ++c)
                points.push_back(Vector3((a + 0.5) / grid_n, (b + 0.5) / grid_n,
                                         (c + 0.5) / grid_n));
    // Exclusion-ball boundary shells at every scan radius: the minimum sits
    // on these boundaries when it exists.
    const auto shell = sphere_rule(8);
    for (double eps : scan.tested)
        for (int j : bad)
            for (const auto& nd : shell)
                points.push_back(FlatTorus::wrap_fractional(
                    ChargeConfig::fixed_point(j) + torus.to_fractional(8.0 * eps * nd.dir)));

    std::vector<Sample> samples(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
        Sample smp;
        smp.frac = points[i];
        double bd = std::numeric_limits<double>::max();
        for (int j : bad) bd = std::min(bd, torus.distance(points[i], ChargeConfig::fixed_point(j)));
        smp.bad_dist = bd;
        const double guard = 1e-6 * torus.inj_radius();
        if (config.nearest_puncture(points[i]) < guard) {
            smp.h = 0.0;
            smp.bad_dist = -1.0;  // always excluded
        } else {
            smp.h = field.eval(points[i], 0).h;
        }
        samples[i] = smp;
    });

    scan.valid.assign(scan.tested.size(), 0);
    scan.min_h_eps.assign(scan.tested.size(), 0.0);
    for (std::size_t e = 0; e < scan.tested.size(); ++e) {
        const double eps = scan.tested[e];
        double lo = std::numeric_limits<double>::max();
        for (const auto& smp : samples) {
            if (smp.bad_dist < 8.0 * eps) continue;
            lo = std::min(lo, 1.0 + eps * smp.h);
        }
        scan.min_h_eps[e] = lo;
        scan.valid[e] = lo > 0.5 ? 1 : 0;
    }

    // Conservative tie-break: report the top of the valid run coming up from
    // the smallest scan value.
    scan.eps0 = 0.0;
    for (int e = static_cast<int>(scan.tested.size()) - 1; e >= 0; --e) {
        if (!scan.valid[static_cast<std::size_t>(e)]) break;
        scan.eps0 = scan.tested[static_cast<std::size_t>(e)];
    }
    if (scan.eps0 == 0.0)
        throw HypothesisError("positivity_threshold: scan exhausted without a valid epsilon");
    return scan;
}

double closedness_residual(const HarmonicField& field, const Vector3& frac, double step)
{
    if (field.trivial()) return 0.0;
    const FlatTorus& torus = field.torus();
    const double rho = field.config().nearest_puncture(frac);
    if (step <= 0.0) step = 1e-3 * std::max(rho, 1e-6 * torus.inj_radius());
    if (rho < 8.0 * step)
        throw SingularityError("closedness_residual: stencil reaches a puncture ball");

    auto lap = [&](double hstep) {
        double acc = 0.0;
        const double center = field.eval(frac, 0).h;
        for (int i = 0; i < 3; ++i) {
            Vector3 dx = Vector3::Zero();
            dx[i] = hstep;
            const Vector3 dfrac = torus.to_fractional(dx);
            const double plus = field.eval(frac + dfrac, 0).h;
            const double minus = field.eval(frac - dfrac, 0).h;
            acc += (plus - 2.0 * center + minus) / (hstep * hstep);
        }
        return acc;
    };
    // One Richardson step across a step halving kills the O(step^2) term.
    const double c1 = lap(step), c2 = lap(0.5 * step);
    const double extrap = (4.0 * c2 - c1) / 3.0;
    return std::abs(field.epsilon() * extrap);
}

} // namespace k3glue
