#include "k3glue/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "k3glue/parallel.hpp"
#include "k3glue/quadrature.hpp"

namespace k3glue {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double smootherstep(double s)
{
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smootherstep_deriv(double s)
{
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

} // namespace

CutoffProfile::CutoffProfile(double eps) : epsilon(eps)
{
    if (!(eps > 0.0)) throw HypothesisError("CutoffProfile: eps must be positive");
    inner = std::pow(eps, 0.4);
    outer = 2.0 * inner;
}

double CutoffProfile::value(double rho) const
{
    if (rho <= inner) return 1.0;
    if (rho >= outer) return 0.0;
    return 1.0 - smootherstep(std::log2(rho / inner));
}

double CutoffProfile::derivative(double rho) const
{
    if (rho <= inner || rho >= outer) return 0.0;
    return -smootherstep_deriv(std::log2(rho / inner)) / (rho * kLn2);
}

double CutoffProfile::log_slope_bound() { return 15.0 / (8.0 * kLn2); }

WeightFunction::WeightFunction(double eps, double R0, double rho0)
    : eps_(eps), R0_(R0), rho0_(rho0)
{
    if (!(eps > 0.0) || !(R0 > 1.0) || !(rho0 > 0.0))
        throw GeometryError("WeightFunction: bad parameters");
    if (!(2.0 * R0 * eps <= rho0))
        throw GeometryError("WeightFunction: needs 2 R0 eps <= rho0");
    if (!(2.0 * rho0 <= 1.0))
        throw GeometryError("WeightFunction: needs 2 rho0 <= 1 for the far plateau");
}

double WeightFunction::profile(double rho) const
{
    if (rho <= R0_ * eps_) return eps_;
    if (rho < 2.0 * R0_ * eps_) {
        const double t = smootherstep(std::log2(rho / (R0_ * eps_)));
        return std::exp((1.0 - t) * std::log(eps_) + t * std::log(rho));
    }
    if (rho <= rho0_) return rho;
    if (rho < 2.0 * rho0_) {
        const double t = smootherstep(std::log2(rho / rho0_));
        return std::exp((1.0 - t) * std::log(rho));
    }
    return 1.0;
}

double WeightFunction::value(const ChargeConfig& config, const Vector3& frac) const
{
    double w = 1.0;
    for (std::size_t i = 0; i < config.punctures().size(); ++i)
        w = std::min(w, profile(config.torus().distance(frac, config.punctures()[i].position)));
    return w;
}

double weighted_norm(const std::vector<WeightedSample>& samples, double delta)
{
    double worst = 0.0;
    for (const auto& s : samples) {
        if (!(s.rho_eps > 0.0))
            throw GeometryError("weighted_norm: sample missing its region weight");
        worst = std::max(worst, std::pow(s.rho_eps, -delta) * std::abs(s.value));
        for (std::size_t j = 0; j < s.derivatives.size(); ++j)
            worst = std::max(worst, std::pow(s.rho_eps, -delta + double(j + 1)) *
                                        std::abs(s.derivatives[j]));
    }
    return worst;
}

double ModelHarmonic::value(const Vector3& y) const
{
    const double rho = y.norm();
    return (1.0 + eps * lambda) + 0.5 * eps * charge / rho + eps * ell.dot(y);
}

Vector3 ModelHarmonic::gradient(const Vector3& y) const
{
    const double rho = y.norm();
    return -0.5 * eps * charge * y / (rho * rho * rho) + eps * ell;
}

std::vector<Vector3> cyclic_cluster_offsets(int weight)
{
    std::vector<Vector3> out;
    if (weight % 2 == 1) out.push_back(Vector3::Zero());
    int pairs = weight / 2;
    for (int t = 0; t < pairs; ++t) {
        Vector3 d = Vector3::Zero();
        d[t % 3] = 1.0 + static_cast<double>(t / 3);
        out.push_back(d);
        out.push_back(-d);
    }
    return out;
}

GluedStructure::GluedStructure(const ChargeConfig& config, int threads,
                               const EwaldParams& params)
    : config_(config)
{
    unit_field_ = std::make_shared<const HarmonicField>(config_, 1.0, params);
    build_locals(std::nullopt, threads);
}

GluedStructure::GluedStructure(const ChargeConfig& config,
                               std::vector<RegularPartData> regular_parts)
    : config_(config)
{
    unit_field_ = std::make_shared<const HarmonicField>(config_, 1.0);
    build_locals(std::move(regular_parts), 1);
}

GluedStructure::GluedStructure(const ChargeConfig& config, std::shared_ptr<const Ewald> ewald,
                               std::optional<std::vector<RegularPartData>> regular_parts,
                               int threads)
    : config_(config)
{
    unit_field_ = std::make_shared<const HarmonicField>(config_, 1.0, std::move(ewald));
    build_locals(std::move(regular_parts), threads);
}

void GluedStructure::build_locals(std::optional<std::vector<RegularPartData>> regs,
                                  int threads)
{
    const auto& punctures = config_.punctures();
    locals_.resize(punctures.size());
    if (regs && regs->size() != punctures.size())
        throw GeometryError("GluedStructure: regular-part count mismatch");
    parallel_for(punctures.size(), threads, [&](std::size_t i) {
        PunctureLocal loc;
        loc.puncture = punctures[i];
        loc.regular = regs ? (*regs)[i] : regular_part(*unit_field_, static_cast<int>(i));
        if (loc.puncture.kind == PunctureKind::Cyclic)
            loc.cluster = cyclic_cluster_offsets(loc.puncture.weight);
        locals_[i] = loc;
    });
}

ModelHarmonic GluedStructure::model_harmonic(int puncture, double eps) const
{
    const PunctureLocal& loc = local(puncture);
    ModelHarmonic m;
    m.puncture = puncture;
    m.charge = loc.puncture.charge;
    m.lambda = loc.regular.lambda;
    m.ell = loc.regular.ell;
    m.eps = eps;
    const double c0 = 1.0 + eps * m.lambda;
    if (!(c0 > 0.5 && c0 < 1.5))
        throw HypothesisError("model_harmonic: eps outside the admissibility window (1 + "
                              "eps*lambda = " + std::to_string(c0) + ")");
    return m;
}

double GluedStructure::delta_h_alf(int puncture, double eps, const Vector3& y) const
{
    const PunctureLocal& loc = local(puncture);
    const double rho = y.norm();
    if (loc.puncture.kind == PunctureKind::Cyclic) {
        double acc = -0.5 * loc.puncture.charge / rho;
        for (const Vector3& d : loc.cluster) acc += 0.5 / (y - eps * d).norm();
        return eps * acc;
    }
    if (!synthetic_dihedral) return 0.0;
    const double u = y[2] / rho;
    const double p2 = 0.5 * (3.0 * u * u - 1.0);
    return eps * eps * eps * synthetic_coefficient * p2 / (rho * rho * rho);
}

Vector3 GluedStructure::grad_delta_h_alf(int puncture, double eps, const Vector3& y) const
{
    const PunctureLocal& loc = local(puncture);
    const double rho = y.norm();
    if (loc.puncture.kind == PunctureKind::Cyclic) {
        Vector3 acc = 0.5 * loc.puncture.charge * y / (rho * rho * rho);
        for (const Vector3& d : loc.cluster) {
            const Vector3 rel = y - eps * d;
            acc += -0.5 * rel / std::pow(rel.norm(), 3.0);
        }
        return eps * acc;
    }
    if (!synthetic_dihedral) return Vector3::Zero();
    // grad of (3 y3^2 - rho^2) / (2 rho^5)
    const double r2 = rho * rho, r5 = std::pow(rho, 5.0), r7 = r5 * r2;
    Vector3 g = -y / r5;
    g[2] += 3.0 * y[2] / r5;
    g += -2.5 * (3.0 * y[2] * y[2] - r2) * y / r7;
    return eps * eps * eps * synthetic_coefficient * g;
}

double GluedStructure::delta_h_background(int puncture, double eps, const Vector3& y) const
{
    const ModelHarmonic m = model_harmonic(puncture, eps);
    const Vector3 frac =
        config_.torus().to_fractional(config_.torus().to_ambient(
            local(puncture).puncture.position) + y);
    const double h = unit_field_->trivial() ? 0.0 : unit_field_->eval(frac, 0).h;
    return (1.0 + eps * h) - m.value(y);
}

Vector3 GluedStructure::grad_delta_h_background(int puncture, double eps,
                                                const Vector3& y) const
{
    const ModelHarmonic m = model_harmonic(puncture, eps);
    const Vector3 frac =
        config_.torus().to_fractional(config_.torus().to_ambient(
            local(puncture).puncture.position) + y);
    const Vector3 g =
        unit_field_->trivial() ? Vector3::Zero() : Vector3(unit_field_->eval(frac, 1).grad);
    return eps * g - m.gradient(y);
}

namespace {

// Per-radius correction data along one ray from a puncture.
struct RayValues {
    double rho = 0.0;
    double dh_bg = 0.0;   // h_eps - h_model
    Vector3 b_bg = Vector3::Zero();
    std::array<Vector3, 3> a_bg{Vector3::Zero(), Vector3::Zero(), Vector3::Zero()};
    double dh_alf = 0.0;
    Vector3 b_alf = Vector3::Zero();
    std::array<Vector3, 3> a_alf{Vector3::Zero(), Vector3::Zero(), Vector3::Zero()};
};

struct RayState {
    Vector3 B = Vector3::Zero();                // int r (grad dh x s) dr
    std::array<Vector3, 3> A{Vector3::Zero(), Vector3::Zero(), Vector3::Zero()};
};

// d(state)/dr given the field pair (dh, grad dh) at radius r.
RayState ray_rhs(const RayState& y, double r, double dh, const Vector3& grad_dh,
                 const Vector3& dir)
{
    RayState f;
    f.B = r * grad_dh.cross(dir);
    const Vector3 b = r > 0.0 ? Vector3(y.B / r) : Vector3::Zero();
    for (int i = 0; i < 3; ++i) {
        Vector3 v = Vector3::Unit(i).cross(b);
        v[i] += dh;
        f.A[static_cast<std::size_t>(i)] = r * v.cross(dir);
    }
    return f;
}

RayState axpy(const RayState& y, double c, const RayState& d)
{
    RayState out = y;
    out.B += c * d.B;
    for (int i = 0; i < 3; ++i) out.A[static_cast<std::size_t>(i)] += c * d.A[static_cast<std::size_t>(i)];
    return out;
}

// One RK4 step of the ray system; field(r) -> (dh, grad dh).
template <typename Field>
RayState rk4_step(const RayState& y, double r0, double r1, const Field& field)
{
    const double h = r1 - r0;
    const double rm = 0.5 * (r0 + r1);
    double dh0, dhm, dh1;
    Vector3 g0, gm, g1;
    field(r0, dh0, g0);
    field(rm, dhm, gm);
    field(r1, dh1, g1);
    const RayState k1 = ray_rhs(y, r0, dh0, g0, field.dir);
    const RayState k2 = ray_rhs(axpy(y, 0.5 * h, k1), rm, dhm, gm, field.dir);
    const RayState k3 = ray_rhs(axpy(y, 0.5 * h, k2), rm, dhm, gm, field.dir);
    const RayState k4 = ray_rhs(axpy(y, h, k3), r1, dh1, g1, field.dir);
    RayState out = y;
    out.B += (h / 6.0) * (k1.B + 2.0 * k2.B + 2.0 * k3.B + k4.B);
    for (int i = 0; i < 3; ++i)
        out.A[static_cast<std::size_t>(i)] +=
            (h / 6.0) * (k1.A[static_cast<std::size_t>(i)] + 2.0 * k2.A[static_cast<std::size_t>(i)] +
                         2.0 * k3.A[static_cast<std::size_t>(i)] + k4.A[static_cast<std::size_t>(i)]);
    return out;
}

struct BackgroundField {
    const GluedStructure* glued;
    int puncture;
    double eps;
    Vector3 dir;
    void operator()(double r, double& dh, Vector3& grad) const
    {
        if (r <= 0.0) {
            // The integrands carry an explicit factor r; the r = 0 node never
            // contributes and the remainder vanishes at the puncture.
            dh = 0.0;
            grad = Vector3::Zero();
            return;
        }
        const Vector3 y = r * dir;
        dh = glued->delta_h_background(puncture, eps, y);
        grad = glued->grad_delta_h_background(puncture, eps, y);
    }
};

struct AlfField {
    const GluedStructure* glued;
    int puncture;
    double eps;
    Vector3 dir;
    void operator()(double r, double& dh, Vector3& grad) const
    {
        const Vector3 y = r * dir;
        dh = glued->delta_h_alf(puncture, eps, y);
        grad = glued->grad_delta_h_alf(puncture, eps, y);
    }
};

// Inward pass: integrate from the puncture out through the requested radii
// (ascending). b = B/r, a_i = A_i/r.
std::vector<RayValues> inward_pass(const GluedStructure& glued, int puncture, double eps,
                                   const Vector3& dir, const std::vector<double>& radii)
{
    std::vector<RayValues> out(radii.size());
    const BackgroundField field{&glued, puncture, eps, dir};

    // Trivial background: Kummer-type punctures with lambda = ell = 0 still
    // carry the model constant, but delta_h == 0 identically only when the
    // whole field is trivial and the local data vanishes.
    RayState y;
    double r_prev = 0.0;
    for (std::size_t t = 0; t < radii.size(); ++t) {
        const double r = radii[t];
        const int nsub = t == 0 ? 12 : 2;
        for (int s = 0; s < nsub; ++s) {
            const double a = r_prev + (r - r_prev) * s / nsub;
            const double b = r_prev + (r - r_prev) * (s + 1) / nsub;
            y = rk4_step(y, a, b, field);
        }
        r_prev = r;
        out[t].rho = r;
        double dh;
        Vector3 g;
        field(r, dh, g);
        out[t].dh_bg = dh;
        out[t].b_bg = y.B / r;
        for (int i = 0; i < 3; ++i) out[t].a_bg[static_cast<std::size_t>(i)] = y.A[static_cast<std::size_t>(i)] / r;
    }
    return out;
}

// Outward pass. With S(rho) = int_{r_far}^{rho} r (V x s) dr integrating
// naturally downward and T the analytic tail beyond r_far, the potential is
//   a(rho) = -(1/rho) [ int_rho^inf ] = (S(rho) - T) / rho,
// so the state is seeded with -T at r_far and divided by rho on readout.
void outward_pass(const GluedStructure& glued, int puncture, double eps, const Vector3& dir,
                  std::vector<RayValues>& vals)
{
    const AlfField field{&glued, puncture, eps, dir};
    const double r_hi = vals.back().rho;
    const double r_far = std::max(64.0 * r_hi, 8.0 * eps);

    RayState y;
    {
        double dh;
        Vector3 g;
        field(r_far, dh, g);
        y.B = -0.5 * r_far * r_far * g.cross(dir);  // tail: |grad dh| ~ r^-4
        const Vector3 b_far = y.B / r_far;
        for (int i = 0; i < 3; ++i) {
            Vector3 v = Vector3::Unit(i).cross(b_far);
            v[i] += dh;
            // tail: |V| ~ r^-3
            y.A[static_cast<std::size_t>(i)] = -r_far * r_far * v.cross(dir);
        }
    }

    // Log-spaced descent to the outermost sample, then through the samples.
    const int n_log = 48;
    double r_prev = r_far;
    for (int s = 1; s <= n_log; ++s) {
        const double r = r_hi * std::pow(r_far / r_hi, 1.0 - double(s) / n_log);
        y = rk4_step(y, r_prev, r, field);
        r_prev = r;
    }
    for (std::size_t t = vals.size(); t-- > 0;) {
        const double r = vals[t].rho;
        const int nsub = 2;
        for (int s = 0; s < nsub; ++s) {
            const double a = r_prev + (r - r_prev) * s / nsub;
            const double b = r_prev + (r - r_prev) * (s + 1) / nsub;
            y = rk4_step(y, a, b, field);
        }
        r_prev = r;
        double dh;
        Vector3 g;
        field(r, dh, g);
        vals[t].dh_alf = dh;
        vals[t].b_alf = y.B / r;
        for (int i = 0; i < 3; ++i) vals[t].a_alf[static_cast<std::size_t>(i)] = y.A[static_cast<std::size_t>(i)] / r;
    }
}

std::vector<RayValues> compute_ray(const GluedStructure& glued, int puncture, double eps,
                                   const Vector3& dir, const std::vector<double>& radii)
{
    std::vector<RayValues> vals = inward_pass(glued, puncture, eps, dir, radii);
    outward_pass(glued, puncture, eps, dir, vals);
    return vals;
}

AssembledSample assemble_from_ray(const GluedStructure& glued, double eps, int puncture,
                                  const Vector3& dir, const RayValues& v,
                                  const CutoffProfile& co)
{
    const ModelHarmonic m = glued.model_harmonic(puncture, eps);
    const double chi = co.value(v.rho);
    const double dchi = co.derivative(v.rho);
    const Vector3 y = v.rho * dir;
    const double h_m = m.value(y);
    if (!(h_m + chi * v.dh_alf + (1.0 - chi) * v.dh_bg > 0.0))
        throw NotDefiniteError("assemble_triple: harmonic data not positive at rho = " +
                               std::to_string(v.rho));

    AssembledSample out;
    out.puncture = puncture;
    out.rho = v.rho;
    out.chi = chi;
    out.region = v.rho <= co.inner
                     ? (glued.config().punctures()[static_cast<std::size_t>(puncture)].kind ==
                                PunctureKind::Cyclic
                            ? Region::CyclicInterior
                            : Region::DihedralInterior)
                     : Region::Transition;

    const double H = h_m + chi * v.dh_alf + (1.0 - chi) * v.dh_bg;
    const Vector3 B = chi * v.b_alf + (1.0 - chi) * v.b_bg;

    out.triple.frame = CoframeSample::gh_chart();
    out.triple.mu0 = eps;
    out.triple.coeff.setZero();
    for (int i = 0; i < 3; ++i) {
        out.triple.coeff(i, i) = eps;
        Vector3 w = Vector3::Unit(i).cross(B);
        w[i] += H;
        if (dchi != 0.0) {
            const Vector3 da = v.a_alf[static_cast<std::size_t>(i)] - v.a_bg[static_cast<std::size_t>(i)];
            w += dchi * dir.cross(da);
        }
        out.triple.coeff(i, 3) += w[0];
        out.triple.coeff(i, 4) += w[1];
        out.triple.coeff(i, 5) += w[2];
    }

    const IntersectionData data = intersection_matrix(out.triple);
    out.Q_normalized = data.Q_normalized;
    out.q_error = (data.Q_normalized - Matrix3::Identity()).norm();
    return out;
}

void check_eps_admissible(const GluedStructure& glued, double eps)
{
    const double rho0 = glued.config().rho0();
    if (eps * glued.R0 > rho0 / 8.0 + 1e-12)
        throw HypothesisError("gluing: eps*R0 must stay below rho0/8 (eps*R0 = " +
                              std::to_string(eps * glued.R0) + ", rho0 = " +
                              std::to_string(rho0) + ")");
    const CutoffProfile co(eps);
    // Transition annuli of distinct punctures must stay disjoint.
    if (2.0 * co.outer > 2.0 * rho0 + 1e-12)
        throw GeometryError("gluing: transition annuli overlap at this eps");
}

std::vector<Vector3> fibonacci_sphere(int n)
{
    std::vector<Vector3> dirs(static_cast<std::size_t>(n));
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        dirs[static_cast<std::size_t>(i)] = Vector3(r * std::cos(phi), r * std::sin(phi), z);
    }
    return dirs;
}

} // namespace

AssembledSample assemble_triple(const GluedStructure& glued, double eps, const Vector3& frac)
{
    check_eps_admissible(glued, eps);
    const CutoffProfile co(eps);
    int idx = -1;
    const double rho = glued.config().nearest_puncture(frac, &idx);

    if (rho >= co.outer) {
        AssembledSample out;
        out.region = Region::Far;
        out.puncture = -1;
        out.rho = rho;
        out.chi = 0.0;
        const double h_eps =
            glued.unit_field().trivial() ? 1.0 : 1.0 + eps * glued.unit_field().eval(frac, 0).h;
        if (!(h_eps > 0.0))
            throw NotDefiniteError("assemble_triple: h_eps not positive in the far region");
        out.triple = gh_triple_sample(h_eps, eps, CoframeSample::gh_chart());
        const IntersectionData data = intersection_matrix(out.triple);
        out.Q_normalized = data.Q_normalized;
        out.q_error = (data.Q_normalized - Matrix3::Identity()).norm();
        return out;
    }

    const auto& p = glued.config().punctures()[static_cast<std::size_t>(idx)];
    if (rho < 1e-12)
        throw RegionError("assemble_triple: query at a puncture");
    if (p.kind == PunctureKind::Dihedral && !glued.synthetic_dihedral &&
        rho < eps * glued.R0)
        throw RegionError("assemble_triple: dihedral deep interior without a synthetic "
                          "profile configured");

    const Vector3 y = glued.config().torus().min_image(frac, p.position);
    const Vector3 dir = y / y.norm();
    const auto vals = compute_ray(glued, idx, eps, dir, {rho});
    return assemble_from_ray(glued, eps, idx, dir, vals[0], co);
}

TransitionErrorResult transition_error(const GluedStructure& glued, double eps,
                                       const AnnulusGrid& grid, int threads)
{
    check_eps_admissible(glued, eps);
    const CutoffProfile co(eps);
    const int n_punctures = glued.n_punctures();
    const auto dirs = fibonacci_sphere(grid.n_dir);

    std::vector<double> radii(static_cast<std::size_t>(grid.n_rho));
    for (int t = 0; t < grid.n_rho; ++t)
        radii[static_cast<std::size_t>(t)] =
            co.inner + (co.outer - co.inner) * (t + 0.5) / grid.n_rho;

    struct TaskResult {
        double sup = 0.0;
        double rho = 0.0;
        std::string failure;
    };
    const std::size_t n_tasks = static_cast<std::size_t>(n_punctures) * dirs.size();
    std::vector<TaskResult> results(n_tasks);

    parallel_for(n_tasks, threads, [&](std::size_t task) {
        const int punc = static_cast<int>(task / dirs.size());
        const Vector3& dir = dirs[task % dirs.size()];
        TaskResult res;
        try {
            const auto vals = compute_ray(glued, punc, eps, dir, radii);
            for (const auto& v : vals) {
                const AssembledSample smp = assemble_from_ray(glued, eps, punc, dir, v, co);
                if (smp.q_error > res.sup) {
                    res.sup = smp.q_error;
                    res.rho = v.rho;
                }
            }
        } catch (const std::exception& e) {
            res.failure = e.what();
        }
        results[task] = res;
    });

    TransitionErrorResult out;
    out.per_puncture_sup.assign(static_cast<std::size_t>(n_punctures), 0.0);
    out.per_puncture_rho.assign(static_cast<std::size_t>(n_punctures), 0.0);
    for (std::size_t task = 0; task < n_tasks; ++task) {
        const auto& res = results[task];
        if (!res.failure.empty()) {
            out.all_definite = false;
            throw NotDefiniteError("transition_error: sample failure at puncture " +
                                   std::to_string(task / dirs.size()) + ": " + res.failure);
        }
        const int punc = static_cast<int>(task / dirs.size());
        if (res.sup > out.per_puncture_sup[static_cast<std::size_t>(punc)]) {
            out.per_puncture_sup[static_cast<std::size_t>(punc)] = res.sup;
            out.per_puncture_rho[static_cast<std::size_t>(punc)] = res.rho;
        }
        if (res.sup > out.sup_q_error) {
            out.sup_q_error = res.sup;
            out.argmax_puncture = punc;
            out.argmax_rho = res.rho;
            out.argmax_dir = dirs[task % dirs.size()];
        }
    }
    return out;
}

ErrorSweepResult error_sweep(const GluedStructure& glued, std::vector<double> eps_list,
                             const AnnulusGrid& grid, int threads)
{
    if (eps_list.size() < 4)
        throw HypothesisError("error_sweep: need at least 4 epsilon values");
    std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());
    ErrorSweepResult out;
    for (double eps : eps_list) {
        const TransitionErrorResult res = transition_error(glued, eps, grid, threads);
        out.epsilons.push_back(eps);
        out.sup_errors.push_back(res.sup_q_error);
        out.details.push_back(res);
    }
    out.fit = fit_loglog(out.epsilons, out.sup_errors);
    return out;
}

CollapseProfileResult collapse_profile(const GluedStructure& glued,
                                       const std::vector<double>& eps_list, double beta,
                                       int grid_n, int threads)
{
    if (!(beta > 0.0 && beta < 1.0))
        throw HypothesisError("collapse_profile: beta must lie in (0, 1)");
    CollapseProfileResult out;
    out.epsilons = eps_list;

    const HarmonicField& field = glued.unit_field();
    if (field.trivial()) {
        out.trivial = true;
        out.sup_h.assign(eps_list.size(), 0.0);
        out.sup_rho_grad.assign(eps_list.size(), 0.0);
        out.fit_h.degenerate = true;
        out.fit_grad.degenerate = true;
        return out;
    }

    const FlatTorus& torus = glued.config().torus();
    struct Sample {
        double h;
        double grad_norm;
        double rho;
    };
    std::vector<Vector3> points;
    for (int a = 0; a < grid_n; ++a)
        for (int b = 0; b < grid_n; ++b)
            for (int c = 0; c < grid_n; ++c)
                points.push_back(
                    Vector3((a + 0.5) / grid_n, (b + 0.5) / grid_n, (c + 0.5) / grid_n));
    // Shell samples at the exclusion radius, where the supremum sits.
    const auto shell_dirs = fibonacci_sphere(64);
    const std::size_t grid_count = points.size();
    for (double eps : eps_list) {
        const double r = std::pow(eps, beta);
        for (int p = 0; p < glued.n_punctures(); ++p)
            for (const auto& d : shell_dirs)
                points.push_back(FlatTorus::wrap_fractional(
                    glued.config().punctures()[static_cast<std::size_t>(p)].position +
                    torus.to_fractional(r * d)));
    }

    std::vector<Sample> samples(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
        Sample s;
        s.rho = glued.config().nearest_puncture(points[i]);
        if (s.rho < 1e-9) {
            s.h = 0.0;
            s.grad_norm = 0.0;
        } else {
            const FieldEval ev = field.eval(points[i], 1);
            s.h = ev.h;
            s.grad_norm = ev.grad.norm();
        }
        samples[i] = s;
    });

    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        const double r = std::pow(eps, beta);
        double sup_h = 0.0, sup_g = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            // Shell points belong to their own epsilon only.
            if (i >= grid_count) {
                const std::size_t block = (i - grid_count) /
                                          (static_cast<std::size_t>(glued.n_punctures()) *
                                           shell_dirs.size());
                if (block != e) continue;
            }
            const Sample& s = samples[i];
            if (s.rho < r - 1e-12) continue;
            ++used;
            sup_h = std::max(sup_h, eps * std::abs(s.h));
            sup_g = std::max(sup_g, s.rho * eps * s.grad_norm);
        }
        if (used == 0)
            throw GeometryError("collapse_profile: sample region empty (beta too small "
                                "for this torus)");
        out.sup_h.push_back(sup_h);
        out.sup_rho_grad.push_back(sup_g);
    }
    out.fit_h = fit_loglog(out.epsilons, out.sup_h);
    out.fit_grad = fit_loglog(out.epsilons, out.sup_rho_grad);
    return out;
}

} // namespace k3glue
