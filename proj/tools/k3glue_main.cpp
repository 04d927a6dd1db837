// k3glue command-line tool: validation, sweeps and reports for numerically
// glued hyperkahler structures over a punctured flat 3-torus.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "k3glue/alf_models.hpp"
#include "k3glue/cache.hpp"
#include "k3glue/csv.hpp"
#include "k3glue/deformation.hpp"
#include "k3glue/gluing.hpp"
#include "k3glue/parallel.hpp"
#include "k3glue/quadrature.hpp"
#include "k3glue/report.hpp"
#include "k3glue/run_config.hpp"

namespace fs = std::filesystem;
using namespace k3glue;

namespace {

struct Context {
    RunConfig run;
    ChargeConfig charge;
    BlobCache cache;
    CacheStatus cache_status;
    std::shared_ptr<const Ewald> ewald;
    int threads = 1;
    std::string out_dir;

    Context(RunConfig r)
        : run(std::move(r)), charge(run.charge_config()), cache(run.cache_dir)
    {
        threads = run.threads > 0 ? run.threads : default_thread_count();
        out_dir = run.out_dir;
        fs::create_directories(out_dir);
        if (!charge.all_charges_zero()) {
            const std::uint64_t key = config_content_hash(charge, "ewald-v1");
            std::vector<double> blob;
            if (cache.load("ewald", key, blob, cache_status)) {
                ewald = std::make_shared<const Ewald>(
                    Ewald::from_blob(charge.torus(), blob));
            } else {
                ewald = std::make_shared<const Ewald>(charge.torus());
                cache.store("ewald", key, ewald->to_blob(), cache_status);
            }
        }
    }

    std::string out(const std::string& file) const { return out_dir + "/" + file; }

    GluedStructure glued()
    {
        const std::uint64_t key = config_content_hash(charge, "regparts-v1");
        std::vector<double> blob;
        const std::size_t n = charge.punctures().size();
        if (cache.load("regparts", key, blob, cache_status) && blob.size() == 6 * n) {
            std::vector<RegularPartData> regs(n);
            for (std::size_t i = 0; i < n; ++i) {
                regs[i].puncture = static_cast<int>(i);
                regs[i].lambda = blob[6 * i];
                regs[i].ell = Vector3(blob[6 * i + 1], blob[6 * i + 2], blob[6 * i + 3]);
                regs[i].lambda_spread = blob[6 * i + 4];
                regs[i].ell_bound = blob[6 * i + 5];
            }
            return GluedStructure(charge, ewald, std::move(regs), threads);
        }
        GluedStructure g(charge, ewald, std::nullopt, threads);
        blob.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const RegularPartData& r = g.local(static_cast<int>(i)).regular;
            blob.insert(blob.end(), {r.lambda, r.ell[0], r.ell[1], r.ell[2], r.lambda_spread,
                                     r.ell_bound});
        }
        cache.store("regparts", key, blob, cache_status);
        return g;
    }

    void finish(Report& report, const std::string& stem)
    {
        for (const auto& note : cache_status.notes)
            report.add({"cache: " + note, true, 0.0, 0.0, 0.0, "plumbing", false, ""});
        report.add({"cache hits", true, double(cache_status.hits), 0.0, 1e9, "plumbing",
                    false, ""});
        report.add({"cache misses", true, double(cache_status.misses), 0.0, 1e9, "plumbing",
                    false, ""});
        report.write_csv(out(stem + "_report.csv"));
        std::ofstream txt(out(stem + "_report.txt"));
        report.write_table(txt);
        report.write_table(std::cout);
    }
};

int run_validate(Context& ctx)
{
    Report report;
    const auto bal = ChargeConfig::check_balancing(ctx.charge.torus(),
                                                   ctx.run.dihedral_weights, ctx.run.pairs);
    report.check("balancing sum m_j + sum k_i", bal.weight_sum, 16, 16, "balancing condition");
    report.check("positional constraints violated", double(bal.violations.size()), 0, 0,
                 "distinct punctures");

    const auto counts = euler_and_parameters(ctx.charge);
    report.check("euler characteristic", counts.chi, 24, 24, "table arithmetic");
    report.check("parameter count", counts.parameters, 58, 58, "moduli count");

    // Flux-quantization spot checks at two radii around charged punctures.
    const HarmonicField field(ctx.charge, ctx.run.epsilons.front(), ctx.ewald);
    const double rho0 = ctx.charge.rho0();
    int checked = 0;
    for (std::size_t i = 0; i < ctx.charge.punctures().size() && checked < 3; ++i) {
        const auto& p = ctx.charge.punctures()[i];
        if (p.charge == 0.0) continue;
        for (double sigma : {rho0 / 8.0, rho0 / 4.0}) {
            const double f = flux(field, static_cast<int>(i), sigma);
            report.check("flux puncture " + std::to_string(i) + " sigma " + csv_double(sigma),
                         f, p.charge - 1e-6, p.charge + 1e-6, "Gauss law");
        }
        ++checked;
    }
    ctx.finish(report, "validate");
    return report.exit_code();
}

int run_monopole(Context& ctx)
{
    Report report;
    const GluedStructure glued = ctx.glued();
    const HarmonicField& field = glued.unit_field();
    const double rho0 = ctx.charge.rho0();
    const double eps = ctx.run.epsilons.front();

    CsvWriter csv(ctx.out("monopole.csv"),
                  {"puncture", "kind", "weight", "charge", "flux_r1", "flux_r2", "lambda",
                   "ell_norm"});
    for (std::size_t i = 0; i < ctx.charge.punctures().size(); ++i) {
        const auto& p = ctx.charge.punctures()[i];
        const double f1 =
            field.trivial() ? 0.0 : flux(field, static_cast<int>(i), rho0 / 8.0);
        const double f2 =
            field.trivial() ? 0.0 : flux(field, static_cast<int>(i), rho0 / 4.0);
        const RegularPartData& reg = glued.local(static_cast<int>(i)).regular;
        csv.row({std::to_string(i), p.kind == PunctureKind::Dihedral ? "dihedral" : "cyclic",
                 std::to_string(p.weight), csv_double(p.charge), csv_double(f1),
                 csv_double(f2), csv_double(reg.lambda), csv_double(reg.ell.norm())});
        report.check("flux quantization puncture " + std::to_string(i),
                     std::abs(f1 - p.charge) + std::abs(f2 - p.charge), 0.0, 2e-6,
                     "Gauss law");
    }

    // Harmonicity at deterministic probes away from the punctures.
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int done = 0;
    double worst = 0.0;
    while (done < 20) {
        const Vector3 x(u(rng), u(rng), u(rng));
        if (ctx.charge.nearest_puncture(x) < rho0 / 2.0) continue;
        const HarmonicField scaled(ctx.charge, eps, ctx.ewald);
        const double res = closedness_residual(scaled, x);
        const double scale =
            field.trivial() ? 1.0 : 1.0 + eps * field.eval(x, 2).hess.norm();
        worst = std::max(worst, res / scale);
        ++done;
    }
    report.check("harmonicity sup |lap h_eps| (relative)", worst, 0.0, 1e-6,
                 "finite-difference Laplacian");
    ctx.finish(report, "monopole");
    return report.exit_code();
}

int run_triple(Context& ctx)
{
    Report report;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> hdist(0.2, 5.0), edist(0.05, 2.0),
        fdist(-0.3, 0.3);
    double worst_q = 0.0, worst_star = 0.0, worst_renorm = 0.0;
    const int draws = ctx.run.tol_profile == "fast" ? 200 : 1000;
    for (int t = 0; t < draws; ++t) {
        CoframeSample frame;
        do {
            frame.components = Matrix4::Identity();
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) frame.components(i, j) += fdist(rng);
        } while (frame.det() < 0.2);
        const TwoFormTriple sample = gh_triple_sample(hdist(rng), edist(rng), frame);
        const IntersectionData data = intersection_matrix(sample);
        worst_q = std::max(worst_q, (data.Q_normalized - Matrix3::Identity()).norm());
        const Matrix4 g = recover_metric(sample);
        const Matrix6 star = hodge_star(g, frame, frame.orientation());
        worst_star = std::max(worst_star, (star * star - Matrix6::Identity()).norm());

        TwoFormTriple perturbed = sample;
        std::normal_distribution<double> nd(0.0, 0.01);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 6; ++j) perturbed.coeff(i, j) += nd(rng) * sample.coeff.norm() / 4.0;
        const IntersectionData pd = intersection_matrix(perturbed, false);
        if (!pd.definite || (pd.Q_normalized - Matrix3::Identity()).operatorNorm() > 0.1)
            continue;
        const TwoFormTriple renorm = pointwise_renormalize(perturbed);
        const IntersectionData rd = intersection_matrix(renorm);
        worst_renorm =
            std::max(worst_renorm, (rd.Q_normalized - Matrix3::Identity()).norm());
    }
    report.check("GH samples sup |Q - id|", worst_q, 0.0, 1e-12, "SU(2) identity");
    report.check("sup |star^2 - id|", worst_star, 0.0, 1e-12, "Hodge involution");
    report.check("renormalized sup |Q - id|", worst_renorm, 0.0, 1e-10, "matrix solver");

    // Contraction trace of the scalar fixed-point testbed.
    {
        ContractionProblem p;
        p.phi0 = Eigen::VectorXd::Constant(1, 0.01);
        p.apply_L_inverse = [](const Eigen::VectorXd& v) { return v; };
        p.apply_L = [](const Eigen::VectorXd& v) { return v; };
        p.apply_N = [](const Eigen::VectorXd& v) {
            return Eigen::VectorXd::Constant(1, v[0] * v[0]);
        };
        p.norm_E = p.norm_F = [](const Eigen::VectorXd& v) { return std::abs(v[0]); };
        p.C = 1.0;
        p.q = 1.0;
        p.r = 0.5;
        const ContractionResult cr = quadratic_ift(p);
        CsvWriter trace(ctx.out("contraction.csv"),
                        {"iteration", "residual", "contraction_factor"});
        for (std::size_t i = 0; i < cr.step_norms.size(); ++i) {
            const double factor =
                i == 0 ? 0.0 : cr.step_norms[i] / std::max(cr.step_norms[i - 1], 1e-300);
            trace.row({std::to_string(i + 1), csv_double(cr.step_norms[i]),
                       csv_double(factor)});
        }
        report.check("contraction final residual", cr.residual, 0.0, 1e-10,
                     "fixed-point certificate");
    }
    ctx.finish(report, "triple");
    return report.exit_code();
}

int run_error_sweep(Context& ctx)
{
    Report report;
    const GluedStructure glued = ctx.glued();
    const AnnulusGrid grid{ctx.run.effective_dirs(), ctx.run.effective_rho()};
    const ErrorSweepResult sweep = error_sweep(glued, ctx.run.epsilons, grid, ctx.threads);

    CsvWriter csv(ctx.out("error_sweep.csv"),
                  {"epsilon", "puncture", "rho", "sup_error", "slope"});
    for (std::size_t e = 0; e < sweep.epsilons.size(); ++e) {
        const auto& det = sweep.details[e];
        for (std::size_t p = 0; p < det.per_puncture_sup.size(); ++p)
            csv.row({csv_double(sweep.epsilons[e]), std::to_string(p),
                     csv_double(det.per_puncture_rho[p]), csv_double(det.per_puncture_sup[p]),
                     csv_double(sweep.fit.slope)});
    }
    report.check("gluing error exponent", sweep.fit.slope, 1.6, 2.0,
                 "transition-region rate");
    report.check("sup |Q - id| at smallest eps", sweep.sup_errors.back(), 0.0,
                 sweep.sup_errors.front(), "monotone decrease");
    ctx.finish(report, "error_sweep");
    return report.exit_code();
}

int run_collapse(Context& ctx)
{
    Report report;
    const GluedStructure glued = ctx.glued();

    // Extend the dyadic list downward: the field samples are
    // epsilon-independent, and the first-derivative rate only cleans up once
    // the singular term dominates the regular part of h.
    std::vector<double> eps_list = ctx.run.epsilons;
    std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());
    const std::size_t configured = eps_list.size();
    for (int extra = 1; extra <= 4; ++extra)
        eps_list.push_back(eps_list[configured - 1] * std::pow(0.5, extra));

    const CollapseProfileResult res =
        collapse_profile(glued, eps_list, ctx.run.beta, ctx.run.collapse_grid, ctx.threads);
    CsvWriter csv(ctx.out("collapse.csv"), {"epsilon", "sup_h", "sup_rho_grad"});
    for (std::size_t i = 0; i < res.epsilons.size(); ++i)
        csv.row({csv_double(res.epsilons[i]), csv_double(res.sup_h[i]),
                 csv_double(res.sup_rho_grad[i])});
    if (res.trivial) {
        report.check("collapse profile (trivial field)", 0.0, 0.0, 0.0, "Kummer case");
    } else {
        const double expect = 1.0 - ctx.run.beta;
        const std::vector<double> eps_head(res.epsilons.begin(),
                                           res.epsilons.begin() + configured);
        const std::vector<double> sup_head(res.sup_h.begin(), res.sup_h.begin() + configured);
        report.check("collapse exponent sup|h_eps - 1|", fit_loglog(eps_head, sup_head).slope,
                     expect - 0.1, expect + 0.1, "decay at the exclusion radius");
        const std::size_t tail = res.epsilons.size() / 2;
        const std::vector<double> eps_tail(res.epsilons.begin() + tail, res.epsilons.end());
        const std::vector<double> grad_tail(res.sup_rho_grad.begin() + tail,
                                            res.sup_rho_grad.end());
        report.check("collapse exponent rho|grad| (tail)",
                     fit_loglog(eps_tail, grad_tail).slope, expect - 0.1, expect + 0.1,
                     "same rate at first order");
    }
    ctx.finish(report, "collapse");
    return report.exit_code();
}

int run_asymptotics(Context& ctx)
{
    Report report;
    AsymptoticModel g2;
    g2.k = 2;
    const auto& rays = eight_ray_design();

    MultiTaubNut centered;
    centered.poles = {{Vector3(1, 0, 0), 1.0}, {Vector3(-1, 0, 0), 1.0}};
    const DecayFit fit_c = decay_exponent(centered, g2, rays, 20.0, 200.0);

    MultiTaubNut translated;
    translated.poles = {{Vector3(6, 0, 0), 1.0}, {Vector3(4, 0, 0), 1.0}};
    const DecayFit fit_t = decay_exponent(translated, g2, rays, 20.0, 200.0);

    CsvWriter csv(ctx.out("asymptotics.csv"),
                  {"case", "exponent", "spread", "max_difference", "degenerate"});
    csv.row({"centered_pair", csv_double(fit_c.exponent), csv_double(fit_c.spread),
             csv_double(fit_c.max_difference), fit_c.degenerate ? "1" : "0"});
    csv.row({"translated_pair", csv_double(fit_t.exponent), csv_double(fit_t.spread),
             csv_double(fit_t.max_difference), fit_t.degenerate ? "1" : "0"});

    report.check("ALF decay exponent (centered)", fit_c.exponent, 2.7, 3.3,
                 "cubic model decay");
    report.check("ALF decay exponent (translated)", fit_t.exponent, 1.7, 2.3,
                 "dipole term");
    ctx.finish(report, "asymptotics");
    return report.exit_code();
}

int run_topology(Context& ctx)
{
    Report report;
    CsvWriter csv(ctx.out("topology.csv"), {"family", "index", "pi1", "b2", "chi",
                                            "dim_moduli"});
    for (int k = -1; k <= 16; ++k) {
        const TopologyRow r = topology_table({ALFKind::Cyclic, k});
        csv.row({"A", std::to_string(k), r.pi1, std::to_string(r.b2), std::to_string(r.chi),
                 std::to_string(r.dim_moduli)});
    }
    for (int m = 0; m <= 16; ++m) {
        const TopologyRow r = topology_table({ALFKind::Dihedral, m});
        csv.row({"D", std::to_string(m), r.pi1, std::to_string(r.b2), std::to_string(r.chi),
                 std::to_string(r.dim_moduli)});
    }
    const auto counts = euler_and_parameters(ctx.charge);
    report.check("euler characteristic", counts.chi, 24, 24, "table arithmetic");
    report.check("parameter count", counts.parameters, 58, 58, "moduli count");
    ctx.finish(report, "topology");
    return report.exit_code();
}

int run_dirac(Context& ctx)
{
    Report report;
    GHOneForm a;
    a.value[0] = [](const Vector3& x, double) { return std::sin(2.0 * kPi * x[0]); };
    a.base_gradient[0] = [](const Vector3& x, double) {
        return Vector3(2.0 * kPi * std::cos(2.0 * kPi * x[0]), 0.0, 0.0);
    };
    a.value[1] = [](const Vector3& x, double) { return std::cos(2.0 * kPi * x[1]); };
    a.base_gradient[1] = [](const Vector3& x, double) {
        return Vector3(0.0, -2.0 * kPi * std::sin(2.0 * kPi * x[1]), 0.0);
    };
    a.value[2] = [](const Vector3&, double) { return 0.25; };
    a.base_gradient[2] = [](const Vector3&, double) { return Vector3::Zero(); };
    a.value[3] = [](const Vector3& x, double) { return std::sin(2.0 * kPi * x[2]); };
    a.base_gradient[3] = [](const Vector3& x, double) {
        return Vector3(0.0, 0.0, 2.0 * kPi * std::cos(2.0 * kPi * x[2]));
    };

    const HarmonicField unit(ctx.charge, 1.0, ctx.ewald);
    const std::vector<Vector3> probes = {Vector3(0.75, 0.25, 0.25), Vector3(0.25, 0.75, 0.25),
                                         Vector3(0.25, 0.25, 0.75)};
    const OperatorConvergence oc =
        operator_convergence(unit, ctx.run.epsilons, a, probes, 0.5, 0.5);

    CsvWriter csv(ctx.out("dirac.csv"), {"epsilon", "residual"});
    for (std::size_t i = 0; i < oc.epsilons.size(); ++i)
        csv.row({csv_double(oc.epsilons[i]), csv_double(oc.residuals[i])});

    if (ctx.charge.all_charges_zero()) {
        double worst = 0.0;
        for (double r : oc.residuals) worst = std::max(worst, r);
        report.check("operator residual (trivial case)", worst, 0.0, 1e-12, "flat reduction");
    } else {
        report.check("operator convergence exponent", oc.fit.slope, 0.5, 3.0,
                     "collapse of D to D0");
    }
    ctx.finish(report, "dirac");
    return report.exit_code();
}

int run_report(Context& ctx)
{
    // Every named sweep at the configured grids; one summary exit code. The
    // gluing sweep needs eps*R0 <= rho0/8, which small tori cannot satisfy
    // for the configured epsilons; report the skip instead of aborting the
    // remaining checks.
    int rc = 0;
    rc |= run_validate(ctx);
    rc |= run_monopole(ctx);
    rc |= run_triple(ctx);
    rc |= run_topology(ctx);
    rc |= run_asymptotics(ctx);
    rc |= run_collapse(ctx);
    rc |= run_dirac(ctx);
    try {
        rc |= run_error_sweep(ctx);
    } catch (const HypothesisError& e) {
        std::cerr << "error-sweep skipped: " << e.what() << '\n';
        Report skip;
        skip.add({"gluing error sweep", true, 0.0, 0.0, 0.0, "skipped", false, e.what()});
        std::ofstream txt(ctx.out("error_sweep_report.txt"));
        skip.write_table(txt);
        skip.write_csv(ctx.out("error_sweep_report.csv"));
    }
    return rc;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"numerical gluing of hyperkahler structures over a punctured 3-torus"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, out_override, cache_override, tol_override;
    int threads_override = -1;
    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--out", out_override, "output directory (overrides [run] out)");
    app.add_option("--cache", cache_override, "cache directory (overrides [run] cache)");
    app.add_option("--threads", threads_override, "worker threads (0 = hardware)");
    app.add_option("--tol-profile", tol_override, "fast | strict")
        ->check(CLI::IsMember({"fast", "strict"}));

    auto* validate = app.add_subcommand("validate", "balancing, topology and flux checks");
    auto* monopole = app.add_subcommand("monopole", "harmonic-field diagnostics per puncture");
    auto* triple = app.add_subcommand("triple", "pointwise SU(2)/Hodge identity spot checks");
    auto* error_sweep_cmd =
        app.add_subcommand("error-sweep", "transition-error sweep over epsilon");
    auto* collapse = app.add_subcommand("collapse", "collapse profile of h_eps");
    auto* asymptotics = app.add_subcommand("asymptotics", "ALF decay-exponent fits");
    auto* topology = app.add_subcommand("topology", "emit the topology tables");
    auto* dirac = app.add_subcommand("dirac", "operator convergence sweep");
    auto* full = app.add_subcommand("report", "run every check and sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig run = RunConfig::parse_file(config_path);
        if (!out_override.empty()) run.out_dir = out_override;
        if (!cache_override.empty()) run.cache_dir = cache_override;
        if (!tol_override.empty()) run.tol_profile = tol_override;
        if (threads_override >= 0) run.threads = threads_override;
        Context ctx(std::move(run));

        if (validate->parsed()) return run_validate(ctx);
        if (monopole->parsed()) return run_monopole(ctx);
        if (triple->parsed()) return run_triple(ctx);
        if (error_sweep_cmd->parsed()) return run_error_sweep(ctx);
        if (collapse->parsed()) return run_collapse(ctx);
        if (asymptotics->parsed()) return run_asymptotics(ctx);
        if (topology->parsed()) return run_topology(ctx);
        if (dirac->parsed()) return run_dirac(ctx);
        if (full->parsed()) return run_report(ctx);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
