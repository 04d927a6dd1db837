#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "k3glue/gluing.hpp"
#include "k3glue/quadrature.hpp"

using namespace k3glue;

namespace {

// Large cubic torus so that the eps*R0 admissibility and the annulus
// disjointness both hold across eps in {2^-5 .. 2^-9}.
const GluedStructure& sweep_structure()
{
    static const GluedStructure glued = [] {
        const FlatTorus torus(32.0 * Matrix3::Identity());
        const ChargeConfig cfg(torus, {1, 1, 2, 2, 2, 2, 2, 2},
                               {{Vector3(0.23, 0.11, 0.37), 2}});
        return GluedStructure(cfg, 2);
    }();
    return glued;
}

const GluedStructure& kummer_structure()
{
    static const GluedStructure glued = [] {
        const FlatTorus torus(32.0 * Matrix3::Identity());
        const ChargeConfig cfg(torus, {2, 2, 2, 2, 2, 2, 2, 2}, {});
        return GluedStructure(cfg, 2);
    }();
    return glued;
}

} // namespace

TEST_CASE("cutoff profile: boundary values, monotone, uniform log-slope bound")
{
    for (double eps : {1.0 / 32, 1.0 / 128, 1.0 / 512}) {
        const CutoffProfile co(eps);
        CHECK(co.value(co.inner) == doctest::Approx(1.0));
        CHECK(co.value(co.outer) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(co.value(0.5 * co.inner) == 1.0);
        CHECK(co.value(2.0 * co.outer) == 0.0);
        double worst = 0.0;
        double prev = 2.0;
        for (int t = 0; t <= 400; ++t) {
            const double rho = co.inner * std::pow(co.outer / co.inner, t / 400.0);
            const double v = co.value(rho);
            CHECK(v <= prev + 1e-12);  // monotone nonincreasing
            prev = v;
            worst = std::max(worst, std::abs(rho * co.derivative(rho)));
        }
        CHECK(worst <= CutoffProfile::log_slope_bound() + 1e-9);
        CHECK(worst > 0.5 * CutoffProfile::log_slope_bound());
    }
}

TEST_CASE("weight function: plateaus exact, monotone, global minimum over punctures")
{
    const double eps = 1.0 / 1024, R0 = 16.0, rho0 = 0.12;
    const WeightFunction w(eps, R0, rho0);
    CHECK(w.profile(0.5 * R0 * eps) == eps);
    CHECK(w.profile(R0 * eps) == eps);
    CHECK(w.profile(2.0 * R0 * eps) == doctest::Approx(2.0 * R0 * eps));
    CHECK(w.profile(0.5 * rho0) == doctest::Approx(0.5 * rho0));
    CHECK(w.profile(rho0) == doctest::Approx(rho0));
    CHECK(w.profile(2.5 * rho0) == 1.0);
    double prev = 0.0;
    for (int t = 0; t <= 2000; ++t) {
        const double rho = 1e-5 * std::pow(1.0 / 1e-5, t / 2000.0);
        const double v = w.profile(rho);
        CHECK(v >= prev - 1e-13);
        prev = v;
    }
    CHECK_THROWS_AS(WeightFunction(0.1, 16.0, 0.12), GeometryError);
}

TEST_CASE("weighted norms: plateau values and the product inequality")
{
    std::vector<WeightedSample> ones;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> rdist(1e-3, 1.0);
    for (int i = 0; i < 50; ++i) ones.push_back({rdist(rng), 1.0, {}});
    CHECK(weighted_norm(ones, 0.0) == doctest::Approx(1.0));

    const double delta = -0.25;
    std::vector<WeightedSample> powerlaw;
    for (int i = 0; i < 50; ++i) {
        const double rho = rdist(rng);
        powerlaw.push_back({rho, std::pow(rho, delta), {}});
    }
    CHECK(weighted_norm(powerlaw, delta) == doctest::Approx(1.0).epsilon(1e-12));

    // Product estimate with delta - 1 < 0 and rho_eps >= eps: C <= 2.
    const double eps = 1.0 / 256;
    std::normal_distribution<double> val(0.0, 1.0);
    std::vector<WeightedSample> u, v, uv;
    for (int i = 0; i < 200; ++i) {
        const double rho = eps + (1.0 - eps) * rdist(rng);
        const double a = val(rng), b = val(rng);
        u.push_back({rho, a, {}});
        v.push_back({rho, b, {}});
        uv.push_back({rho, a * b, {}});
    }
    const double dm1 = delta - 1.0;
    const double lhs = weighted_norm(uv, dm1);
    const double rhs = 2.0 * std::pow(eps, dm1) * weighted_norm(u, dm1) * weighted_norm(v, dm1);
    CHECK(lhs <= rhs);

    std::vector<WeightedSample> missing = {{0.0, 1.0, {}}};
    CHECK_THROWS_AS(weighted_norm(missing, 0.0), GeometryError);
}

TEST_CASE("cyclic cluster offsets are symmetric and carry the full weight")
{
    for (int k = 1; k <= 16; ++k) {
        const auto offsets = cyclic_cluster_offsets(k);
        CHECK(static_cast<int>(offsets.size()) == k);
        Vector3 sum = Vector3::Zero();
        for (const auto& d : offsets) sum += d;
        CHECK(sum.norm() < 1e-14);  // dipole-free
        for (std::size_t a = 0; a < offsets.size(); ++a)
            for (std::size_t b = a + 1; b < offsets.size(); ++b)
                CHECK((offsets[a] - offsets[b]).norm() > 0.5);
    }
}

TEST_CASE("model harmonics: Kummer trivial, coefficient pattern, admissibility window")
{
    const GluedStructure& kummer = kummer_structure();
    const ModelHarmonic mk = kummer.model_harmonic(0, 1.0 / 128);
    CHECK(mk.charge == 0.0);
    CHECK(mk.lambda == 0.0);
    CHECK(mk.value(Vector3(0.01, 0.0, 0.0)) == doctest::Approx(1.0));

    // m_j = 3 would give coefficient eps * 1 / rho; here the generic sweep
    // config has m_0 = 1, so the coefficient is eps * (1 - 2) / rho.
    const GluedStructure& glued = sweep_structure();
    const double eps = 1.0 / 128;
    const ModelHarmonic m0 = glued.model_harmonic(0, eps);
    const double rho = 0.37;
    const double expect = (1.0 + eps * m0.lambda) + eps * (1.0 - 2.0) / rho;
    CHECK(m0.value(rho * Vector3::UnitX()) == doctest::Approx(expect).epsilon(1e-14));

    // Cyclic form carries the eps * k / (2 rho) and the linear term.
    const ModelHarmonic mc = glued.model_harmonic(8, eps);
    CHECK(mc.charge == 2.0);
    const Vector3 y(0.2, -0.1, 0.05);
    CHECK(mc.value(y) == doctest::Approx((1.0 + eps * mc.lambda) + eps * 1.0 / y.norm() +
                                         eps * mc.ell.dot(y)));

    // A huge eps breaks the admissibility window whenever lambda != 0.
    if (std::abs(mc.lambda) > 1e-6)
        CHECK_THROWS_AS(glued.model_harmonic(8, 1.0 / std::abs(mc.lambda)), HypothesisError);
}

TEST_CASE("background remainder on the annulus is O(eps rho^2)")
{
    const GluedStructure& glued = sweep_structure();
    const double eps = 1.0 / 256;
    const int punc = 8;
    const Vector3 dir = Vector3(0.4, 0.7, -0.3).normalized();

    std::vector<double> radii, sups;
    for (int s = 0; s < 6; ++s) {
        const double rho = glued.config().rho0() / 4.0 / std::pow(2.0, s);
        double sup = 0.0;
        for (const auto& d : eight_ray_design())
            sup = std::max(sup, std::abs(glued.delta_h_background(punc, eps, rho * d)));
        radii.push_back(rho);
        sups.push_back(sup);
    }
    const LineFit f = fit_loglog(radii, sups);
    CHECK_FALSE(f.degenerate);
    CHECK(f.slope >= 1.8);
    // Magnitude check |delta h| <= C eps rho^2 with a modest constant.
    for (std::size_t i = 0; i < radii.size(); ++i)
        CHECK(sups[i] <= 10.0 * eps * radii[i] * radii[i] + 1e-12);
    (void)dir;
}

TEST_CASE("assembled triple: regions, SU(2) identity outside annuli, continuity")
{
    const GluedStructure& glued = sweep_structure();
    const FlatTorus& torus = glued.config().torus();
    const double eps = 1.0 / 256;
    const CutoffProfile co(eps);

    SUBCASE("far region equals the background GH sample")
    {
        const Vector3 frac(0.41, 0.33, 0.12);
        REQUIRE(glued.config().nearest_puncture(frac) * 1.0 > co.outer);
        const AssembledSample s = assemble_triple(glued, eps, frac);
        CHECK(s.region == Region::Far);
        CHECK(s.q_error < 1e-12);
        const double h_eps = 1.0 + eps * glued.unit_field().eval(frac, 0).h;
        CHECK(s.triple.coeff(0, 3) == doctest::Approx(h_eps).epsilon(1e-12));
        CHECK(s.triple.coeff(0, 0) == doctest::Approx(eps));
    }
    SUBCASE("cyclic interior is an exact SU(2) sample")
    {
        const auto& p = glued.config().punctures()[8];
        const Vector3 dir = Vector3(0.3, -0.8, 0.52).normalized();
        const double rho = 0.6 * co.inner;
        const Vector3 frac = FlatTorus::wrap_fractional(
            p.position + torus.to_fractional(rho * dir));
        const AssembledSample s = assemble_triple(glued, eps, frac);
        CHECK(s.region == Region::CyclicInterior);
        CHECK(s.q_error < 1e-12);
    }
    SUBCASE("dihedral interior with the synthetic profile is an exact SU(2) sample")
    {
        const auto& p = glued.config().punctures()[0];
        const Vector3 dir = Vector3(0.9, 0.1, 0.42).normalized();
        const double rho = 0.5 * co.inner;
        const Vector3 frac = FlatTorus::wrap_fractional(
            p.position + torus.to_fractional(rho * dir));
        const AssembledSample s = assemble_triple(glued, eps, frac);
        CHECK(s.region == Region::DihedralInterior);
        CHECK(s.q_error < 1e-12);
    }
    SUBCASE("deep dihedral interior requires the synthetic profile")
    {
        GluedStructure bare(glued.config(),
                            [&] {
                                std::vector<RegularPartData> regs;
                                for (int i = 0; i < glued.n_punctures(); ++i)
                                    regs.push_back(glued.local(i).regular);
                                return regs;
                            }());
        bare.synthetic_dihedral = false;
        const auto& p = glued.config().punctures()[2];
        const Vector3 frac = FlatTorus::wrap_fractional(
            p.position + torus.to_fractional(0.5 * eps * bare.R0 * Vector3::UnitX()));
        CHECK_THROWS_AS(assemble_triple(bare, eps, frac), RegionError);
    }
    SUBCASE("continuity across the region boundaries")
    {
        const auto& p = glued.config().punctures()[8];
        const Vector3 dir = Vector3(-0.2, 0.6, 0.77).normalized();
        for (double boundary : {co.inner, co.outer}) {
            const double delta = 1e-7 * boundary;
            const Vector3 in_frac = FlatTorus::wrap_fractional(
                p.position + torus.to_fractional((boundary - delta) * dir));
            const Vector3 out_frac = FlatTorus::wrap_fractional(
                p.position + torus.to_fractional((boundary + delta) * dir));
            const AssembledSample a = assemble_triple(glued, eps, in_frac);
            const AssembledSample b = assemble_triple(glued, eps, out_frac);
            CHECK(std::abs(a.q_error - b.q_error) < 1e-8);
            // The h-slot of the triple is continuous whenever both sides use
            // the puncture gauge (inner boundary), and matches the background
            // value across the outer boundary.
            const double ha = a.triple.coeff(0, 3);
            const double hb = b.triple.coeff(0, 3);
            CHECK(ha == doctest::Approx(hb).epsilon(1e-6));
        }
    }
    SUBCASE("query at a puncture is rejected")
    {
        CHECK_THROWS_AS(assemble_triple(glued, eps, glued.config().punctures()[0].position),
                        RegionError);
    }
}

TEST_CASE("tau equivariance: mirrored samples carry identical coefficients")
{
    const GluedStructure& glued = sweep_structure();
    const FlatTorus& torus = glued.config().torus();
    const double eps = 1.0 / 256;
    const CutoffProfile co(eps);

    const auto& plus = glued.config().punctures()[8];

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 6; ++t) {
        Vector3 dir(u(rng), u(rng), u(rng));
        if (dir.norm() < 0.3) continue;
        dir.normalize();
        const double rho = co.inner * (1.1 + 0.8 * (t / 6.0));
        const Vector3 x = FlatTorus::wrap_fractional(plus.position + torus.to_fractional(rho * dir));
        const Vector3 mx = FlatTorus::wrap_fractional(-x);
        const AssembledSample a = assemble_triple(glued, eps, x);
        const AssembledSample b = assemble_triple(glued, eps, mx);
        CHECK(a.puncture == 8);
        CHECK(b.puncture == 9);
        CHECK((a.triple.coeff - b.triple.coeff).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("assembled triple is closed: FD divergence matches the model curvature slot")
{
    // d omega_i = (div V_i - d_i h_model) vol3 in the puncture gauge, which
    // vanishes identically when the correction potentials are exact; the FD
    // check guards the ray quadrature.
    const GluedStructure& glued = sweep_structure();
    const FlatTorus& torus = glued.config().torus();
    const double eps = 1.0 / 256;
    const CutoffProfile co(eps);

    for (int punc : {0, 8}) {
        const auto& p = glued.config().punctures()[static_cast<std::size_t>(punc)];
        const ModelHarmonic m = glued.model_harmonic(punc, eps);
        const Vector3 dir = Vector3(0.47, -0.62, 0.51).normalized();
        const double rho = 1.45 * co.inner;  // mid-annulus, dchi != 0
        const Vector3 y0 = rho * dir;
        const double step = 2e-3 * rho;

        for (int i = 0; i < 3; ++i) {
            double div = 0.0;
            for (int mu = 0; mu < 3; ++mu) {
                Vector3 dy = Vector3::Zero();
                dy[mu] = step;
                const Vector3 fp = FlatTorus::wrap_fractional(
                    p.position + torus.to_fractional(y0 + dy));
                const Vector3 fm = FlatTorus::wrap_fractional(
                    p.position + torus.to_fractional(y0 - dy));
                const AssembledSample sp = assemble_triple(glued, eps, fp);
                const AssembledSample sm = assemble_triple(glued, eps, fm);
                div += (sp.triple.coeff(i, 3 + mu) - sm.triple.coeff(i, 3 + mu)) /
                       (2.0 * step);
            }
            const double expect = m.gradient(y0)[i];
            CHECK(std::abs(div - expect) < 1e-4 * (1.0 + std::abs(expect)));
        }
    }
}

TEST_CASE("error sweep is invariant under doubling the configuration scale")
{
    // Same fractional punctures on a doubled lattice, same eps list: the
    // fitted exponent moves only within the sampling tolerance.
    const AnnulusGrid grid{16, 4};
    std::vector<double> eps_list = {1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512};

    const ErrorSweepResult base = error_sweep(sweep_structure(), eps_list, grid, 2);

    const FlatTorus torus2(64.0 * Matrix3::Identity());
    const ChargeConfig cfg2(torus2, {1, 1, 2, 2, 2, 2, 2, 2},
                            {{Vector3(0.23, 0.11, 0.37), 2}});
    const GluedStructure glued2(cfg2, 2);
    const ErrorSweepResult doubled = error_sweep(glued2, eps_list, grid, 2);

    CHECK(std::abs(base.fit.slope - doubled.fit.slope) < 0.25);
}

TEST_CASE("transition error: ratio between halved eps values tracks the expected rate")
{
    const GluedStructure& glued = sweep_structure();
    const AnnulusGrid grid{48, 6};
    const TransitionErrorResult e6 = transition_error(glued, 1.0 / 64, grid, 2);
    const TransitionErrorResult e7 = transition_error(glued, 1.0 / 128, grid, 2);
    CHECK(e6.all_definite);
    CHECK(e6.sup_q_error > 0.0);
    const double ratio = e7.sup_q_error / e6.sup_q_error;
    CHECK(ratio <= std::pow(2.0, -1.6));
    CHECK(ratio >= std::pow(2.0, -2.0));
}

TEST_CASE("error sweep: slope lands in the acceptance band, small-eps errors decrease")
{
    const GluedStructure& glued = sweep_structure();
    const AnnulusGrid grid{32, 6};
    std::vector<double> eps_list = {1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512};
    const ErrorSweepResult sweep = error_sweep(glued, eps_list, grid, 2);
    CHECK_FALSE(sweep.fit.degenerate);
    CHECK(sweep.fit.slope >= 1.6);
    CHECK(sweep.fit.slope <= 2.0);
    for (std::size_t i = 1; i < sweep.sup_errors.size(); ++i)
        CHECK(sweep.sup_errors[i] < sweep.sup_errors[i - 1]);

    CHECK_THROWS_AS(error_sweep(glued, {1.0 / 64}, grid, 1), HypothesisError);
}

TEST_CASE("kummer configuration: transition error driven by the synthetic profile alone")
{
    const GluedStructure& glued = kummer_structure();
    const AnnulusGrid grid{32, 6};
    const TransitionErrorResult e7 = transition_error(glued, 1.0 / 128, grid, 2);
    const TransitionErrorResult e8 = transition_error(glued, 1.0 / 256, grid, 2);
    CHECK(e7.sup_q_error > 0.0);
    const double ratio = e8.sup_q_error / e7.sup_q_error;
    CHECK(ratio <= std::pow(2.0, -1.6));
    CHECK(ratio >= std::pow(2.0, -2.0));
}

TEST_CASE("collapse profile: Kummer trivial, generic exponent 0.6 +- 0.1")
{
    SUBCASE("Kummer is identically zero")
    {
        const CollapseProfileResult res =
            collapse_profile(kummer_structure(), {1.0 / 32, 1.0 / 64}, 0.4, 8, 2);
        CHECK(res.trivial);
        CHECK(res.sup_h[0] == 0.0);
    }
    SUBCASE("generic configuration on the unit torus")
    {
        const FlatTorus torus(Matrix3::Identity());
        const ChargeConfig cfg(torus, {1, 1, 2, 2, 2, 2, 2, 2},
                               {{Vector3(0.23, 0.11, 0.37), 2}});
        const GluedStructure glued(cfg, 2);
        std::vector<double> eps_list;
        for (int s = 5; s <= 13; ++s) eps_list.push_back(std::pow(2.0, -s));
        const CollapseProfileResult res = collapse_profile(glued, eps_list, 0.4, 24, 2);
        CHECK_FALSE(res.fit_h.degenerate);
        // Configured head carries the sup|h_eps - 1| rate; the first-derivative
        // rate cleans up on the asymptotic tail.
        const std::vector<double> eps_head(eps_list.begin(), eps_list.begin() + 5);
        const std::vector<double> sup_head(res.sup_h.begin(), res.sup_h.begin() + 5);
        CHECK(fit_loglog(eps_head, sup_head).slope == doctest::Approx(0.6).epsilon(0.17));
        const std::vector<double> eps_tail(eps_list.begin() + 4, eps_list.end());
        const std::vector<double> grad_tail(res.sup_rho_grad.begin() + 4,
                                            res.sup_rho_grad.end());
        CHECK(fit_loglog(eps_tail, grad_tail).slope == doctest::Approx(0.6).epsilon(0.17));
    }
}
