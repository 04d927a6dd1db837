#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "k3glue/alf_models.hpp"
#include "k3glue/quadrature.hpp"
#include "k3glue/radial.hpp"

using namespace k3glue;

TEST_CASE("model samples: flat case, arithmetic, SU(2) identity")
{
    AsymptoticModel flat;
    flat.k = 0;
    const GhSampleData d0 = model_sample(flat, Vector3(0.3, 0.4, 0.5));
    CHECK(d0.h == doctest::Approx(1.0));
    CHECK(d0.metric(0, 0) == doctest::Approx(1.0));

    AsymptoticModel m1;
    m1.k = 1;
    CHECK(model_sample(m1, Vector3(0.5, 0.0, 0.0)).h == doctest::Approx(2.0));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int t = 0; t < 40; ++t) {
        Vector3 x(dist(rng), dist(rng), dist(rng));
        if (x.norm() < 0.3) continue;
        AsymptoticModel m;
        m.k = (t % 6) - 1;
        if (!(m.h(x.norm()) > 0.0)) continue;
        const GhSampleData d = model_sample(m, x);
        const IntersectionData q = intersection_matrix(d.triple);
        CHECK((q.Q_normalized - Matrix3::Identity()).norm() < 1e-12);
    }

    AsymptoticModel neg;
    neg.k = -1;
    CHECK_THROWS_AS(model_sample(neg, Vector3(0.1, 0.0, 0.0)), GeometryError);
}

TEST_CASE("multi-taub-nut samples: single pole equals the model, superposition, harmonicity")
{
    MultiTaubNut single;
    single.poles = {{Vector3::Zero(), 1.0}};
    AsymptoticModel m1;
    m1.k = 1;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int t = 0; t < 20; ++t) {
        Vector3 x(dist(rng), dist(rng), dist(rng));
        if (x.norm() < 0.4) continue;
        CHECK(multi_tn_sample(single, x).h == doctest::Approx(model_sample(m1, x).h));
    }

    MultiTaubNut two;
    two.poles = {{Vector3(1, 0, 0), 1.0}, {Vector3(-1, 0, 0), 1.0}};
    CHECK(multi_tn_sample(two, Vector3::Zero()).h == doctest::Approx(2.0));

    // Closed form is harmonic: FD Laplacian residual, one Richardson step.
    const PolePotential pot = multi_tn_potential(two);
    const Vector3 probe(0.7, 0.9, -0.4);
    auto lap = [&](double step) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            Vector3 dx = Vector3::Zero();
            dx[i] = step;
            acc += (pot.sample(probe + dx).h - 2.0 * pot.sample(probe).h +
                    pot.sample(probe - dx).h) /
                   (step * step);
        }
        return acc;
    };
    CHECK(std::abs((4.0 * lap(5e-4) - lap(1e-3)) / 3.0) < 1e-8);

    CHECK_THROWS_AS(multi_tn_sample(two, Vector3(1, 0, 0)), SingularityError);
}

TEST_CASE("decay exponent: centered pair O(r^-3), translated O(r^-2), degenerate flagged")
{
    AsymptoticModel g2;
    g2.k = 2;
    const auto& rays = eight_ray_design();

    SUBCASE("centered two poles")
    {
        MultiTaubNut mtn;
        mtn.poles = {{Vector3(1, 0, 0), 1.0}, {Vector3(-1, 0, 0), 1.0}};
        const DecayFit fit = decay_exponent(mtn, g2, rays, 20.0, 200.0);
        CHECK_FALSE(fit.degenerate);
        CHECK(fit.exponent == doctest::Approx(3.0).epsilon(0.1));
    }
    SUBCASE("translated poles show the dipole rate")
    {
        MultiTaubNut mtn;
        mtn.poles = {{Vector3(6, 0, 0), 1.0}, {Vector3(4, 0, 0), 1.0}};
        const DecayFit fit = decay_exponent(mtn, g2, rays, 20.0, 200.0);
        CHECK_FALSE(fit.degenerate);
        CHECK(fit.exponent == doctest::Approx(2.0).epsilon(0.15));
    }
    SUBCASE("single centered pole is degenerate")
    {
        MultiTaubNut mtn;
        mtn.poles = {{Vector3::Zero(), 1.0}};
        AsymptoticModel g1;
        g1.k = 1;
        const DecayFit fit = decay_exponent(mtn, g1, rays, 20.0, 200.0);
        CHECK(fit.degenerate);
        CHECK(fit.max_difference < 1e-13);
    }
    SUBCASE("weight mismatch rejected")
    {
        MultiTaubNut mtn;
        mtn.poles = {{Vector3::Zero(), 1.0}};
        CHECK_THROWS_AS(decay_exponent(mtn, g2, rays, 20.0, 200.0), GeometryError);
    }
    SUBCASE("translation covariance: moving poles and ray center together changes nothing")
    {
        MultiTaubNut a;
        a.poles = {{Vector3(1, 0.2, 0), 1.0}, {Vector3(-1, -0.2, 0), 1.0}};
        const DecayFit fa = decay_exponent(a, g2, rays, 25.0, 150.0);
        const Vector3 shift(2.5, -1.0, 0.75);
        MultiTaubNut b = a;
        for (auto& [p, k] : b.poles) p += shift;
        const DecayFit fb = decay_exponent(b, g2, rays, 25.0, 150.0, 12, shift);
        CHECK(std::abs(fa.exponent - fb.exponent) < 1e-10);
        for (std::size_t r = 0; r < fa.ray_slopes.size(); ++r)
            CHECK(std::abs(fa.ray_slopes[r] - fb.ray_slopes[r]) < 1e-10);
    }
}

TEST_CASE("radial gauge potentials: exactness, linearity, decay guard")
{
    // Closed-form check: a = f(rho)(x1 dx2 - x2 dx1) with f = rho^{-4} is in
    // radial gauge; eta = da has dual vector curl(a).
    auto a_exact = [](const Vector3& y) {
        const double f = std::pow(y.norm(), -4.0);
        return Vector3(-f * y[1], f * y[0], 0.0);
    };
    auto eta_dual = [](const Vector3& y) {
        const double rho = y.norm();
        const double f = std::pow(rho, -4.0);
        const double fp_over = -4.0 * std::pow(rho, -6.0);  // f'(rho)/rho
        // curl of f(rho) (-y2, y1, 0)
        return Vector3(-y[0] * y[2] * fp_over, -y[1] * y[2] * fp_over,
                       2.0 * f + (y[0] * y[0] + y[1] * y[1]) * fp_over);
    };

    RadialPotentialParams rp;
    rp.mode = RadialMode::FromInfinity;
    rp.rho_far = 400.0;
    rp.decay_order = 0.0;  // measured
    rp.check_decay = true;
    const RadialGaugePotential pot(eta_dual, Vector3::Zero(), rp);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Vector3 dir(dist(rng), dist(rng), dist(rng));
        if (dir.norm() < 0.3) continue;
        dir.normalize();
        for (double rho : {1.0, 2.5, 6.0}) {
            const Vector3 got = pot.evaluate(rho, dir);
            const Vector3 expect = a_exact(rho * dir);
            CHECK((got - expect).norm() < 1e-8 * (1.0 + expect.norm()));
        }
    }

    // eta = 0 -> a = 0 and linearity in the field.
    const RadialGaugePotential zero([](const Vector3&) { return Vector3::Zero(); },
                                    Vector3::Zero(), rp);
    CHECK(zero.evaluate(2.0, Vector3::UnitX()).norm() == 0.0);
    auto doubled = [&](const Vector3& y) { return (2.0 * eta_dual(y)).eval(); };
    const RadialGaugePotential pot2(doubled, Vector3::Zero(), rp);
    const Vector3 d = Vector3(0.3, -0.5, 0.81).normalized();
    CHECK((pot2.evaluate(2.0, d) - 2.0 * pot.evaluate(2.0, d)).norm() < 1e-10);

    // A field decaying like rho^{-2} has no bounded radial potential.
    auto shallow = [](const Vector3& y) -> Vector3 {
        const double rho = y.norm();
        return Vector3(y[1], -y[0], 0.5 * rho) / (rho * rho * rho);
    };
    const RadialGaugePotential bad(shallow, Vector3::Zero(), rp);
    CHECK_THROWS_AS(bad.evaluate(2.0, Vector3::UnitZ()), AccuracyError);
}

TEST_CASE("dihedral invariance: symmetric data exact, asymmetric data flagged")
{
    std::vector<Vector3> probes;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    while (probes.size() < 10) {
        Vector3 x(dist(rng), dist(rng), dist(rng));
        if (x.norm() > 0.5) probes.push_back(x);
    }

    MultiTaubNut sym;
    sym.poles = {{Vector3(1, 0.3, -0.2), 1.0}, {Vector3(-1, -0.3, 0.2), 1.0}};
    CHECK(dihedral_invariance_residual(multi_tn_potential(sym), probes) < 1e-12);

    AsymptoticModel even;
    even.k = 2;
    even.dihedral = true;
    even.m = 3;
    CHECK(dihedral_invariance_residual(model_potential(even), probes) < 1e-13);

    MultiTaubNut asym;
    asym.poles = {{Vector3(1, 0, 0), 1.0}, {Vector3(-0.5, 0.3, 0), 1.0}};
    CHECK(dihedral_invariance_residual(multi_tn_potential(asym), probes) > 1e-4);
}

TEST_CASE("topology tables")
{
    const TopologyRow a2 = topology_table({ALFKind::Cyclic, 2});
    CHECK(a2.b2 == 2);
    CHECK(a2.chi == 3);
    CHECK(a2.dim_moduli == 6);

    const TopologyRow am1 = topology_table({ALFKind::Cyclic, -1});
    CHECK(am1.pi1 == "Z");
    CHECK(am1.chi == 0);

    const TopologyRow d0 = topology_table({ALFKind::Dihedral, 0});
    CHECK(d0.pi1 == "Z2");
    CHECK(d0.chi == 1);
    CHECK(d0.dim_moduli == 0);

    const TopologyRow d3 = topology_table({ALFKind::Dihedral, 3});
    CHECK(d3.chi == 4);
    CHECK(d3.dim_moduli == 9);

    CHECK_THROWS_AS(topology_table({ALFKind::Cyclic, -2}), GeometryError);
    CHECK_THROWS_AS(topology_table({ALFKind::Dihedral, -1}), GeometryError);
}

TEST_CASE("euler characteristic 24 and 58 parameters for balanced configurations")
{
    SUBCASE("Kummer")
    {
        const auto c = euler_and_parameters({2, 2, 2, 2, 2, 2, 2, 2}, {});
        CHECK(c.chi == 24);
        CHECK(c.parameters == 58);
    }
    SUBCASE("four heavy pairs")
    {
        std::vector<PairSpec> pairs(4);
        pairs[0] = {Vector3(0.1, 0.2, 0.3), 4};
        pairs[1] = {Vector3(0.2, 0.4, 0.1), 4};
        pairs[2] = {Vector3(0.3, 0.1, 0.2), 4};
        pairs[3] = {Vector3(0.4, 0.3, 0.4), 4};
        const auto c = euler_and_parameters({0, 0, 0, 0, 0, 0, 0, 0}, pairs);
        CHECK(c.chi == 24);
        CHECK(c.parameters == 58);
    }
    SUBCASE("randomized balanced suite agrees with the table arithmetic")
    {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 200; ++trial) {
            std::array<int, 8> m{};
            int budget = 16;
            for (int j = 0; j < 8; ++j) {
                std::uniform_int_distribution<int> d(0, std::min(4, budget));
                m[j] = d(rng);
                budget -= m[j];
            }
            std::vector<PairSpec> pairs;
            int idx = 0;
            while (budget > 0) {
                std::uniform_int_distribution<int> d(1, budget);
                const int k = d(rng);
                pairs.push_back({Vector3(0.05 + 0.11 * idx, 0.21, 0.33), k});
                budget -= k;
                ++idx;
            }
            const auto c = euler_and_parameters(m, pairs);
            CHECK(c.chi == 24);
            CHECK(c.parameters == 58);
            // Cross-check against the topology tables.
            int chi_tables = 0;
            for (int j = 0; j < 8; ++j)
                chi_tables += topology_table({ALFKind::Dihedral, m[j]}).chi;
            for (const auto& p : pairs)
                chi_tables += topology_table({ALFKind::Cyclic, p.weight - 1}).chi;
            CHECK(chi_tables == 24);
        }
    }
    SUBCASE("unbalanced rejected")
    {
        CHECK_THROWS_AS(euler_and_parameters({2, 2, 2, 2, 2, 2, 2, 3}, {}), GeometryError);
    }
}
