#include "k3glue/charge_config.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace k3glue {

namespace {

std::string format_frac(const Vector3& p)
{
    std::ostringstream os;
    os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ")";
    return os.str();
}

} // namespace

Vector3 ChargeConfig::fixed_point(int j)
{
    return Vector3(0.5 * (j & 1), 0.5 * ((j >> 1) & 1), 0.5 * ((j >> 2) & 1));
}

BalanceReport ChargeConfig::check_balancing(const FlatTorus& torus,
                                            const std::array<int, 8>& m,
                                            const std::vector<PairSpec>& pairs)
{
    BalanceReport rep;
    int sum = 0;
    for (int j = 0; j < 8; ++j) {
        if (m[j] < 0) rep.violations.push_back("dihedral weight m_" + std::to_string(j) + " is negative");
        sum += m[j];
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].weight < 1)
            rep.violations.push_back("pair weight k_" + std::to_string(i + 1) + " must be >= 1");
        sum += pairs[i].weight;
    }
    rep.weight_sum = sum;
    if (sum != 16)
        rep.violations.push_back("balancing failed: sum of weights is " + std::to_string(sum) +
                                 ", expected 16");

    // Positional constraints. Collect all punctures and demand pairwise
    // distinctness modulo the lattice; a pair position may not sit on a
    // half-lattice point (that would merge it with a fixed point or make it
    // self-paired).
    const double tol = 1e-9 * torus.inj_radius();
    std::vector<Vector3> pos;
    for (int j = 0; j < 8; ++j) pos.push_back(fixed_point(j));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const Vector3 p = FlatTorus::wrap_fractional(pairs[i].position);
        const Vector3 q = FlatTorus::wrap_fractional(-pairs[i].position);
        if (torus.distance(p, q) < tol)
            rep.violations.push_back("pair " + std::to_string(i + 1) + " at " + format_frac(p) +
                                     " coincides with its involution image");
        pos.push_back(p);
        pos.push_back(q);
    }
    for (std::size_t a = 0; a < pos.size(); ++a)
        for (std::size_t b = a + 1; b < pos.size(); ++b) {
            // Skip the p vs -p comparison already reported above.
            if (a >= 8 && b == a + 1 && (a - 8) % 2 == 0) continue;
            if (torus.distance(pos[a], pos[b]) < tol)
                rep.violations.push_back("punctures " + std::to_string(a) + " and " +
                                         std::to_string(b) + " coincide at " + format_frac(pos[a]));
        }

    rep.valid = rep.violations.empty();
    return rep;
}

ChargeConfig::ChargeConfig(const FlatTorus& torus, const std::array<int, 8>& m,
                           const std::vector<PairSpec>& pairs)
    : torus_(torus), m_(m), pairs_(pairs)
{
    const BalanceReport rep = check_balancing(torus, m, pairs);
    if (!rep.valid) {
        std::string msg = "ChargeConfig: invalid configuration:";
        for (const auto& v : rep.violations) msg += "\n  - " + v;
        throw GeometryError(msg);
    }

    for (int j = 0; j < 8; ++j)
        punctures_.push_back({PunctureKind::Dihedral, fixed_point(j), m_[j],
                              2.0 * m_[j] - 4.0, -1});
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        pairs_[i].position = FlatTorus::wrap_fractional(pairs_[i].position);
        const int a = static_cast<int>(punctures_.size());
        punctures_.push_back({PunctureKind::Cyclic, pairs_[i].position, pairs_[i].weight,
                              static_cast<double>(pairs_[i].weight), a + 1});
        punctures_.push_back({PunctureKind::Cyclic,
                              FlatTorus::wrap_fractional(-pairs_[i].position), pairs_[i].weight,
                              static_cast<double>(pairs_[i].weight), a});
    }

    double min_sep = std::numeric_limits<double>::max();
    for (std::size_t a = 0; a < punctures_.size(); ++a)
        for (std::size_t b = a + 1; b < punctures_.size(); ++b)
            min_sep = std::min(min_sep, torus_.distance(punctures_[a].position,
                                                        punctures_[b].position));
    rho0_ = std::min(torus_.inj_radius() / 4.0, 0.5 * min_sep);
}

bool ChargeConfig::all_charges_zero() const
{
    if (!pairs_.empty()) return false;
    for (int j = 0; j < 8; ++j)
        if (m_[j] != 2) return false;
    return true;
}

double ChargeConfig::nearest_puncture(const Vector3& frac, int* index) const
{
    double best = std::numeric_limits<double>::max();
    int best_i = -1;
    for (std::size_t i = 0; i < punctures_.size(); ++i) {
        const double d = torus_.distance(frac, punctures_[i].position);
        if (d < best) {
            best = d;
            best_i = static_cast<int>(i);
        }
    }
    if (index) *index = best_i;
    return best;
}

} // namespace k3glue
