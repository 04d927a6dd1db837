#pragma once

/// Puncture configuration on the flat 3-torus: the 8 half-lattice fixed
/// points of the involution with non-negative weights m_j, plus n symmetric
/// pairs +-p_i with weights k_i >= 1. The balancing condition
///     sum m_j + sum k_i = 16
/// is equivalent to total charge zero with charges 2*m_j - 4 at fixed points
/// and k_i at each of +-p_i.

#include <array>
#include <string>
#include <vector>

#include "k3glue/flat_torus.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

enum class PunctureKind { Dihedral, Cyclic };

struct Puncture {
    PunctureKind kind;
    Vector3 position;  // fractional coordinates in [0,1)^3
    int weight;        // m_j for dihedral, k_i for cyclic
    double charge;     // 2*m_j - 4 or k_i
    int pair_index;    // for cyclic: index of the partner puncture; -1 for dihedral
};

struct BalanceReport {
    bool valid = false;
    int weight_sum = 0;  // sum m_j + sum k_i
    std::vector<std::string> violations;
};

struct PairSpec {
    Vector3 position;  // fractional coordinates of p_i; the partner -p_i is implicit
    int weight;        // k_i >= 1
};

class ChargeConfig {
public:
    /// dihedral_weights: the 8 values m_j ordered by the binary index of the
    /// half-lattice point ((b0,b1,b2) -> (b0/2, b1/2, b2/2)).
    ChargeConfig(const FlatTorus& torus, const std::array<int, 8>& dihedral_weights,
                 const std::vector<PairSpec>& pairs);

    static BalanceReport check_balancing(const FlatTorus& torus,
                                         const std::array<int, 8>& dihedral_weights,
                                         const std::vector<PairSpec>& pairs);

    static Vector3 fixed_point(int j);  // fractional coords of q_j

    const FlatTorus& torus() const { return torus_; }
    const std::array<int, 8>& dihedral_weights() const { return m_; }
    const std::vector<PairSpec>& pairs() const { return pairs_; }

    /// All punctures: the 8 fixed points first (j = 0..7), then p_1, -p_1,
    /// p_2, -p_2, ...
    const std::vector<Puncture>& punctures() const { return punctures_; }

    int n_pairs() const { return static_cast<int>(pairs_.size()); }
    bool all_charges_zero() const;  // the Kummer case: every m_j = 2, n = 0

    /// min(inj_radius / 4, half the minimum distance between distinct punctures).
    double rho0() const { return rho0_; }

    /// Distance from a fractional point to the nearest puncture, and its index.
    double nearest_puncture(const Vector3& frac, int* index = nullptr) const;

private:
    FlatTorus torus_;
    std::array<int, 8> m_{};
    std::vector<PairSpec> pairs_;
    std::vector<Puncture> punctures_;
    double rho0_ = 0.0;
};

} // namespace k3glue
