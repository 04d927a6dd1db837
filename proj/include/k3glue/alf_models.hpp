#pragma once

/// Asymptotic ALF models on the circle bundles H^k, multi-Taub-NUT spaces,
/// decay-exponent measurement against the model metric, the simultaneous
/// involution check for dihedral data, and the topology / parameter-count
/// tables of the cyclic and dihedral families.

#include <string>
#include <vector>

#include "k3glue/charge_config.hpp"
#include "k3glue/gh_geometry.hpp"
#include "k3glue/triple.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

struct AsymptoticModel {
    int k = 0;              // Chern number of H^k
    double lambda = 1.0;    // fiber normalization; 1 by convention
    bool dihedral = false;  // true: Z2 quotient of H^{2m-4}
    int m = 0;              // recorded dihedral index when dihedral

    double h(double rho) const { return lambda + 0.5 * k / rho; }
};

struct MultiTaubNut {
    std::vector<std::pair<Vector3, double>> poles;  // (position, integer weight >= 1)
    double lambda = 1.0;
    Vector3 ell = Vector3::Zero();  // optional linear perturbation

    int total_weight() const;
};

struct GhSampleData {
    double h = 0.0;
    TwoFormTriple triple;          // canonical GH chart, fiber scale 1
    Matrix4 metric = Matrix4::Zero();  // chart order (dx1, dx2, dx3, theta)
};

/// GH data of the model h = lambda + k/(2 rho) at x (bubble scale eps = 1).
GhSampleData model_sample(const AsymptoticModel& model, const Vector3& x);

/// GH data of the multi-Taub-NUT potential at x.
GhSampleData multi_tn_sample(const MultiTaubNut& mtn, const Vector3& x);

/// GhPotential adapters for the curvature / operator machinery.
PolePotential model_potential(const AsymptoticModel& model);
PolePotential multi_tn_potential(const MultiTaubNut& mtn);

struct DecayFit {
    double exponent = 0.0;  // -mean per-ray slope of log||g_mtn - g_model||
    double spread = 0.0;    // max - min per-ray slope
    std::vector<double> ray_slopes;
    double max_difference = 0.0;
    bool degenerate = false;  // metric difference at numerical zero
};

/// Frobenius norm of the metric difference in the model's orthonormal
/// (dx, theta)-frame, including the connection difference in radial gauge,
/// fitted against rho along rays from `center` (the model sits at `center`).
DecayFit decay_exponent(const MultiTaubNut& mtn, const AsymptoticModel& model,
                        const std::vector<Vector3>& rays, double rho_min, double rho_max,
                        int n_rho = 12, const Vector3& center = Vector3::Zero());

/// Max discrepancy of (h, grad h, triple coefficients) under the simultaneous
/// involution (x, fiber) -> (-x, -fiber) over the probe set.
double dihedral_invariance_residual(const GhPotential& pot, const std::vector<Vector3>& probes);

enum class ALFKind { Cyclic, Dihedral };

struct ALFClass {
    ALFKind kind;
    int index;  // k >= -1 for A_k, m >= 0 for D_m
};

struct TopologyRow {
    std::string pi1;
    int b2 = 0;
    int chi = 0;
    int dim_moduli = 0;
};

/// Table row for A_k / D_m; throws GeometryError outside the index range.
TopologyRow topology_table(const ALFClass& cls);

struct EulerParameterCount {
    int chi = 0;         // sum k_i + sum m_j + 8
    int parameters = 0;  // 6 + 3n + 4 + 3 sum m_j + 3 sum (k_i - 1)
};

/// Both counts; throws GeometryError when the weights are unbalanced.
EulerParameterCount euler_and_parameters(const std::array<int, 8>& dihedral_weights,
                                         const std::vector<PairSpec>& pairs);
EulerParameterCount euler_and_parameters(const ChargeConfig& config);

} // namespace k3glue
