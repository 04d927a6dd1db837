#pragma once

/// Assembly of the approximate hyperkahler triple on the glued manifold:
/// model harmonics at the punctures, radial-gauge correction potentials,
/// log-scale cutoffs, the five-region dispatch, transition-error sweeps, the
/// weight function and discrete weighted norms, and the collapse profile.
///
/// Representation: near a puncture all 2-forms are written against the model
/// connection slot in the canonical GH chart; corrections are basic forms
/// determined by pairs (b, dh) via
///     eta_i = dx_i ^ (b . dx) + dh dx_j ^ dx_k,
/// where b is the radial-gauge potential of *d(dh). The cyclic interior is an
/// exact multi-Taub-NUT cluster; the dihedral interior carries a synthetic,
/// exactly-harmonic quadrupole perturbation realizing the prescribed decay.

#include <optional>
#include <vector>

#include "k3glue/charge_config.hpp"
#include "k3glue/fit.hpp"
#include "k3glue/harmonic_field.hpp"
#include "k3glue/triple.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

/// Cutoff chi(rho): 1 below eps^{2/5}, 0 above 2 eps^{2/5}, quintic
/// smoothstep in log2(rho / eps^{2/5}) in between.
struct CutoffProfile {
    double epsilon = 0.0;
    double inner = 0.0;  // eps^{2/5}
    double outer = 0.0;  // 2 eps^{2/5}

    explicit CutoffProfile(double eps);
    double value(double rho) const;
    double derivative(double rho) const;
    /// sup |rho chi'| = 15 / (8 ln 2), independent of eps.
    static double log_slope_bound();
};

/// Weight function rho_eps: eps near the punctures, rho in the annuli, 1 far
/// away, with smooth monotone log-scale interpolation.
class WeightFunction {
public:
    WeightFunction(double eps, double R0, double rho0);

    double epsilon() const { return eps_; }
    double R0() const { return R0_; }
    double rho0() const { return rho0_; }

    /// Single-puncture profile as a function of the distance rho.
    double profile(double rho) const;

    /// Global weight at a fractional torus point: min over punctures.
    double value(const ChargeConfig& config, const Vector3& frac) const;

private:
    double eps_, R0_, rho0_;
};

struct WeightedSample {
    double rho_eps = 1.0;
    double value = 0.0;
    std::vector<double> derivatives;  // |nabla^j a|, j = 1..k (optional)
};

/// Discrete weighted norm max rho_eps^{-delta+j} |nabla^j a| over samples.
double weighted_norm(const std::vector<WeightedSample>& samples, double delta);

/// Local model harmonic at a puncture: (1 + eps*lambda) + eps*c/(2 rho)
/// [+ eps * ell . y for cyclic punctures].
struct ModelHarmonic {
    int puncture = -1;
    double charge = 0.0;
    double lambda = 0.0;
    Vector3 ell = Vector3::Zero();
    double eps = 0.0;

    double value(const Vector3& y) const;
    Vector3 gradient(const Vector3& y) const;
};

struct PunctureLocal {
    Puncture puncture;
    RegularPartData regular;
    std::vector<Vector3> cluster;  // unit-scale pole offsets (cyclic only)
};

/// epsilon-independent glued-structure data: the harmonic field (unit eps),
/// regular parts, cyclic pole clusters and the synthetic dihedral profile.
class GluedStructure {
public:
    explicit GluedStructure(const ChargeConfig& config, int threads = 1,
                            const EwaldParams& params = {});
    GluedStructure(const ChargeConfig& config, std::vector<RegularPartData> regular_parts);
    /// Cache path: prebuilt Ewald tables and optional regular parts.
    GluedStructure(const ChargeConfig& config, std::shared_ptr<const Ewald> ewald,
                   std::optional<std::vector<RegularPartData>> regular_parts, int threads);

    const ChargeConfig& config() const { return config_; }
    const HarmonicField& unit_field() const { return *unit_field_; }
    const PunctureLocal& local(int puncture) const
    {
        return locals_[static_cast<std::size_t>(puncture)];
    }
    int n_punctures() const { return static_cast<int>(locals_.size()); }

    double R0 = 16.0;
    bool synthetic_dihedral = true;
    double synthetic_coefficient = 2.0 / 3.0;  // keeps |a_syn| <= eps^3 rho^{-2}

    /// Admissibility-checked model harmonic; throws HypothesisError when
    /// 1 + eps*lambda leaves (1/2, 3/2) or when eps*R0 > rho0/8.
    ModelHarmonic model_harmonic(int puncture, double eps) const;

    /// ALF-side harmonic perturbation delta_h at relative ambient offset y.
    double delta_h_alf(int puncture, double eps, const Vector3& y) const;
    Vector3 grad_delta_h_alf(int puncture, double eps, const Vector3& y) const;

    /// Background-side delta_h = h_eps - h_model at relative offset y.
    double delta_h_background(int puncture, double eps, const Vector3& y) const;
    Vector3 grad_delta_h_background(int puncture, double eps, const Vector3& y) const;

private:
    ChargeConfig config_;
    std::shared_ptr<const HarmonicField> unit_field_;
    std::vector<PunctureLocal> locals_;

    void build_locals(std::optional<std::vector<RegularPartData>> regs, int threads);
};

/// Unit-scale pole offsets for a cyclic cluster of the given weight; the set
/// is symmetric under y -> -y so tau-equivariance is automatic.
std::vector<Vector3> cyclic_cluster_offsets(int weight);

enum class Region { Far = 0, Transition = 1, CyclicInterior = 2, DihedralInterior = 3 };

struct AssembledSample {
    Region region = Region::Far;
    int puncture = -1;  // governing puncture; -1 in the far region
    double rho = 0.0;
    double chi = 0.0;
    TwoFormTriple triple;  // canonical GH chart representation
    Matrix3 Q_normalized = Matrix3::Identity();
    double q_error = 0.0;  // |Q_normalized - id|_F
};

/// Region-dispatched assembled triple at a fractional torus point.
AssembledSample assemble_triple(const GluedStructure& glued, double eps, const Vector3& frac);

struct AnnulusGrid {
    int n_dir = 256;
    int n_rho = 16;
};

struct TransitionErrorResult {
    double sup_q_error = 0.0;
    int argmax_puncture = -1;
    double argmax_rho = 0.0;
    Vector3 argmax_dir = Vector3::UnitX();
    std::vector<double> per_puncture_sup;
    std::vector<double> per_puncture_rho;  // radius of each puncture's supremum
    bool all_definite = true;
};

/// Supremum of |Q_eps - id| over all transition annuli, sampled on
/// n_dir x n_rho per annulus. Throws NotDefiniteError (with the offending
/// point) when a sample fails definiteness.
TransitionErrorResult transition_error(const GluedStructure& glued, double eps,
                                       const AnnulusGrid& grid, int threads = 1);

struct ErrorSweepResult {
    std::vector<double> epsilons;
    std::vector<double> sup_errors;
    std::vector<TransitionErrorResult> details;
    LineFit fit;  // slope of log sup|Q - id| against log eps
};

/// Requires at least 4 epsilon values.
ErrorSweepResult error_sweep(const GluedStructure& glued, std::vector<double> eps_list,
                             const AnnulusGrid& grid, int threads = 1);

struct CollapseProfileResult {
    std::vector<double> epsilons;
    std::vector<double> sup_h;         // sup_{rho >= eps^beta} |h_eps - 1|
    std::vector<double> sup_rho_grad;  // sup rho |grad (h_eps - 1)|
    LineFit fit_h;                     // eps-exponent (slope of log-log)
    LineFit fit_grad;
    bool trivial = false;  // Kummer: identically zero
};

CollapseProfileResult collapse_profile(const GluedStructure& glued,
                                       const std::vector<double>& eps_list, double beta,
                                       int grid_n = 32, int threads = 1);

} // namespace k3glue
