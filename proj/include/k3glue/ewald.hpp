#pragma once

/// Ewald-split evaluation of the periodic Green's function G on a flat
/// 3-torus, normalized so that
///     Delta G = -2*pi*(delta_0 - 1/volume),   G(x) ~ 1/(2|x|) near 0,
/// with the additive constant fixed by zero mean over the torus. In this
/// normalization a unit charge carries flux 1 through small spheres and the
/// singular coefficient is c/(2 rho) for charge c.
///
/// The split is the classical one: a Gaussian-screened real-space sum plus a
/// reciprocal sum over dual-lattice vectors, with splitting parameter alpha.
/// Values are independent of alpha up to the tail tolerance; cutoffs are
/// chosen so both tails stay below params.tail_tol.

#include <cstdint>
#include <vector>

#include "k3glue/flat_torus.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

struct EwaldParams {
    double split = 0.0;        // alpha; 0 selects the default sqrt(pi)/V^(1/3)
    double real_cutoff = 0.0;  // 0 selects automatically from tail_tol
    double reciprocal_cutoff = 0.0;
    double tail_tol = 1e-13;
};

struct GreenEval {
    double g = 0.0;
    Vector3 grad = Vector3::Zero();
    Matrix3 hess = Matrix3::Zero();
};

struct ReciprocalTerm {
    Vector3 k;
    double coeff;  // (2*pi/V) * exp(-|k|^2/(4 alpha^2)) / |k|^2
};

class Ewald {
public:
    explicit Ewald(const FlatTorus& torus, const EwaldParams& params = {});

    /// Rebuild from serialized tables (cache path); the blob layout is
    /// [alpha, r_cut, k_cut, n_shifts, n_recip, shifts..., (k, coeff)...].
    static Ewald from_blob(const FlatTorus& torus, const std::vector<double>& blob);
    std::vector<double> to_blob() const;

    /// Green's function at the ambient displacement implied by fractional x.
    /// derivs in {0,1,2}; throws SingularityError within
    /// 1e-9 * inj_radius of a lattice point.
    GreenEval green(const Vector3& frac, int derivs = 2) const;

    const FlatTorus& torus() const { return torus_; }
    double split() const { return alpha_; }
    double real_cutoff() const { return r_cut_; }
    double reciprocal_cutoff() const { return k_cut_; }
    double self_constant() const { return self_const_; }  // the -pi/(2 V alpha^2) term

    /// Lattice image shifts (ambient) reaching real_cutoff plus a cell margin,
    /// sorted by length; shared with superposition evaluators.
    const std::vector<Vector3>& shifts() const { return shifts_; }
    const std::vector<ReciprocalTerm>& reciprocal() const { return recip_; }

    /// Screened real-space kernel erfc(alpha r)/(2 r) and its first two radial
    /// derivative combinations, exposed for superposition loops.
    void real_kernel(double r, double& f, double& fp_over_r, double& fpp) const;

    /// Content hash of (basis, alpha, cutoffs, tolerance); cache key material.
    std::uint64_t table_hash() const;

private:
    FlatTorus torus_;
    double alpha_ = 0.0;
    double r_cut_ = 0.0;
    double k_cut_ = 0.0;
    double self_const_ = 0.0;
    double margin_ = 0.0;
    std::vector<Vector3> shifts_;
    std::vector<ReciprocalTerm> recip_;

    void build_tables();
};

} // namespace k3glue
