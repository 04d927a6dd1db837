#pragma once

/// Periodic harmonic function h with the prescribed puncture singularities,
/// evaluated as a superposition of Ewald Green's functions, and the family
/// h_eps = 1 + eps*h. Charge neutrality (the balancing condition) makes h
/// harmonic away from the punctures; the zero-mean gauge of G pins the
/// additive constant of h.

#include <memory>
#include <vector>

#include "k3glue/charge_config.hpp"
#include "k3glue/ewald.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

struct FieldEval {
    double h = 0.0;
    Vector3 grad = Vector3::Zero();  // ambient Cartesian derivatives
    Matrix3 hess = Matrix3::Zero();
};

class HarmonicField {
public:
    HarmonicField(const ChargeConfig& config, double epsilon, const EwaldParams& params = {});
    /// Reuse prebuilt Ewald tables (cache path).
    HarmonicField(const ChargeConfig& config, double epsilon,
                  std::shared_ptr<const Ewald> ewald);

    /// h and derivatives at a fractional point. Throws SingularityError within
    /// 1e-9 * inj_radius of a charged puncture.
    FieldEval eval(const Vector3& frac, int derivs = 2) const;

    double h(const Vector3& frac) const { return eval(frac, 0).h; }
    double h_eps(const Vector3& frac) const { return 1.0 + epsilon_ * h(frac); }

    double epsilon() const { return epsilon_; }
    const ChargeConfig& config() const { return config_; }
    const FlatTorus& torus() const { return config_.torus(); }
    const Ewald& ewald() const { return *ewald_; }

    /// True when every charge vanishes (the Kummer configuration); h is then
    /// identically zero and no lattice sums run.
    bool trivial() const { return trivial_; }

private:
    ChargeConfig config_;
    double epsilon_;
    bool trivial_ = false;
    std::shared_ptr<const Ewald> ewald_;
    // Charged sources only.
    std::vector<Vector3> source_frac_;
    std::vector<double> source_charge_;
    // Reciprocal-space structure factors: sum_a q_a cos/sin(k . x_a).
    std::vector<double> sf_cos_, sf_sin_;
};

/// -(1/2pi) * surface integral of dh/dn over the sphere of radius sigma
/// around the given puncture (outward normal); equals the enclosed charge.
/// Product Gauss-Legendre quadrature with n_theta polar nodes.
double flux(const HarmonicField& field, int puncture_index, double sigma, int n_theta = 24);

struct RegularPartData {
    int puncture = -1;
    double lambda = 0.0;       // constant term of h - c/(2 rho) at the puncture
    Vector3 ell = Vector3::Zero();  // gradient of the regular part; zero at fixed points
    double lambda_spread = 0.0;     // Richardson-table consistency indicator
    double ell_bound = 0.0;         // |ell| recorded at extraction
};

/// Extract (lambda, ell) from sphere means on radii rho0 * 2^{-s}, s = 2..6,
/// Richardson-extrapolated in rho; ell from a least-squares fit of the first
/// angular harmonic. At fixed points ell is forced to zero after checking the
/// extracted gradient is below tol.
RegularPartData regular_part(const HarmonicField& field, int puncture_index,
                             int n_theta = 16, double tol = 1e-6);

struct PositivityScan {
    double eps0 = 0.0;                  // largest validated epsilon
    std::vector<double> tested;         // scan values, descending
    std::vector<char> valid;            // per scan value
    std::vector<double> min_h_eps;      // min of h_eps over the sampled complement
};

/// Dyadic scan eps in {2^-3, ..., 2^-16}: largest eps such that h_eps > 1/2 on
/// the sampled complement of the 8*eps balls around punctures with m_j in
/// {0,1}, with validity also required at every smaller scan value. Grid
/// resolution grid_n^3 plus boundary shells of the exclusion balls.
PositivityScan positivity_threshold(const ChargeConfig& config, int grid_n = 48,
                                    int threads = 1);

/// Finite-difference Laplacian of h_eps (Richardson-validated step halving).
/// This is the full numeric obstruction to closedness of the Gibbons-Hawking
/// triple under the convention d(theta) = *dh. Throws SingularityError when
/// the stencil enters a puncture's exclusion ball.
double closedness_residual(const HarmonicField& field, const Vector3& frac, double step = 0.0);

} // namespace k3glue
