#pragma once

/// Finite-dimensional deformation machinery: the quadratic matrix equation
///     Q A^T + A Q + A Q A^T = S   (A symmetric, the canonical branch),
/// pointwise SU(2) renormalization of near-hyperkahler triples, the abstract
/// quadratic-estimate fixed-point solver, the Dirac-type operator
/// D = d* + 2d+ of a Gibbons-Hawking metric in its invariant frame, the flat
/// 3-torus Dirac operator it collapses to, and the Fourier fiber split.

#include <functional>
#include <vector>

#include "k3glue/fit.hpp"
#include "k3glue/gh_geometry.hpp"
#include "k3glue/triple.hpp"
#include "k3glue/types.hpp"

namespace k3glue {

struct MatrixEquationProblem {
    Matrix3 Q = Matrix3::Identity();  // SPD, within sigma of the identity
    Matrix3 S = Matrix3::Zero();      // symmetric right-hand side
};

struct SolveFResult {
    Matrix3 A = Matrix3::Zero();  // symmetric solution
    double residual = 0.0;        // |Q A^T + A Q + A Q A^T - S|
    int iterations = 0;
};

/// Solve for the symmetric A with residual <= tol. Requires |Q - id| < 1/4
/// and |S| <= 1/8 (spectral norms); throws HypothesisError otherwise and
/// AccuracyError on non-convergence (with the last residual in the message).
SolveFResult solve_F(const MatrixEquationProblem& problem, double tol = 1e-13,
                     int max_iterations = 200);

/// Sylvester-type solve Q A + A Q = B for symmetric A (Q SPD), by
/// eigendecomposition of Q.
Matrix3 sylvester_symmetric(const Matrix3& Q, const Matrix3& B);

/// Recombine a definite triple into an SU(2)-structure for its associated
/// volume: w_i' = w_i + sum_j A_ij w_j with A = F(id - Q_w). The output spans
/// the same 3-plane and has intersection matrix id within tol.
TwoFormTriple pointwise_renormalize(const TwoFormTriple& triple);

struct ContractionProblem {
    // Phi(x) = phi0 + L(x) + N(x) between finite-dimensional spaces
    // represented as flat coefficient vectors.
    Eigen::VectorXd phi0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_L_inverse;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_N;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_L;  // optional, for residuals
    std::function<double(const Eigen::VectorXd&)> norm_E;  // domain norm
    std::function<double(const Eigen::VectorXd&)> norm_F;  // codomain norm
    double C = 1.0;  // bound on |L^{-1}|
    double q = 1.0;  // quadratic constant of N
    double r = 1.0;  // radius on which the N estimate holds
};

struct ContractionResult {
    Eigen::VectorXd x;
    double x_norm = 0.0;
    double residual = 0.0;          // |Phi(x)|_F
    double contraction_factor = 0.0;  // max observed step ratio
    int iterations = 0;
    std::vector<double> step_norms;
};

/// Iterate x <- -L^{-1}(phi0 + N(x)) after checking the hypothesis
/// |phi0| < min(r/(2C), 1/(4 q C^2)); the returned x satisfies
/// |x| <= 2 C |phi0| and |Phi(x)| <= tol. HypothesisError reports the violated
/// inequality; AccuracyError carries the iteration trace on divergence.
ContractionResult quadratic_ift(const ContractionProblem& problem, double tol = 1e-12,
                                int max_iterations = 200);

/// A 1-form a = eps a0 theta + a1 theta_1 + a2 theta_2 + a3 theta_3 in the
/// invariant frame of a GH metric. Components are functions of the base
/// point and optionally of the fiber angle t; derivative evaluators supply
/// base gradients and the fiber derivative.
struct GHOneForm {
    // value[c](x, t), base_gradient[c](x, t), fiber_derivative[c](x, t)
    std::array<std::function<double(const Vector3&, double)>, 4> value;
    std::array<std::function<Vector3(const Vector3&, double)>, 4> base_gradient;
    std::array<std::function<double(const Vector3&, double)>, 4> fiber_derivative;  // may be empty

    bool has_fiber_derivatives() const;
    double fiber_deriv(int c, const Vector3& x, double t) const;
};

struct DiracGhResult {
    double d_star = 0.0;             // d* a
    Vector3 two_d_plus = Vector3::Zero();  // coefficients of 2 d+ a on the GH triple
};

/// The operator display of the GH metric: requires the potential sample at x.
DiracGhResult dirac_gh(const GHOneForm& a, const GhPotential& pot, const Vector3& x,
                       double t = 0.0);

/// Flat-torus Dirac operator D0(f, gamma) = (d* gamma, df + *d gamma); inputs
/// are value/gradient evaluators of f and the three components of gamma.
struct FlatDiracInput {
    std::function<Vector3(const Vector3&)> grad_f;
    std::array<std::function<Vector3(const Vector3&)>, 3> grad_gamma;
};

struct FlatDiracResult {
    double d_star = 0.0;     // -div gamma
    Vector3 one_form = Vector3::Zero();  // df + curl gamma
};

FlatDiracResult dirac_flat_torus(const FlatDiracInput& input, const Vector3& x);

struct OperatorConvergence {
    std::vector<double> epsilons;
    std::vector<double> residuals;  // max over probes of |D_eps a - D0 a|
    LineFit fit;                    // slope of log residual vs log eps (positive exponent)
};

/// Residual between the GH operator at scale eps and the flat-torus operator
/// on S^1-invariant test forms, swept over eps. Probes must keep distance
/// >= c * eps^{(1-tau)/2} from every puncture for the largest eps.
OperatorConvergence operator_convergence(const HarmonicField& unit_field,
                                         const std::vector<double>& eps_list,
                                         const GHOneForm& a,
                                         const std::vector<Vector3>& probes_frac,
                                         double tau = 0.5, double c = 1.0);

struct FourierSplit {
    std::vector<double> invariant;    // Pi_0 part (constant vector)
    std::vector<double> oscillatory;  // Pi_perp part, per sample
    double mean = 0.0;
    double parseval_gap = 0.0;   // | |a|^2 - |Pi0|^2 - |Pi_perp|^2 |
    double poincare_ratio = 0.0; // |Pi_perp a| / ((L/2pi) |d_t a|), when derivatives given
};

/// Discrete fiber split from >= 8 equispaced samples over a fiber of length
/// fiber_length; optional derivative samples activate the oscillatory bound.
FourierSplit fourier_split(const std::vector<double>& samples, double fiber_length,
                           const std::vector<double>& derivative_samples = {});

} // namespace k3glue
