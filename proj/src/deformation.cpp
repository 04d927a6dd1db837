#include "k3glue/deformation.hpp"

#include <cmath>
#include <sstream>

#include "k3glue/errors.hpp"

namespace k3glue {

namespace {

double spectral_norm(const Matrix3& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix3> es(m.transpose() * m);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

} // namespace

Matrix3 sylvester_symmetric(const Matrix3& Q, const Matrix3& B)
{
    Eigen::SelfAdjointEigenSolver<Matrix3> es(Q);
    const Vector3 lam = es.eigenvalues();
    if (lam.minCoeff() <= 0.0)
        throw HypothesisError("sylvester_symmetric: Q must be positive definite");
    const Matrix3& U = es.eigenvectors();
    const Matrix3 Bt = U.transpose() * B * U;
    Matrix3 At;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) At(i, j) = Bt(i, j) / (lam[i] + lam[j]);
    return U * At * U.transpose();
}

SolveFResult solve_F(const MatrixEquationProblem& problem, double tol, int max_iterations)
{
    const Matrix3 sym_S = 0.5 * (problem.S + problem.S.transpose());
    const double q_dist = spectral_norm(problem.Q - Matrix3::Identity());
    if (!(q_dist < 0.25))
        throw HypothesisError("solve_F: |Q - id| must be < 1/4 (got " +
                              std::to_string(q_dist) + ")");
    const double s_norm = spectral_norm(sym_S);
    if (!(s_norm <= 0.125 + 1e-12))
        throw HypothesisError("solve_F: |S| must be <= 1/8 (got " + std::to_string(s_norm) +
                              ")");

    SolveFResult out;
    Matrix3 A = Matrix3::Zero();
    double residual = spectral_norm(sym_S);
    for (int it = 0; it < max_iterations; ++it) {
        A = sylvester_symmetric(problem.Q, sym_S - A * problem.Q * A.transpose());
        const Matrix3 res =
            problem.Q * A.transpose() + A * problem.Q + A * problem.Q * A.transpose() - sym_S;
        residual = res.norm();
        out.iterations = it + 1;
        if (residual <= tol) {
            out.A = A;
            out.residual = residual;
            return out;
        }
    }
    std::ostringstream msg;
    msg << "solve_F: no convergence after " << max_iterations
        << " iterations, last residual " << residual;
    throw AccuracyError(msg.str());
}

TwoFormTriple pointwise_renormalize(const TwoFormTriple& triple)
{
    const IntersectionData data = intersection_matrix(triple);
    MatrixEquationProblem prob;
    prob.Q = data.Q_normalized;
    prob.S = Matrix3::Identity() - data.Q_normalized;
    const SolveFResult sol = solve_F(prob);

    TwoFormTriple out = triple;
    out.coeff = (Matrix3::Identity() + sol.A) * triple.coeff;
    return out;
}

ContractionResult quadratic_ift(const ContractionProblem& problem, double tol,
                                int max_iterations)
{
    const double phi0_norm = problem.norm_F(problem.phi0);
    const double bound = std::min(problem.r / (2.0 * problem.C),
                                  1.0 / (4.0 * problem.q * problem.C * problem.C));
    if (!(phi0_norm < bound)) {
        std::ostringstream msg;
        msg << "quadratic_ift: hypothesis (iii) violated: |Phi(0)| = " << phi0_norm
            << " >= min(r/2C, 1/(4qC^2)) = " << bound;
        throw HypothesisError(msg.str());
    }

    // Hypothesis (iii) already makes the iteration a contraction with factor
    // 4 q C^2 |Phi(0)| < 1; the observed ratios are asserted against it.
    const double factor_bound = 4.0 * problem.q * problem.C * problem.C * phi0_norm;

    ContractionResult out;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.phi0.size());
    double prev_step = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        const Eigen::VectorXd next = -problem.apply_L_inverse(problem.phi0 + problem.apply_N(x));
        const double step = problem.norm_E(next - x);
        out.step_norms.push_back(step);
        out.iterations = it + 1;
        if (it > 0 && prev_step > 100.0 * tol) {
            const double ratio = step / prev_step;
            out.contraction_factor = std::max(out.contraction_factor, ratio);
            if (ratio > std::max(factor_bound * 1.25, 1e-3)) {
                std::ostringstream msg;
                msg << "quadratic_ift: observed step ratio " << ratio
                    << " exceeds the certified contraction factor " << factor_bound;
                throw AccuracyError(msg.str());
            }
        }
        x = next;
        prev_step = step;
        if (step <= tol) break;
    }
    if (out.step_norms.back() > tol) {
        std::ostringstream msg;
        msg << "quadratic_ift: divergence or stall; step norms:";
        for (double s : out.step_norms) msg << " " << s;
        throw AccuracyError(msg.str());
    }

    out.x = x;
    out.x_norm = problem.norm_E(x);
    if (problem.apply_L) {
        out.residual = problem.norm_F(problem.phi0 + problem.apply_L(x) + problem.apply_N(x));
    } else {
        // Without L itself, report the fixed-point residual
        // |x + L^{-1}(phi0 + N(x))|_E = |L^{-1} Phi(x)|_E.
        const Eigen::VectorXd fp_res =
            x + problem.apply_L_inverse(problem.phi0 + problem.apply_N(x));
        out.residual = problem.norm_E(fp_res);
    }
    if (!(out.x_norm <= 2.0 * problem.C * phi0_norm + 1e-12)) {
        std::ostringstream msg;
        msg << "quadratic_ift: conclusion bound violated: |x| = " << out.x_norm
            << " > 2C|Phi(0)| = " << 2.0 * problem.C * phi0_norm;
        throw AccuracyError(msg.str());
    }
    return out;
}

bool GHOneForm::has_fiber_derivatives() const
{
    for (const auto& f : fiber_derivative)
        if (!f) return false;
    return true;
}

double GHOneForm::fiber_deriv(int c, const Vector3& x, double t) const
{
    if (!fiber_derivative[static_cast<std::size_t>(c)]) return 0.0;
    return fiber_derivative[static_cast<std::size_t>(c)](x, t);
}

DiracGhResult dirac_gh(const GHOneForm& a, const GhPotential& pot, const Vector3& x, double t)
{
    for (int c = 0; c < 4; ++c)
        if (!a.value[static_cast<std::size_t>(c)] || !a.base_gradient[static_cast<std::size_t>(c)])
            throw HypothesisError("dirac_gh: missing component or derivative evaluator");

    const GhPotentialSample s = pot.sample(x);
    if (!(s.h > 0.0)) throw NotDefiniteError("dirac_gh: h must be positive");
    const double eps = pot.fiber_scale();
    const double h = s.h;

    std::array<Vector3, 4> grad;
    std::array<double, 4> fiber;
    for (int c = 0; c < 4; ++c) {
        grad[static_cast<std::size_t>(c)] = a.base_gradient[static_cast<std::size_t>(c)](x, t);
        fiber[static_cast<std::size_t>(c)] = a.fiber_deriv(c, x, t);
    }
    const double a0 = a.value[0](x, t);

    DiracGhResult out;
    // d* a = -h^{-1} ( sum_i xi_i.a_i + (1/eps) h^2 xi.a0 )
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) acc += grad[static_cast<std::size_t>(i + 1)][i];
    out.d_star = -(acc + h * h * fiber[0] / eps) / h;

    // 2 d+ a = sum_i [ xi_i.a0 + h^{-1}(xi_j.a_k - xi_k.a_j)
    //                  + h^{-1}(xi_i.h) a0 - (1/eps) xi.a_i ] w_i
    for (int i = 0; i < 3; ++i) {
        const int j = cyc1(i), k = cyc2(i);
        out.two_d_plus[i] = grad[0][i] +
                            (grad[static_cast<std::size_t>(k + 1)][j] -
                             grad[static_cast<std::size_t>(j + 1)][k]) / h +
                            s.grad[i] * a0 / h -
                            fiber[static_cast<std::size_t>(i + 1)] / eps;
    }
    return out;
}

FlatDiracResult dirac_flat_torus(const FlatDiracInput& input, const Vector3& x)
{
    FlatDiracResult out;
    std::array<Vector3, 3> g;
    for (int i = 0; i < 3; ++i) g[static_cast<std::size_t>(i)] = input.grad_gamma[static_cast<std::size_t>(i)](x);
    out.d_star = -(g[0][0] + g[1][1] + g[2][2]);
    const Vector3 df = input.grad_f(x);
    for (int i = 0; i < 3; ++i) {
        const int j = cyc1(i), k = cyc2(i);
        out.one_form[i] = df[i] + (g[static_cast<std::size_t>(k)][j] - g[static_cast<std::size_t>(j)][k]);
    }
    return out;
}

OperatorConvergence operator_convergence(const HarmonicField& unit_field,
                                         const std::vector<double>& eps_list,
                                         const GHOneForm& a,
                                         const std::vector<Vector3>& probes_frac,
                                         double tau, double c)
{
    if (eps_list.empty() || probes_frac.empty())
        throw HypothesisError("operator_convergence: empty inputs");
    double eps_max = 0.0;
    for (double e : eps_list) eps_max = std::max(eps_max, e);
    const double rho_min = c * std::pow(eps_max, 0.5 * (1.0 - tau));
    for (const auto& probe : probes_frac)
        if (unit_field.config().nearest_puncture(probe) < rho_min)
            throw GeometryError("operator_convergence: probe inside the excluded region "
                                "rho < c eps^{(1-tau)/2}");

    FlatDiracInput flat;
    flat.grad_f = [&a](const Vector3& x) { return a.base_gradient[0](x, 0.0); };
    for (int i = 0; i < 3; ++i)
        flat.grad_gamma[static_cast<std::size_t>(i)] = [&a, i](const Vector3& x) {
            return a.base_gradient[static_cast<std::size_t>(i + 1)](x, 0.0);
        };

    OperatorConvergence out;
    out.epsilons = eps_list;
    for (double eps : eps_list) {
        const HarmonicFieldPotential pot(unit_field, eps);
        double worst = 0.0;
        for (const auto& probe : probes_frac) {
            const Vector3 x = unit_field.torus().to_ambient(probe);
            const DiracGhResult dg = dirac_gh(a, pot, x);
            const FlatDiracResult d0 = dirac_flat_torus(flat, x);
            const double res = std::sqrt(std::pow(dg.d_star - d0.d_star, 2.0) +
                                         (dg.two_d_plus - d0.one_form).squaredNorm());
            worst = std::max(worst, res);
        }
        out.residuals.push_back(worst);
    }
    out.fit = fit_loglog(out.epsilons, out.residuals);
    return out;
}

FourierSplit fourier_split(const std::vector<double>& samples, double fiber_length,
                           const std::vector<double>& derivative_samples)
{
    const std::size_t n = samples.size();
    if (n < 8) throw HypothesisError("fourier_split: need at least 8 equispaced fiber samples");
    FourierSplit out;
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    out.mean = mean;
    out.invariant.assign(n, mean);
    out.oscillatory.resize(n);
    double total = 0.0, osc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.oscillatory[i] = samples[i] - mean;
        total += samples[i] * samples[i];
        osc += out.oscillatory[i] * out.oscillatory[i];
    }
    out.parseval_gap = std::abs(total - (static_cast<double>(n) * mean * mean + osc));

    if (!derivative_samples.empty()) {
        if (derivative_samples.size() != n)
            throw HypothesisError("fourier_split: derivative sample count mismatch");
        double d2 = 0.0;
        for (double v : derivative_samples) d2 += v * v;
        const double osc_rms = std::sqrt(osc / static_cast<double>(n));
        const double d_rms = std::sqrt(d2 / static_cast<double>(n));
        out.poincare_ratio =
            d_rms > 0.0 ? osc_rms / ((fiber_length / (2.0 * kPi)) * d_rms) : 0.0;
    }
    return out;
}

} // namespace k3glue
