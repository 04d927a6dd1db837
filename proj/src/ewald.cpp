#include "k3glue/ewald.hpp"

#include <algorithm>
#include <cmath>

#include "k3glue/errors.hpp"

namespace k3glue {

namespace {

constexpr double kTwoOverSqrtPi = 1.1283791670955126;

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

Ewald::Ewald(const FlatTorus& torus, const EwaldParams& params) : torus_(torus)
{
    const double volume = torus.volume();
    alpha_ = params.split > 0.0 ? params.split : std::sqrt(kPi) / std::cbrt(volume);

    const double tol = params.tail_tol;

    if (params.real_cutoff > 0.0) {
        r_cut_ = params.real_cutoff;
        if (0.5 * std::erfc(alpha_ * r_cut_) / r_cut_ > tol)
            throw AccuracyError("Ewald: real-space cutoff too small for tail tolerance");
    } else {
        double eta = 3.0;
        while (0.5 * std::erfc(eta) * alpha_ / eta > 0.01 * tol && eta < 10.0) eta += 0.25;
        r_cut_ = eta / alpha_;
    }

    if (params.reciprocal_cutoff > 0.0) {
        k_cut_ = params.reciprocal_cutoff;
        const double c = (2.0 * kPi / volume) * std::exp(-0.25 * k_cut_ * k_cut_ / (alpha_ * alpha_));
        if (c * (1.0 + k_cut_ * k_cut_) > tol)
            throw AccuracyError("Ewald: reciprocal cutoff too small for tail tolerance");
    } else {
        double eta = 3.0;
        while ((2.0 * kPi / volume) * std::exp(-eta * eta) *
                   (1.0 + 4.0 * alpha_ * alpha_ * eta * eta) > 0.01 * tol && eta < 10.0)
            eta += 0.25;
        k_cut_ = 2.0 * alpha_ * eta;
    }

    self_const_ = -kPi / (2.0 * volume * alpha_ * alpha_);
    build_tables();
}

void Ewald::build_tables()
{
    const Matrix3& basis = torus_.basis();
    const Matrix3& dual = torus_.dual_basis();

    // Evaluation points are reduced to coefficients in [-1/2, 1/2); their
    // ambient norm is bounded by half the sum of the generator lengths.
    margin_ = 0.5 * (basis.col(0).norm() + basis.col(1).norm() + basis.col(2).norm());
    const double reach = r_cut_ + margin_;

    int range[3];
    for (int i = 0; i < 3; ++i)
        range[i] = static_cast<int>(std::ceil(reach * dual.col(i).norm())) + 1;

    shifts_.clear();
    for (int n0 = -range[0]; n0 <= range[0]; ++n0)
        for (int n1 = -range[1]; n1 <= range[1]; ++n1)
            for (int n2 = -range[2]; n2 <= range[2]; ++n2) {
                const Vector3 v = basis * Vector3(n0, n1, n2);
                if (v.norm() <= reach) shifts_.push_back(v);
            }
    std::sort(shifts_.begin(), shifts_.end(), [](const Vector3& a, const Vector3& b) {
        const double na = a.squaredNorm(), nb = b.squaredNorm();
        if (na != nb) return na < nb;
        if (a[0] != b[0]) return a[0] < b[0];
        if (a[1] != b[1]) return a[1] < b[1];
        return a[2] < b[2];
    });

    int krange[3];
    for (int i = 0; i < 3; ++i)
        krange[i] = static_cast<int>(std::ceil(k_cut_ * basis.col(i).norm() / (2.0 * kPi))) + 1;

    recip_.clear();
    const double volume = torus_.volume();
    for (int m0 = -krange[0]; m0 <= krange[0]; ++m0)
        for (int m1 = -krange[1]; m1 <= krange[1]; ++m1)
            for (int m2 = -krange[2]; m2 <= krange[2]; ++m2) {
                if (m0 == 0 && m1 == 0 && m2 == 0) continue;
                const Vector3 k = 2.0 * kPi * (dual * Vector3(m0, m1, m2));
                const double k2 = k.squaredNorm();
                if (k2 > k_cut_ * k_cut_) continue;
                const double coeff =
                    (2.0 * kPi / volume) * std::exp(-0.25 * k2 / (alpha_ * alpha_)) / k2;
                recip_.push_back({k, coeff});
            }
    std::sort(recip_.begin(), recip_.end(), [](const ReciprocalTerm& a, const ReciprocalTerm& b) {
        const double na = a.k.squaredNorm(), nb = b.k.squaredNorm();
        if (na != nb) return na < nb;
        if (a.k[0] != b.k[0]) return a.k[0] < b.k[0];
        if (a.k[1] != b.k[1]) return a.k[1] < b.k[1];
        return a.k[2] < b.k[2];
    });
}

void Ewald::real_kernel(double r, double& f, double& fp_over_r, double& fpp) const
{
    // f(r) = erfc(alpha r) / (2 r); fp_over_r = f'(r)/r; fpp = f''(r).
    const double e = std::erfc(alpha_ * r);
    const double gauss = kTwoOverSqrtPi * alpha_ * std::exp(-alpha_ * alpha_ * r * r);
    f = 0.5 * e / r;
    const double fp = -0.5 * (e / (r * r) + gauss / r);
    fp_over_r = fp / r;
    fpp = e / (r * r * r) + gauss / (r * r) + alpha_ * alpha_ * gauss;
}

GreenEval Ewald::green(const Vector3& frac, int derivs) const
{
    // Reduce to nearest-cell coefficients.
    Vector3 red;
    for (int i = 0; i < 3; ++i) red[i] = frac[i] - std::round(frac[i]);
    const Vector3 x = torus_.to_ambient(red);

    const double near = torus_.min_image(frac, Vector3::Zero()).norm();
    if (near < 1e-9 * torus_.inj_radius())
        throw SingularityError("Ewald::green: evaluation point on a lattice point");

    GreenEval out;
    for (const Vector3& s : shifts_) {
        const Vector3 d = x - s;
        const double r = d.norm();
        if (r > r_cut_) continue;
        double f, fp_over_r, fpp;
        real_kernel(r, f, fp_over_r, fpp);
        out.g += f;
        if (derivs >= 1) out.grad += fp_over_r * d;
        if (derivs >= 2) {
            const Vector3 u = d / r;
            out.hess += fpp * (u * u.transpose()) +
                        fp_over_r * (Matrix3::Identity() - u * u.transpose());
        }
    }
    for (const auto& t : recip_) {
        const double phase = t.k.dot(x);
        const double c = std::cos(phase), sn = std::sin(phase);
        out.g += t.coeff * c;
        if (derivs >= 1) out.grad += -t.coeff * sn * t.k;
        if (derivs >= 2) out.hess += -t.coeff * c * (t.k * t.k.transpose());
    }
    out.g += self_const_;
    return out;
}

std::vector<double> Ewald::to_blob() const
{
    std::vector<double> blob = {alpha_, r_cut_, k_cut_, static_cast<double>(shifts_.size()),
                                static_cast<double>(recip_.size())};
    for (const auto& s : shifts_) {
        blob.push_back(s[0]);
        blob.push_back(s[1]);
        blob.push_back(s[2]);
    }
    for (const auto& t : recip_) {
        blob.push_back(t.k[0]);
        blob.push_back(t.k[1]);
        blob.push_back(t.k[2]);
        blob.push_back(t.coeff);
    }
    return blob;
}

Ewald Ewald::from_blob(const FlatTorus& torus, const std::vector<double>& blob)
{
    if (blob.size() < 5) throw AccuracyError("Ewald::from_blob: truncated blob");
    Ewald e(torus, EwaldParams{});  // cutoffs recomputed, then overwritten
    e.alpha_ = blob[0];
    e.r_cut_ = blob[1];
    e.k_cut_ = blob[2];
    e.self_const_ = -kPi / (2.0 * torus.volume() * e.alpha_ * e.alpha_);
    const auto n_shift = static_cast<std::size_t>(blob[3]);
    const auto n_recip = static_cast<std::size_t>(blob[4]);
    if (blob.size() != 5 + 3 * n_shift + 4 * n_recip)
        throw AccuracyError("Ewald::from_blob: inconsistent blob length");
    e.shifts_.resize(n_shift);
    std::size_t at = 5;
    for (auto& s : e.shifts_) {
        s = Vector3(blob[at], blob[at + 1], blob[at + 2]);
        at += 3;
    }
    e.recip_.resize(n_recip);
    for (auto& t : e.recip_) {
        t.k = Vector3(blob[at], blob[at + 1], blob[at + 2]);
        t.coeff = blob[at + 3];
        at += 4;
    }
    return e;
}

std::uint64_t Ewald::table_hash() const
{
    std::uint64_t h = fnv1a("ewald-v1", 8);
    const Matrix3 b = torus_.basis();
    h = fnv1a(b.data(), sizeof(double) * 9, h);
    const double scalars[3] = {alpha_, r_cut_, k_cut_};
    h = fnv1a(scalars, sizeof(scalars), h);
    return h;
}

} // namespace k3glue
