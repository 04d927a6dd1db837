#include "k3glue/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace k3glue {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
    LineFit f;
    f.n = static_cast<int>(x.size());
    if (f.n < 2) {
        f.degenerate = true;
        return f;
    }
    double sx = 0, sy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / f.n, my = sy / f.n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx < 1e-30) {
        f.degenerate = true;
        return f;
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (int i = 0; i < f.n; ++i) {
        const double r = std::abs(y[i] - (f.slope * x[i] + f.intercept));
        f.max_residual = std::max(f.max_residual, r);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / f.n);
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor)
{
    if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ay = std::abs(y[i]);
        if (x[i] > 0.0 && ay > floor) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(ay));
        }
    }
    return fit_line(lx, ly);
}

} // namespace k3glue
