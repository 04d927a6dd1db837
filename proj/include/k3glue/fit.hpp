#pragma once

/// Least-squares line fits on logarithmic axes, used for all decay-exponent
/// measurements (power laws show up as slopes).

#include <vector>

namespace k3glue {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;  // max |y - (slope*x + intercept)|
    double rms_residual = 0.0;
    int n = 0;
    bool degenerate = false;  // fewer than 2 usable points, or zero x-spread
};

/// Ordinary least squares y ~ slope*x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Fit log|y| ~ slope*log(x) + c. Points with y <= floor are dropped; if fewer
/// than two survive the fit is flagged degenerate.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                   double floor = 1e-300);

} // namespace k3glue
