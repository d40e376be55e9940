#pragma once

#include <functional>
#include <vector>

namespace starris::quad {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    int intervals = 0;
};

struct AdaptiveOptions {
    double abs_tol = 1e-14;
    double rel_tol = 1e-11;
    int max_subdivisions = 2000;
};

/// One 21-point Kronrod / 10-point Gauss panel on [a, b]. The error estimate
/// uses the QUADPACK scaling; `resabs` receives the integral of |f|.
double kronrod21(const std::function<double(double)>& f, double a, double b,
                 double& abs_error, double* resabs = nullptr);

/// Globally adaptive Gauss-Kronrod on a finite interval. `breaks` are interior
/// points that seed the initial partition (discontinuities, kinks).
/// Throws ToleranceError when max_subdivisions is exhausted.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const AdaptiveOptions& opt = {},
                     const std::vector<double>& breaks = {});

/// Integral of exp(log_f) over [lo, hi] (hi may be +inf) for log-concave
/// integrands. Locates the peak, trims both sides where the integrand falls
/// below `tail_level` times the peak, and integrates the normalized remainder.
/// The result is returned in log form to survive underflow.
struct LogIntegral {
    double ln_value = 0.0;   // -inf when the integrand vanishes identically
    double rel_error = 0.0;
    double peak_at = 0.0;
    double lo_cut = 0.0;
    double hi_cut = 0.0;
    int evaluations = 0;
};

struct LogConcaveOptions {
    AdaptiveOptions adaptive{};
    double tail_level = 1e-12;
    int initial_panels = 8;
};

LogIntegral integrate_log_concave(const std::function<double(double)>& log_f, double lo,
                                  double hi, double guess, double scale,
                                  const LogConcaveOptions& opt = {});

}  // namespace starris::quad
