#pragma once

#include "starris/rates.hpp"
#include "starris/specfun.hpp"

// Four-integral decomposition of the Case II ergodic rate.
//
// For kappa = k_p - i (i = 0 .. k_p-1) and w = tau2 + psi*Y, Y ~ Gamma(k_s, theta_s):
//   I1 = int ln(w) gamma(kappa, w) y^{k_s-1} e^{-y/theta_s} dy
//   I2 = ln(1/tau2) int gamma(kappa, w) y^{k_s-1} e^{-y/theta_s} dy
//   I3 = int w^kappa/kappa^2 2F2(kappa,kappa;kappa+1,kappa+1;-w) y^{k_s-1} e^{-y/theta_s} dy
//   I4 = 2F2(kappa,kappa;kappa+1,kappa+1;-tau2) tau2^kappa/kappa^2 Gamma(k_s) theta_s^{k_s}
// and ER2 = (1/ln 2) sum_i e^{-zeta2 tau2} (zeta2 tau2)^i / i! * (I1 + I2 - I3 + I4)(kappa)
// once every I is divided by Gamma(kappa) Gamma(k_s) theta_s^{k_s}.
//
// All functions below return the integrals with that normalization applied;
// the raw values overflow double range at realistic shapes.

namespace starris {

struct AppendixPieces {
    double i1 = 0.0;
    double i2 = 0.0;
    double i3 = 0.0;
    double i4 = 0.0;
    double abs_sum = 0.0;  // sum of |term| over every series involved

    double total() const { return i1 + i2 - i3 + i4; }
};

double appendix_i1(const ClosedFormParams& p, int kappa);
double appendix_i2(const ClosedFormParams& p, int kappa);

/// The (j, f) double series. Diverges when psi*theta_s >= 1 (ConvergenceError).
specfun::SeriesSum appendix_i3_terms(const ClosedFormParams& p, int kappa,
                                     const specfun::SeriesControl& ctrl = {});
double appendix_i3(const ClosedFormParams& p, int kappa, const specfun::SeriesControl& ctrl = {});
double appendix_i4(const ClosedFormParams& p, int kappa, const specfun::SeriesControl& ctrl = {});

AppendixPieces appendix_pieces(const ClosedFormParams& p, int kappa,
                               const specfun::SeriesControl& ctrl = {});

/// ER2 assembled from the four pieces. `condition` receives the ratio of the
/// absolute term sum to the result, a measure of digits lost to cancellation.
double er2_closed_appendix(const ClosedFormParams& p, const specfun::SeriesControl& ctrl = {},
                           double* condition = nullptr);

}  // namespace starris
