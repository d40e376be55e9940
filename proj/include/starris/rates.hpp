#pragma once

#include <string>

#include "starris/channel.hpp"
#include "starris/specfun.hpp"

namespace starris {

enum class CaseLabel { CaseI, CaseII, CaseIII };

const char* to_string(CaseLabel c);

struct Sinrs {
    double gamma_s1 = 0.0;
    double gamma_p = 0.0;
    double gamma_s2 = 0.0;
};

/// Analytic symbols shared by the closed forms and the quadrature oracle.
///
/// X = g_p ~ Gamma(k_p, theta_p) over the N_r reflecting elements and
/// Y = g_s ~ Gamma(k_s, theta_s) over the N_t transmitting elements, both
/// at rho = 1. The closed forms use the integer shapes; the oracle can run
/// at either.
struct ClosedFormParams {
    double L_p = 0.0;
    double L_s = 0.0;
    int k_p = 1;
    int k_s = 1;
    double k_p_real = 1.0;
    double k_s_real = 1.0;
    double theta_p = 1.0;
    double theta_s = 1.0;
    // law of the SU gain used in the outage regime; equals (k_s, theta_s)
    // unless the full-surface option is on
    int k_s3 = 1;
    double k_s3_real = 1.0;
    double theta_s3 = 1.0;
    double tau1 = 0.0;   // gamma_hat / (L_p theta_p)
    double psi = 0.0;    // gamma_hat (1 - alpha) L_s / (L_p theta_p)
    double zeta1 = 1.0;  // (1 - alpha) + alpha / (1 + gamma_hat)
    double zeta2 = 0.0;  // alpha / ((1 - alpha)(1 + gamma_hat)), +inf at alpha = 1
    double tau2 = 0.0;   // tau1 / (zeta2 + 1), 0 at alpha = 1
    double gamma_hat_p = 0.0;
    double alpha = 0.0;

    /// psi * theta_s: slope of the Case I / Case II boundary in units of
    /// the standardized variables u = X/theta_p, v = Y/theta_s.
    double c() const { return psi * theta_s; }
    /// Same parameters with the real shapes replaced by the integer ones.
    ClosedFormParams with_integer_shapes() const;
};

struct RateBreakdown {
    double er1 = 0.0;
    double er2 = 0.0;
    double er3 = 0.0;
    double er_total = 0.0;
    double p_out = 0.0;
    double r_out = 0.0;
    // natural logs of er1, er2, er3 and 1 - p_out (-inf for exact zeros);
    // these keep full relative accuracy when the values underflow
    double ln_er1 = 0.0;
    double ln_er2 = 0.0;
    double ln_er3 = 0.0;
    double ln_success = 0.0;
    std::string er2_route;
};

struct Outage {
    double p_out = 0.0;
    double r_out = 0.0;
    double ln_success = 0.0;  // ln(1 - p_out)
};

/// Hooks used by validation fault-injection tests: perturb one closed-form
/// component after evaluation. Identity by default.
struct ClosedFormHooks {
    double er1_scale = 1.0;
    double er2_scale = 1.0;
    double er3_scale = 1.0;
    double p_out_shift = 0.0;
};

Sinrs instantaneous_sinrs(double g_p, double g_s, const EffectivePowers& L, double alpha);

/// CaseI iff L_p g_p >= gamma_hat ((1-alpha) L_s g_s + 1); CaseIII iff
/// L_p g_p < gamma_hat; CaseII otherwise.
CaseLabel classify_case(double g_p, double g_s, const EffectivePowers& L, double alpha,
                        double gamma_hat);

/// SU rate in bits/s/Hz for a realization already classified. `g_s3` is the
/// SU gain used in CaseIII (pass g_s unless the full-surface option is on).
double su_rate_instant(CaseLabel label, double g_p, double g_s, const ClosedFormParams& p);
double su_rate_instant(CaseLabel label, double g_p, double g_s, double g_s3,
                       const ClosedFormParams& p);

/// Case I rate as the sum of the two sub-message rates.
double su_rate_case1_two_term(double u, double alpha, double gamma_hat);
/// Case II rate as the sum of the two sub-message rates, v = L_p g_p.
double su_rate_case2_two_term(double v, double alpha, double gamma_hat);

ClosedFormParams closed_form_params(const SystemConfig& cfg, const GammaFit& fit_p,
                                    const GammaFit& fit_s);
ClosedFormParams closed_form_params(const SystemConfig& cfg, const GammaFit& fit_p,
                                    const GammaFit& fit_s, const GammaFit& fit_s3);
/// Fits both sides at rho = 1 from the configuration.
ClosedFormParams closed_form_params(const SystemConfig& cfg);

// Closed forms (integer shapes k_p, k_s). The *_ln variants return natural
// logs of the rate in bits/s/Hz.
double er1_closed(const ClosedFormParams& p);
double er1_closed_ln(const ClosedFormParams& p);
double er3_closed(const ClosedFormParams& p);
double er3_closed_ln(const ClosedFormParams& p);

/// Case II rate. Uses the four-integral composition (see appendix.hpp) when
/// its series converge and are well conditioned, and otherwise the
/// positive-term expansion. `route` receives "appendix" or "expanded".
double er2_closed(const ClosedFormParams& p, const specfun::SeriesControl& ctrl = {},
                  std::string* route = nullptr);
double er2_closed_ln(const ClosedFormParams& p, const specfun::SeriesControl& ctrl = {},
                     std::string* route = nullptr);
/// Positive-term expansion of the Case II rate, as a natural log.
double er2_closed_expanded_ln(const ClosedFormParams& p);

Outage pu_outage(const ClosedFormParams& p);

RateBreakdown er_total(const ClosedFormParams& p, const specfun::SeriesControl& ctrl = {},
                       const ClosedFormHooks& hooks = {});

}  // namespace starris
