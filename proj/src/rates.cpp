#include "starris/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "starris/appendix.hpp"
#include "starris/error.hpp"

namespace starris {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLnLn2 = std::log(std::log(2.0));

// k * ln(x) with 0 * ln(0) = 0
double xlogy(int k, double lnx) { return k == 0 ? 0.0 : k * lnx; }

std::vector<double> ln_factorials(int n) {
    std::vector<double> f(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 2; i <= n; ++i) f[i] = f[i - 1] + std::log(static_cast<double>(i));
    return f;
}

// ln S_K(a) = ln sum_{M<K} e^a E_{M+1}(a) for K = 0 .. count (index K)
std::vector<double> ln_cumulative_expint(double a, int count) {
    const auto s = specfun::scaled_expint_table(a, static_cast<std::size_t>(count));
    std::vector<double> out(static_cast<std::size_t>(count) + 1, -kInf);
    specfun::KahanSum acc;
    for (int K = 1; K <= count; ++K) {
        acc.add(s[K - 1]);
        out[K] = std::log(acc.value());
    }
    return out;
}

void check_shapes(const ClosedFormParams& p) {
    if (p.k_p < 1 || p.k_s < 1 || p.k_s3 < 1)
        throw DomainError("closed forms need positive integer shapes");
}

[[noreturn]] void bad_term(const char* what, int i, int n) {
    std::ostringstream msg;
    msg << what << ": non-finite term at indices (" << i << ", " << n << ")";
    throw NumericalError(msg.str());
}

}  // namespace

const char* to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::CaseI:
            return "CaseI";
        case CaseLabel::CaseII:
            return "CaseII";
        case CaseLabel::CaseIII:
            return "CaseIII";
    }
    return "?";
}

ClosedFormParams ClosedFormParams::with_integer_shapes() const {
    ClosedFormParams q = *this;
    q.k_p_real = k_p;
    q.k_s_real = k_s;
    q.k_s3_real = k_s3;
    return q;
}

Sinrs instantaneous_sinrs(double g_p, double g_s, const EffectivePowers& L, double alpha) {
    Sinrs s;
    const double interference = (1.0 - alpha) * L.L_s * g_s + 1.0;
    s.gamma_s1 = alpha * L.L_s * g_s / (L.L_p * g_p + interference);
    s.gamma_p = L.L_p * g_p / interference;
    s.gamma_s2 = (1.0 - alpha) * L.L_s * g_s;
    return s;
}

CaseLabel classify_case(double g_p, double g_s, const EffectivePowers& L, double alpha,
                        double gamma_hat) {
    const double v = L.L_p * g_p;
    if (v >= gamma_hat * ((1.0 - alpha) * L.L_s * g_s + 1.0)) return CaseLabel::CaseI;
    if (v < gamma_hat) return CaseLabel::CaseIII;
    return CaseLabel::CaseII;
}

double su_rate_instant(CaseLabel label, double g_p, double g_s, double g_s3,
                       const ClosedFormParams& p) {
    constexpr double inv_ln2 = 1.4426950408889634074;
    switch (label) {
        case CaseLabel::CaseI:
            return std::log1p(p.zeta1 * p.L_s * g_s) * inv_ln2;
        case CaseLabel::CaseII: {
            const double v = p.L_p * g_p;
            if (v < p.gamma_hat_p || !std::isfinite(p.zeta2))
                throw DomainError("su_rate_instant: realization outside the Case II region");
            return std::log1p((1.0 + p.zeta2) * (v - p.gamma_hat_p) / p.gamma_hat_p) * inv_ln2;
        }
        case CaseLabel::CaseIII:
            return std::log1p(p.L_s * g_s3) * inv_ln2;
    }
    return 0.0;
}

double su_rate_instant(CaseLabel label, double g_p, double g_s, const ClosedFormParams& p) {
    return su_rate_instant(label, g_p, g_s, g_s, p);
}

double su_rate_case1_two_term(double u, double alpha, double gamma_hat) {
    const double s1 = alpha * u / ((1.0 + gamma_hat) * ((1.0 - alpha) * u + 1.0));
    return (std::log1p(s1) + std::log1p((1.0 - alpha) * u)) / std::log(2.0);
}

double su_rate_case2_two_term(double v, double alpha, double gamma_hat) {
    const double s1 = alpha * (v - gamma_hat) / ((1.0 - alpha) * v * (1.0 + gamma_hat));
    return (std::log1p(s1) + std::log1p((v - gamma_hat) / gamma_hat)) / std::log(2.0);
}

ClosedFormParams closed_form_params(const SystemConfig& cfg, const GammaFit& fit_p,
                                    const GammaFit& fit_s, const GammaFit& fit_s3) {
    const EffectivePowers L = effective_powers(cfg);
    ClosedFormParams p;
    p.L_p = L.L_p;
    p.L_s = L.L_s;
    p.k_p = fit_p.k_int;
    p.k_s = fit_s.k_int;
    p.k_p_real = fit_p.k_real;
    p.k_s_real = fit_s.k_real;
    p.theta_p = fit_p.theta_unit;
    p.theta_s = fit_s.theta_unit;
    p.k_s3 = fit_s3.k_int;
    p.k_s3_real = fit_s3.k_real;
    p.theta_s3 = fit_s3.theta_unit;
    const double a = cfg.alpha;
    const double g = cfg.gamma_p_target;
    p.alpha = a;
    p.gamma_hat_p = g;
    p.tau1 = g / (L.L_p * p.theta_p);
    p.psi = g * (1.0 - a) * L.L_s / (L.L_p * p.theta_p);
    p.zeta1 = (1.0 - a) + a / (1.0 + g);
    if (a < 1.0) {
        p.zeta2 = a / ((1.0 - a) * (1.0 + g));
        p.tau2 = p.tau1 / (p.zeta2 + 1.0);
    } else {
        // the Case II region is empty; er2 is 0 by definition
        p.zeta2 = kInf;
        p.tau2 = 0.0;
    }
    return p;
}

ClosedFormParams closed_form_params(const SystemConfig& cfg, const GammaFit& fit_p,
                                    const GammaFit& fit_s) {
    return closed_form_params(cfg, fit_p, fit_s, fit_s);
}

ClosedFormParams closed_form_params(const SystemConfig& cfg) {
    cfg.validate();
    const GammaFit fp = gamma_fit(cfg.N_r(), cfg.m, cfg.Omega, 1.0);
    const GammaFit fs = gamma_fit(cfg.N_t(), cfg.m, cfg.Omega, 1.0);
    if (cfg.case3_full_surface)
        return closed_form_params(cfg, fp, fs, gamma_fit(cfg.N, cfg.m, cfg.Omega, 1.0));
    return closed_form_params(cfg, fp, fs, fs);
}

// ER1 = (1/ln2) sum_{i<k_p} sum_{n<=i} e^{-tau1} tau1^{i-n} c^n (k_s)_n
//       / (n! (i-n)! (1+c)^{k_s+n}) * S_{k_s+n}((1+c)/(zeta1 L_s theta_s))
double er1_closed_ln(const ClosedFormParams& p) {
    check_shapes(p);
    const double b = p.zeta1 * p.L_s * p.theta_s;
    if (!(b > 0.0)) return -kInf;
    const int kp = p.k_p, ks = p.k_s;
    const double c = p.c();
    const double ln_t1 = std::log(p.tau1);
    const double ln_c = std::log(c);
    const double l1pc = std::log1p(c);
    const auto lf = ln_factorials(kp);
    const auto lnS = ln_cumulative_expint((1.0 + c) / b, ks + kp);
    specfun::LogSum acc;
    double ln_poch = 0.0;  // ln (k_s)_n
    for (int n = 0; n < kp; ++n) {
        if (n > 0) {
            if (c == 0.0) break;
            ln_poch += std::log(static_cast<double>(ks + n - 1));
        }
        const double common = xlogy(n, ln_c) - lf[n] - (ks + n) * l1pc + ln_poch + lnS[ks + n] - p.tau1;
        for (int i = n; i < kp; ++i) {
            if (p.tau1 == 0.0 && i > n) break;
            const double lt = common + xlogy(i - n, ln_t1) - lf[i - n];
            if (std::isnan(lt)) bad_term("er1_closed", i, n);
            acc.add_log(lt);
        }
    }
    return acc.log() - kLnLn2;
}

double er1_closed(const ClosedFormParams& p) { return std::exp(er1_closed_ln(p)); }

// ER3 = P(k_p, tau1) E[log2(1 + L_s Y3)]
double er3_closed_ln(const ClosedFormParams& p) {
    check_shapes(p);
    if (!(p.tau1 > 0.0) || !(p.L_s > 0.0)) return -kInf;
    const double weight = specfun::log_gamma_p(p.k_p, p.tau1);
    const double mean_log = specfun::expected_log1p_gamma(p.k_s3, p.L_s * p.theta_s3);
    return weight + std::log(mean_log) - kLnLn2;
}

double er3_closed(const ClosedFormParams& p) { return std::exp(er3_closed_ln(p)); }

// ER2 = e^{-tau1}/(ln2 Gamma(k_p)) sum_{n<k_s} sum_{j<k_p} C(k_p-1, j) tau1^{k_p-1-j}
//       c^{-n}/n! lambda^{-K} (K-1)! S_K(lambda tau2),  K = n+j+1, lambda = 1+1/c
double er2_closed_expanded_ln(const ClosedFormParams& p) {
    check_shapes(p);
    if (!(p.psi > 0.0) || !(p.tau1 > 0.0) || !(p.tau2 > 0.0) || !std::isfinite(p.zeta2))
        return -kInf;
    const int kp = p.k_p, ks = p.k_s;
    const double c = p.c();
    const double ln_t1 = std::log(p.tau1);
    const double ln_c = std::log(c);
    const double l1pc = std::log1p(c);
    const auto lf = ln_factorials(kp + ks);
    const auto lnS = ln_cumulative_expint(p.tau2 * (1.0 + c) / c, kp + ks - 1);
    specfun::LogSum acc;
    for (int n = 0; n < ks; ++n) {
        for (int j = 0; j < kp; ++j) {
            const int K = n + j + 1;
            const double lt = -p.tau1 - lf[j] - lf[kp - 1 - j] + xlogy(kp - 1 - j, ln_t1) - lf[n] +
                              (j + 1) * ln_c - K * l1pc + lf[K - 1] + lnS[K];
            if (std::isnan(lt)) bad_term("er2_closed", n, j);
            acc.add_log(lt);
        }
    }
    return acc.log() - kLnLn2;
}

double er2_closed_ln(const ClosedFormParams& p, const specfun::SeriesControl& ctrl,
                     std::string* route) {
    check_shapes(p);
    ctrl.validate();
    if (!(p.psi > 0.0) || !(p.tau2 > 0.0) || !std::isfinite(p.zeta2)) {
        if (route) *route = "empty";
        return -kInf;
    }
    // the four-integral composition needs a convergent I3 series and loses
    // digits to alternating sums; only trust it when both are under control
    constexpr int kMaxAppendixShape = 200;
    constexpr double kMaxCondition = 1e6;
    if (p.c() < 1.0 && p.k_p <= kMaxAppendixShape && p.k_s <= kMaxAppendixShape) {
        try {
            double cond = 0.0;
            const double v = er2_closed_appendix(p, ctrl, &cond);
            if (v > 0.0 && cond <= kMaxCondition) {
                if (route) *route = "appendix";
                return std::log(v);
            }
        } catch (const ConvergenceError&) {
        } catch (const NumericalError&) {
        }
    }
    if (route) *route = "expanded";
    return er2_closed_expanded_ln(p);
}

double er2_closed(const ClosedFormParams& p, const specfun::SeriesControl& ctrl,
                  std::string* route) {
    return std::exp(er2_closed_ln(p, ctrl, route));
}

// 1 - P_out = sum_{i<k_p} sum_{j<=i} e^{-tau1} tau1^{i-j} c^j (k_s)_j / (j! (i-j)! (1+c)^{k_s+j})
Outage pu_outage(const ClosedFormParams& p) {
    check_shapes(p);
    const int kp = p.k_p, ks = p.k_s;
    const double c = p.c();
    const double ln_t1 = std::log(p.tau1);
    const double ln_c = std::log(c);
    const double l1pc = std::log1p(c);
    const auto lf = ln_factorials(kp);
    specfun::LogSum acc;
    double ln_poch = 0.0;
    for (int j = 0; j < kp; ++j) {
        if (j > 0) {
            if (c == 0.0) break;
            ln_poch += std::log(static_cast<double>(ks + j - 1));
        }
        const double common = xlogy(j, ln_c) - lf[j] - (ks + j) * l1pc + ln_poch - p.tau1;
        for (int i = j; i < kp; ++i) {
            if (p.tau1 == 0.0 && i > j) break;
            const double lt = common + xlogy(i - j, ln_t1) - lf[i - j];
            if (std::isnan(lt)) bad_term("pu_outage", i, j);
            acc.add_log(lt);
        }
    }
    Outage o;
    o.ln_success = std::min(0.0, acc.log());
    o.p_out = std::max(0.0, std::min(1.0, -std::expm1(o.ln_success)));
    o.r_out = std::log2(1.0 + p.gamma_hat_p) * std::exp(o.ln_success);
    return o;
}

RateBreakdown er_total(const ClosedFormParams& p, const specfun::SeriesControl& ctrl,
                       const ClosedFormHooks& hooks) {
    RateBreakdown r;
    r.ln_er1 = er1_closed_ln(p) + std::log(hooks.er1_scale);
    r.ln_er2 = er2_closed_ln(p, ctrl, &r.er2_route) + std::log(hooks.er2_scale);
    r.ln_er3 = er3_closed_ln(p) + std::log(hooks.er3_scale);
    r.er1 = std::exp(r.ln_er1);
    r.er2 = std::exp(r.ln_er2);
    r.er3 = std::exp(r.ln_er3);
    r.er_total = r.er1 + r.er2 + r.er3;
    const Outage o = pu_outage(p);
    r.p_out = std::max(0.0, std::min(1.0, o.p_out + hooks.p_out_shift));
    r.ln_success = hooks.p_out_shift == 0.0 ? o.ln_success : std::log1p(-r.p_out);
    r.r_out = std::log2(1.0 + p.gamma_hat_p) * (1.0 - r.p_out);
    if (hooks.p_out_shift == 0.0) r.r_out = o.r_out;
    return r;
}

}  // namespace starris
