#include "starris/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "starris/error.hpp"
#include "starris/quadrature.hpp"
#include "starris/specfun.hpp"

namespace starris {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLn2 = std::log(2.0);

struct Shapes {
    double kp, ks, ks3;
};

Shapes shapes(const ClosedFormParams& p, ShapeMode mode) {
    Shapes s{static_cast<double>(p.k_p), static_cast<double>(p.k_s), static_cast<double>(p.k_s3)};
    if (mode == ShapeMode::real) s = {p.k_p_real, p.k_s_real, p.k_s3_real};
    if (!(s.kp >= 1.0) || !(s.ks >= 1.0) || !(s.ks3 >= 1.0))
        throw DomainError("oracle: Gamma shapes below 1 are not supported");
    return s;
}

// log density of Gamma(k, 1)
struct LogGammaDensity {
    double k, lg;
    explicit LogGammaDensity(double shape) : k(shape), lg(specfun::ln_gamma(shape)) {}
    double operator()(double x) const {
        if (x <= 0.0) return (x == 0.0 && k == 1.0) ? -lg : -kInf;
        return (k - 1.0) * std::log(x) - x - lg;
    }
    double mode() const { return std::max(k - 1.0, 0.0); }
    double scale() const { return std::sqrt(k); }
};

quad::LogConcaveOptions log_options(const QuadratureControl& q) {
    quad::LogConcaveOptions o;
    o.adaptive.abs_tol = q.abs_tol;
    o.adaptive.rel_tol = q.rel_tol;
    o.adaptive.max_subdivisions = q.max_subdivisions;
    o.tail_level = q.tail_cut;
    return o;
}

Estimate from_log(const quad::LogIntegral& r, double shift) {
    Estimate e;
    e.ln_value = r.ln_value + shift;
    e.value = std::exp(e.ln_value);
    e.rel_error = r.rel_error;
    return e;
}

Estimate zero_estimate() {
    Estimate e;
    e.ln_value = -kInf;
    return e;
}

// [lo, hi] outside of which the Gamma(k,1) density is below tail * e^-7 of its peak
std::pair<double, double> bulk_range(const LogGammaDensity& f, double tail) {
    const double m = f.mode();
    const double cut = f(std::max(m, 1e-300)) + std::log(tail) - 7.0;
    auto edge = [&](double dir) {
        double inside = m, s = f.scale();
        double outside = m + dir * s;
        while (outside > 0.0 && f(outside) >= cut) {
            inside = outside;
            s *= 2.0;
            outside = m + dir * s;
        }
        if (outside <= 0.0) return 0.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (inside + outside);
            if (f(mid) >= cut)
                inside = mid;
            else
                outside = mid;
        }
        return outside;
    };
    return {edge(-1.0), edge(1.0)};
}

}  // namespace

void QuadratureControl::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw DomainError("QuadratureControl: tolerances must be positive");
    if (max_subdivisions < 1) throw DomainError("QuadratureControl: max_subdivisions must be >= 1");
    if (!(tail_cut > 0.0 && tail_cut < 1.0))
        throw DomainError("QuadratureControl: tail_cut must lie in (0, 1)");
}

// ER1 = (1/ln2) E_V[ Q(k_p, tau1 + c V) ln(1 + zeta1 L_s theta_s V) ]
Estimate er1_quad(const ClosedFormParams& p, const QuadratureControl& q, ShapeMode mode) {
    q.validate();
    const Shapes k = shapes(p, mode);
    const double b = p.zeta1 * p.L_s * p.theta_s;
    if (!(b > 0.0)) return zero_estimate();
    const double c = p.c();
    const LogGammaDensity fv(k.ks);
    auto lf = [&](double v) {
        if (v <= 0.0) return -kInf;
        return specfun::log_gamma_q(k.kp, p.tau1 + c * v) + std::log(std::log1p(b * v)) + fv(v);
    };
    const auto r = quad::integrate_log_concave(lf, 0.0, kInf, fv.mode(), fv.scale(), log_options(q));
    return from_log(r, -std::log(kLn2));
}

// ER3 = P(k_p, tau1) (1/ln2) E_V[ ln(1 + L_s theta_s V) ]
Estimate er3_quad(const ClosedFormParams& p, const QuadratureControl& q, ShapeMode mode) {
    q.validate();
    const Shapes k = shapes(p, mode);
    if (!(p.tau1 > 0.0) || !(p.L_s > 0.0)) return zero_estimate();
    const double weight = specfun::log_gamma_p(k.kp, p.tau1);
    const double b = p.L_s * p.theta_s3;
    const LogGammaDensity fv(k.ks3);
    auto lf = [&](double v) {
        if (v <= 0.0) return -kInf;
        return std::log(std::log1p(b * v)) + fv(v);
    };
    const auto r = quad::integrate_log_concave(lf, 0.0, kInf, fv.mode(), fv.scale(), log_options(q));
    return from_log(r, weight - std::log(kLn2));
}

// ER2 = (1/ln2) E_V[ int_{tau1}^{tau1 + c V} ln((1+zeta2) u/tau1 - zeta2) f_{k_p}(u) du ]
Estimate er2_quad(const ClosedFormParams& p, const QuadratureControl& q, ShapeMode mode) {
    q.validate();
    const Shapes k = shapes(p, mode);
    if (!(p.psi > 0.0) || !(p.tau1 > 0.0) || !std::isfinite(p.zeta2)) return zero_estimate();
    const double c = p.c();
    const LogGammaDensity fu(k.kp);
    const LogGammaDensity fv(k.ks);
    QuadratureControl qi = q;
    qi.rel_tol = q.rel_tol * 0.1;
    const auto inner_opt = log_options(qi);
    const double slope = (1.0 + p.zeta2) / p.tau1;
    double inner_err = 0.0;
    auto inner = [&](double v) {
        const double hi = p.tau1 + c * v;
        if (!(hi > p.tau1)) return -kInf;
        auto li = [&](double u) {
            if (!(u > p.tau1)) return -kInf;
            return std::log(std::log1p(slope * (u - p.tau1))) + fu(u);
        };
        const double width = hi - p.tau1;
        const double guess = std::clamp(fu.mode(), p.tau1, hi);
        const auto r = quad::integrate_log_concave(li, p.tau1, hi, guess,
                                                   std::min(fu.scale(), 0.25 * width), inner_opt);
        inner_err = std::max(inner_err, r.rel_error);
        return r.ln_value;
    };
    auto lf = [&](double v) {
        if (v <= 0.0) return -kInf;
        const double g = inner(v);
        return g == -kInf ? -kInf : g + fv(v);
    };
    const auto r = quad::integrate_log_concave(lf, 0.0, kInf, fv.mode(), fv.scale(), log_options(q));
    Estimate e = from_log(r, -std::log(kLn2));
    e.rel_error += inner_err;
    return e;
}

OutageEstimate pout_quad(const ClosedFormParams& p, const QuadratureControl& q, ShapeMode mode) {
    q.validate();
    const Shapes k = shapes(p, mode);
    const double c = p.c();
    const LogGammaDensity fv(k.ks);
    const auto opt = log_options(q);
    auto lp = [&](double v) {
        if (v < 0.0) return -kInf;
        const double x = p.tau1 + c * v;
        return (x > 0.0 ? specfun::log_gamma_p(k.kp, x) : -kInf) + fv(v);
    };
    auto lq = [&](double v) {
        if (v < 0.0) return -kInf;
        return specfun::log_gamma_q(k.kp, p.tau1 + c * v) + fv(v);
    };
    OutageEstimate o;
    const auto rp = quad::integrate_log_concave(lp, 0.0, kInf, fv.mode(), fv.scale(), opt);
    const auto rq = quad::integrate_log_concave(lq, 0.0, kInf, fv.mode(), fv.scale(), opt);
    o.p_out = std::min(1.0, std::exp(rp.ln_value));
    o.ln_success = std::min(0.0, rq.ln_value);
    o.rel_error = rp.rel_error;
    return o;
}

namespace {

// Integrates phi(u, v) f_{k_p}(u) f_{k_s}(v) over the quadrant, with the
// inner integral split at the Case II band edges u = tau1 and u = tau1 + c v.
template <class Phi>
Estimate quadrant_integral(const ClosedFormParams& p, const QuadratureControl& q, ShapeMode mode,
                           Phi phi) {
    q.validate();
    const Shapes k = shapes(p, mode);
    const LogGammaDensity fu(k.kp);
    const LogGammaDensity fv(k.ks);
    const auto [ulo, uhi] = bulk_range(fu, q.tail_cut);
    const auto [vlo, vhi] = bulk_range(fv, q.tail_cut);
    const double c = p.c();
    quad::AdaptiveOptions inner_opt;
    inner_opt.abs_tol = q.abs_tol * 0.1;
    inner_opt.rel_tol = q.rel_tol * 0.1;
    inner_opt.max_subdivisions = q.max_subdivisions;
    quad::AdaptiveOptions outer_opt;
    outer_opt.abs_tol = q.abs_tol;
    outer_opt.rel_tol = q.rel_tol;
    outer_opt.max_subdivisions = q.max_subdivisions;
    double inner_err = 0.0;
    auto H = [&](double v) {
        const double band_hi = p.tau1 + c * v;
        auto g = [&](double u) {
            const double d = fu(u);
            return d == -kInf ? 0.0 : phi(u, v) * std::exp(d);
        };
        std::vector<double> breaks{p.tau1, band_hi};
        for (int i = 1; i < 8; ++i) breaks.push_back(ulo + (uhi - ulo) * i / 8.0);
        const auto r = quad::integrate(g, ulo, uhi, inner_opt, breaks);
        inner_err += r.abs_error;
        const double d = fv(v);
        return d == -kInf ? 0.0 : r.value * std::exp(d);
    };
    std::vector<double> breaks;
    for (int i = 1; i < 16; ++i) breaks.push_back(vlo + (vhi - vlo) * i / 16.0);
    const auto r = quad::integrate(H, vlo, vhi, outer_opt, breaks);
    Estimate e;
    e.value = r.value;
    e.ln_value = r.value > 0.0 ? std::log(r.value) : -kInf;
    e.rel_error = r.value != 0.0 ? r.abs_error / std::fabs(r.value) : r.abs_error;
    return e;
}

}  // namespace

Estimate ergodic_rate_2d(const ClosedFormParams& p, const QuadratureControl& q, ShapeMode mode) {
    if (p.k_s3 != p.k_s || p.theta_s3 != p.theta_s)
        throw DomainError("ergodic_rate_2d: full-surface outage regime is not supported");
    const double c = p.c();
    const double b1 = p.zeta1 * p.L_s * p.theta_s;
    const double b3 = p.L_s * p.theta_s;
    const double slope = std::isfinite(p.zeta2) && p.tau1 > 0.0 ? (1.0 + p.zeta2) / p.tau1 : 0.0;
    auto rate = [&](double u, double v) {
        if (u >= p.tau1 + c * v) return std::log1p(b1 * v) / kLn2;
        if (u < p.tau1) return std::log1p(b3 * v) / kLn2;
        return std::log1p(slope * (u - p.tau1)) / kLn2;
    };
    return quadrant_integral(p, q, mode, rate);
}

RegionProbabilities region_probabilities_2d(const ClosedFormParams& p, const QuadratureControl& q,
                                            ShapeMode mode) {
    const double c = p.c();
    RegionProbabilities out;
    out.case1 = quadrant_integral(p, q, mode, [&](double u, double v) {
                    return u >= p.tau1 + c * v ? 1.0 : 0.0;
                }).value;
    out.case2 = quadrant_integral(p, q, mode, [&](double u, double v) {
                    return (u < p.tau1 + c * v && u >= p.tau1) ? 1.0 : 0.0;
                }).value;
    out.case3 = quadrant_integral(p, q, mode, [&](double u, double) {
                    return u < p.tau1 ? 1.0 : 0.0;
                }).value;
    return out;
}

QuadBreakdown evaluate_quad(const ClosedFormParams& p, const QuadratureControl& q, ShapeMode mode) {
    QuadBreakdown b;
    b.er1 = er1_quad(p, q, mode);
    b.er2 = er2_quad(p, q, mode);
    b.er3 = er3_quad(p, q, mode);
    b.outage = pout_quad(p, q, mode);
    b.er_total = b.er1.value + b.er2.value + b.er3.value;
    b.r_out = std::log2(1.0 + p.gamma_hat_p) * std::exp(b.outage.ln_success);
    return b;
}

}  // namespace starris
