#include "starris/appendix.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "starris/error.hpp"

namespace starris {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Piece {
    double value = 0.0;
    double abs_sum = 0.0;
};

double xlogy(int k, double lnx) { return k == 0 ? 0.0 : k * lnx; }

void check_kappa(const ClosedFormParams& p, int kappa) {
    if (kappa < 1) throw DomainError("appendix: kappa must be a positive integer");
    if (p.k_s < 1) throw DomainError("appendix: k_s must be a positive integer");
    if (!(p.tau2 > 0.0)) throw DomainError("appendix: tau2 must be positive");
    if (!(p.psi >= 0.0)) throw DomainError("appendix: psi must be nonnegative");
}

// ln of  e^{-tau2} tau2^{a-n} c^n (k_s)_n / (n! (a-n)! (1+c)^{k_s+n})
struct BinomialTerms {
    double ln_t2, ln_c, l1pc, tau2;
    int ks;
    std::vector<double> lf;
    std::vector<double> ln_poch;

    BinomialTerms(const ClosedFormParams& p, int kappa)
        : ln_t2(std::log(p.tau2)), ln_c(std::log(p.c())), l1pc(std::log1p(p.c())), tau2(p.tau2),
          ks(p.k_s), lf(static_cast<std::size_t>(kappa) + 1, 0.0),
          ln_poch(static_cast<std::size_t>(kappa) + 1, 0.0) {
        for (int i = 2; i <= kappa; ++i) lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
        for (int n = 1; n <= kappa; ++n) ln_poch[n] = ln_poch[n - 1] + std::log(ks + n - 1.0);
    }

    double operator()(int a, int n) const {
        return -tau2 + xlogy(a - n, ln_t2) + xlogy(n, ln_c) + ln_poch[n] - lf[n] - lf[a - n] -
               (ks + n) * l1pc;
    }
};

Piece piece_i1(const ClosedFormParams& p, int kappa) {
    check_kappa(p, kappa);
    const double c = p.c();
    const double ln_t2 = std::log(p.tau2);
    Piece out;
    // I1^(1): E[ln w] = ln tau2 + E[ln(1 + c V / tau2)]
    const double mean_log = c > 0.0 ? specfun::expected_log1p_gamma(p.k_s, c / p.tau2) : 0.0;
    const double i11 = ln_t2 + mean_log;
    // I1^(2): E[ln(w) Q(kappa, w)] via the finite series of Q
    const BinomialTerms t(p, kappa);
    std::vector<double> lnS;
    if (c > 0.0) {
        const auto s = specfun::scaled_expint_table(p.tau2 * (1.0 + c) / c,
                                                    static_cast<std::size_t>(p.k_s + kappa));
        lnS.assign(s.size() + 1, -kInf);
        specfun::KahanSum acc;
        for (std::size_t K = 1; K <= s.size(); ++K) {
            acc.add(s[K - 1]);
            lnS[K] = std::log(acc.value());
        }
    }
    specfun::SignedLogSum i12;
    for (int a = 0; a < kappa; ++a) {
        for (int n = 0; n <= a; ++n) {
            if (c == 0.0 && n > 0) break;
            const double bracket = ln_t2 + (c > 0.0 ? std::exp(lnS[p.k_s + n]) : 0.0);
            if (bracket == 0.0) continue;
            i12.add_log(t(a, n) + std::log(std::fabs(bracket)), bracket < 0.0);
        }
    }
    const double v12 = i12.value();
    out.value = i11 - v12;
    out.abs_sum = std::fabs(ln_t2) + mean_log + std::fabs(v12) * i12.condition();
    return out;
}

Piece piece_i2(const ClosedFormParams& p, int kappa) {
    check_kappa(p, kappa);
    const double c = p.c();
    const BinomialTerms t(p, kappa);
    specfun::LogSum eq;  // E[Q(kappa, w)]
    for (int b = 0; b < kappa; ++b)
        for (int n = 0; n <= b; ++n) {
            if (c == 0.0 && n > 0) break;
            eq.add_log(t(b, n));
        }
    const double l = -std::log(p.tau2);
    const double q = eq.value();
    Piece out;
    out.value = l * (1.0 - q);
    out.abs_sum = std::fabs(l) * (1.0 + q);
    return out;
}

Piece piece_i4(const ClosedFormParams& p, int kappa, const specfun::SeriesControl& ctrl) {
    check_kappa(p, kappa);
    const double k = kappa;
    const auto F = specfun::hyp2f2_series(k, k, k + 1.0, k + 1.0, -p.tau2, ctrl);
    const double scale = std::exp(k * std::log(p.tau2) - 2.0 * std::log(k) - specfun::ln_gamma(k));
    Piece out;
    out.value = F.value * scale;
    out.abs_sum = F.abs_sum * scale;
    return out;
}

}  // namespace

double appendix_i1(const ClosedFormParams& p, int kappa) { return piece_i1(p, kappa).value; }

double appendix_i2(const ClosedFormParams& p, int kappa) { return piece_i2(p, kappa).value; }

specfun::SeriesSum appendix_i3_terms(const ClosedFormParams& p, int kappa,
                                     const specfun::SeriesControl& ctrl) {
    check_kappa(p, kappa);
    ctrl.validate();
    const double c = p.c();
    if (c >= 1.0) {
        std::ostringstream msg;
        msg << "appendix I3: the j-series diverges for psi*theta_s = " << c << " >= 1";
        throw ConvergenceError(msg.str());
    }
    const double ln_t2 = std::log(p.tau2);
    const double ln_c = std::log(c);
    const double lg_kappa = specfun::ln_gamma(kappa);
    std::vector<double> lf{0.0};
    std::vector<double> ln_poch{0.0};
    auto ensure = [&](int n) {
        while (static_cast<int>(lf.size()) <= n) {
            const int i = static_cast<int>(lf.size());
            lf.push_back(lf.back() + std::log(static_cast<double>(i)));
            ln_poch.push_back(ln_poch.back() + std::log(p.k_s + i - 1.0));
        }
    };
    specfun::SeriesSum out;
    specfun::KahanSum sum;
    std::vector<double> trace;
    int small = 0;
    for (int j = 0; j < ctrl.max_terms; ++j) {
        const int n = kappa + j;
        ensure(n);
        // E[w^n] = sum_f C(n,f) tau2^{n-f} c^f (k_s)_f
        specfun::LogSum moment;
        for (int f = 0; f <= n; ++f) {
            if (c == 0.0 && f > 0) break;
            moment.add_log(lf[n] - lf[f] - lf[n - f] + xlogy(n - f, ln_t2) + xlogy(f, ln_c) + ln_poch[f]);
        }
        const double mag = std::exp(moment.log() - lf[j] - 2.0 * std::log(static_cast<double>(n)) - lg_kappa);
        const double term = (j % 2 == 0) ? mag : -mag;
        if (!std::isfinite(term)) throw NumericalError("appendix I3: non-finite term");
        sum.add(term);
        out.abs_sum += mag;
        out.terms = j + 1;
        trace.push_back(sum.value());
        if (mag < ctrl.rel_tol * std::fabs(sum.value())) {
            if (++small >= ctrl.consecutive_small) {
                out.value = sum.value();
                return out;
            }
        } else {
            small = 0;
        }
    }
    std::ostringstream msg;
    msg.precision(10);
    msg << "appendix I3: no convergence after " << ctrl.max_terms << " terms; last partial sums:";
    for (std::size_t i = trace.size() > 5 ? trace.size() - 5 : 0; i < trace.size(); ++i)
        msg << ' ' << trace[i];
    throw ConvergenceError(msg.str());
}

double appendix_i3(const ClosedFormParams& p, int kappa, const specfun::SeriesControl& ctrl) {
    return appendix_i3_terms(p, kappa, ctrl).value;
}

double appendix_i4(const ClosedFormParams& p, int kappa, const specfun::SeriesControl& ctrl) {
    return piece_i4(p, kappa, ctrl).value;
}

AppendixPieces appendix_pieces(const ClosedFormParams& p, int kappa,
                               const specfun::SeriesControl& ctrl) {
    const Piece a = piece_i1(p, kappa);
    const Piece b = piece_i2(p, kappa);
    const specfun::SeriesSum s3 = appendix_i3_terms(p, kappa, ctrl);
    const Piece d = piece_i4(p, kappa, ctrl);
    AppendixPieces out;
    out.i1 = a.value;
    out.i2 = b.value;
    out.i3 = s3.value;
    out.i4 = d.value;
    out.abs_sum = a.abs_sum + b.abs_sum + s3.abs_sum + d.abs_sum;
    return out;
}

double er2_closed_appendix(const ClosedFormParams& p, const specfun::SeriesControl& ctrl,
                           double* condition) {
    if (p.k_p < 1) throw DomainError("appendix: k_p must be a positive integer");
    if (!(p.psi > 0.0) || !(p.tau2 > 0.0) || !std::isfinite(p.zeta2)) {
        if (condition) *condition = 1.0;
        return 0.0;
    }
    const double mu = p.zeta2 * p.tau2;
    const double ln_mu = std::log(mu);
    specfun::KahanSum total, abs_total;
    double lf = 0.0;
    for (int i = 0; i < p.k_p; ++i) {
        if (i > 0) lf += std::log(static_cast<double>(i));
        if (mu == 0.0 && i > 0) break;
        const double w = std::exp(-mu + xlogy(i, ln_mu) - lf);
        if (w == 0.0) continue;
        const AppendixPieces pc = appendix_pieces(p, p.k_p - i, ctrl);
        total.add(w * pc.total());
        abs_total.add(w * pc.abs_sum);
    }
    const double v = total.value() / std::log(2.0);
    if (condition)
        *condition = total.value() != 0.0 ? abs_total.value() / std::fabs(total.value()) : kInf;
    return v;
}

}  // namespace starris
