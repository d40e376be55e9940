#include "starris/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "starris/error.hpp"

namespace starris::specfun {

namespace {

constexpr double kEuler = 0.57721566490153286061;
constexpr double kLnSqrt2Pi = 0.91893853320467274178;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxIter = 100000;

bool is_nonpositive_integer(double v) {
    return v <= 0.0 && v == std::floor(v);
}

// zeta(k) for k = 2..kZetaCount+1 by Euler-Maclaurin with ten explicit terms.
constexpr int kZetaCount = 64;

std::array<double, kZetaCount> make_zeta_table() {
    static constexpr double bern[] = {1.0 / 6.0,   -1.0 / 30.0, 1.0 / 42.0,
                                      -1.0 / 30.0, 5.0 / 66.0,  -691.0 / 2730.0};
    std::array<double, kZetaCount> z{};
    const double N = 10.0;
    for (int idx = 0; idx < kZetaCount; ++idx) {
        const double s = idx + 2.0;
        double head = 0.0;
        for (int n = 9; n >= 1; --n) head += std::pow(static_cast<double>(n), -s);
        double tail = std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s);
        double rising = s;     // s (s+1) ... (s+2j-2)
        double fact = 2.0;     // (2j)!
        for (int j = 1; j <= 6; ++j) {
            tail += bern[j - 1] / fact * rising * std::pow(N, -s - 2.0 * j + 1.0);
            rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
            fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
        }
        z[idx] = head + tail;
    }
    return z;
}

// ln Gamma(1 + e) for |e| <= 0.5, keeps relative accuracy near the zeros at 1 and 2.
double ln_gamma_near_one(double e) {
    static const std::array<double, kZetaCount> zeta = make_zeta_table();
    // Horner in (-e): sum = sum_{k>=2} zeta(k)/k (-e)^{k-2}
    double sum = 0.0;
    for (int k = kZetaCount + 1; k >= 2; --k) sum = sum * (-e) + zeta[k - 2] / k;
    return -kEuler * e + e * e * sum;
}

double ln_gamma_lanczos(double x) {
    static constexpr double g = 7.0;
    static constexpr double c[] = {0.99999999999980993,  676.5203681218851,
                                   -1259.1392167224028,  771.32342877765313,
                                   -176.61502916214059,  12.507343278686905,
                                   -0.13857109526572012, 9.9843695780195716e-6,
                                   1.5056327351493116e-7};
    const double xm = x - 1.0;
    double a = c[0];
    for (int i = 1; i < 9; ++i) a += c[i] / (xm + i);
    const double t = xm + g + 0.5;
    return kLnSqrt2Pi + (xm + 0.5) * std::log(t) - t + std::log(a);
}

// ln Gamma(a+1) - (a ln a - a + 0.5 ln(2 pi a)), a >= 10.
double stirling_error(double a) {
    const double r = 1.0 / a;
    const double r2 = r * r;
    return r * (1.0 / 12.0 -
                r2 * (1.0 / 360.0 -
                      r2 * (1.0 / 1260.0 -
                            r2 * (1.0 / 1680.0 -
                                  r2 * (1.0 / 1188.0 -
                                        r2 * (691.0 / 360360.0 - r2 / 156.0))))));
}

// ln( x^a e^{-x} / Gamma(a+1) ), with the large-a cancellation removed.
double log_gamma_prefix(double a, double x) {
    if (x == 0.0) return -kInf;
    if (a < 10.0) return a * std::log(x) - x - ln_gamma(a + 1.0);
    const double t = (x - a) / a;
    return a * (std::log1p(t) - t) - 0.5 * std::log(2.0 * M_PI * a) - stirling_error(a);
}

// ln( sum_{n>=0} x^n / ((a+1)...(a+n)) )
double log_p_series(double a, double x) {
    double ap = a;
    double del = 1.0;
    KahanSum sum;
    sum.add(1.0);
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum.add(del);
        if (del < sum.value() * kEps * 0.5) return std::log(sum.value());
    }
    throw ConvergenceError("incomplete gamma series did not converge");
}

// ln of the Legendre continued fraction h with Q(a,x) = prefix * a * h.
double log_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return std::log(h);
    }
    throw ConvergenceError("incomplete gamma continued fraction did not converge");
}

void check_inc_gamma_args(double a, double x) {
    if (!(a > 0.0)) throw DomainError("incomplete gamma: shape must be positive");
    if (!(x >= 0.0)) throw DomainError("incomplete gamma: argument must be nonnegative");
}

// e^x E_n(x) by the modified Lentz continued fraction, x >= 1 or n large.
double scaled_expint_cf(int n, double x) {
    double b = x + n;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (n - 1 + i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw ConvergenceError("exponential integral continued fraction did not converge");
}

// E1 by its power series, 0 < x <= 5.
double e1_series(double x) {
    KahanSum sum;
    double term = 1.0;
    for (int k = 1; k < kMaxIter; ++k) {
        term *= -x / k;
        const double t = term / k;
        sum.add(t);
        if (std::fabs(t) < std::fabs(sum.value()) * kEps * 0.5) break;
    }
    return -kEuler - std::log(x) - sum.value();
}

}  // namespace

void SeriesControl::validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw DomainError("SeriesControl.rel_tol must lie in (0, 1)");
    if (max_terms < 1) throw DomainError("SeriesControl.max_terms must be >= 1");
    if (consecutive_small < 1)
        throw DomainError("SeriesControl.consecutive_small must be >= 1");
}

double SeriesSum::condition() const {
    if (value == 0.0) return abs_sum == 0.0 ? 1.0 : kInf;
    return abs_sum / std::fabs(value);
}

double ln_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive");
    if (std::isinf(x)) return kInf;
    if (x < 0.5) return ln_gamma_near_one(x) - std::log(x);
    if (x < 1.5) return ln_gamma_near_one(x - 1.0);
    if (x < 2.5) return std::log1p(x - 2.0) + ln_gamma_near_one(x - 2.0);
    return ln_gamma_lanczos(x);
}

double ln_factorial(int n) {
    if (n < 0) throw DomainError("ln_factorial: negative argument");
    if (n < 2) return 0.0;
    return ln_gamma(n + 1.0);
}

double ln_binomial(int n, int k) {
    if (k < 0 || k > n) throw DomainError("ln_binomial: k outside [0, n]");
    if (k == 0 || k == n) return 0.0;
    return ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
}

double pochhammer(double a, int n) {
    if (n < 0) throw DomainError("pochhammer: negative order");
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= a + i;
    return p;
}

double ln_pochhammer(double a, int n) {
    if (!(a > 0.0)) throw DomainError("ln_pochhammer: base must be positive");
    if (n < 0) throw DomainError("ln_pochhammer: negative order");
    if (n == 0) return 0.0;
    if (n < 16) return std::log(pochhammer(a, n));
    return ln_gamma(a + n) - ln_gamma(a);
}

double log_gamma_p(double a, double x) {
    check_inc_gamma_args(a, x);
    if (x == 0.0) return -kInf;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return log_gamma_prefix(a, x) + log_p_series(a, x);
    const double lq = log_gamma_prefix(a, x) + std::log(a) + log_q_fraction(a, x);
    return std::log1p(-std::exp(lq));
}

double log_gamma_q(double a, double x) {
    check_inc_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return -kInf;
    if (x < a + 1.0) {
        const double lp = log_gamma_prefix(a, x) + log_p_series(a, x);
        return std::log1p(-std::exp(lp));
    }
    return log_gamma_prefix(a, x) + std::log(a) + log_q_fraction(a, x);
}

double gamma_p(double a, double x) { return std::exp(log_gamma_p(a, x)); }
double gamma_q(double a, double x) { return std::exp(log_gamma_q(a, x)); }

double lower_inc_gamma(double a, double x) {
    return std::exp(ln_gamma(a) + log_gamma_p(a, x));
}

double upper_inc_gamma(double a, double x) {
    return std::exp(ln_gamma(a) + log_gamma_q(a, x));
}

double exp_integral_e1(double x) {
    if (!(x > 0.0)) throw DomainError("exp_integral_e1: argument must be positive");
    if (std::isinf(x)) return 0.0;
    if (x <= 5.0) return e1_series(x);
    return std::exp(-x) * scaled_expint_cf(1, x);
}

double exp_integral_ei(double x) {
    if (x == 0.0 || std::isnan(x)) throw DomainError("exp_integral_ei: singular at 0");
    if (x < 0.0) return -exp_integral_e1(-x);
    if (x <= 40.0) {
        KahanSum sum;
        double term = 1.0;
        for (int k = 1; k < kMaxIter; ++k) {
            term *= x / k;
            const double t = term / k;
            sum.add(t);
            if (t < sum.value() * kEps * 0.5) break;
        }
        return kEuler + std::log(x) + sum.value();
    }
    // asymptotic: e^x/x sum k!/x^k, truncated at the smallest term
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double next = term * k / x;
        if (next >= term) break;
        term = next;
        sum += term;
        if (term < kEps * sum) break;
    }
    return std::exp(x) / x * sum;
}

std::vector<double> scaled_expint_table(double a, std::size_t count) {
    if (!(a > 0.0)) throw DomainError("scaled_expint_table: argument must be positive");
    std::vector<double> s(count);
    if (count == 0) return s;
    if (std::isinf(a)) return s;  // all zero
    if (a >= 1.0) {
        for (std::size_t M = 0; M < count; ++M)
            s[M] = scaled_expint_cf(static_cast<int>(M) + 1, a);
        return s;
    }
    s[0] = std::exp(a) * e1_series(a);
    for (std::size_t M = 1; M < count; ++M)
        s[M] = (1.0 - a * s[M - 1]) / static_cast<double>(M);
    return s;
}

double ei_bracket(int M, double a) {
    if (M < 0) throw DomainError("ei_bracket: negative order");
    const auto s = scaled_expint_table(a, static_cast<std::size_t>(M) + 1);
    return std::exp(ln_factorial(M) + std::log(s[M]));
}

double ei_bracket_literal(int M, double a) {
    if (M < 0) throw DomainError("ei_bracket_literal: negative order");
    if (!(a > 0.0)) throw DomainError("ei_bracket_literal: argument must be positive");
    const double lead_sign = (M % 2 == 1) ? 1.0 : -1.0;  // (-1)^{M-1}
    double total = lead_sign * std::pow(a, M) * std::exp(a) * exp_integral_ei(-a);
    double fact = 1.0;  // (w-1)!
    for (int w = 1; w <= M; ++w) {
        if (w > 1) fact *= (w - 1);
        total += fact * std::pow(-a, M - w);
    }
    return total;
}

double expected_log1p_gamma(int K, double b) {
    if (K < 1) throw DomainError("expected_log1p_gamma: shape must be >= 1");
    if (!(b >= 0.0)) throw DomainError("expected_log1p_gamma: scale must be nonnegative");
    if (b == 0.0) return 0.0;
    const auto s = scaled_expint_table(1.0 / b, static_cast<std::size_t>(K));
    KahanSum sum;
    for (double v : s) sum.add(v);
    return sum.value();
}

SeriesSum hyp2f2_series(double a1, double a2, double b1, double b2, double x,
                        const SeriesControl& ctrl, std::vector<double>* partial_sums) {
    ctrl.validate();
    if (is_nonpositive_integer(b1) || is_nonpositive_integer(b2))
        throw DomainError("hyp2f2: lower parameter is a nonpositive integer");
    SeriesSum out;
    KahanSum sum;
    double term = 1.0;
    sum.add(term);
    out.abs_sum = 1.0;
    out.terms = 1;
    if (partial_sums) partial_sums->push_back(sum.value());
    int small = 0;
    for (int n = 0; n + 1 < ctrl.max_terms; ++n) {
        term *= (a1 + n) * (a2 + n) / ((b1 + n) * (b2 + n)) * x / (n + 1.0);
        sum.add(term);
        out.abs_sum += std::fabs(term);
        ++out.terms;
        if (partial_sums) partial_sums->push_back(sum.value());
        if (!std::isfinite(term)) throw NumericalError("hyp2f2: non-finite term");
        if (std::fabs(term) < ctrl.rel_tol * std::fabs(sum.value())) {
            if (++small >= ctrl.consecutive_small) {
                out.value = sum.value();
                return out;
            }
        } else {
            small = 0;
        }
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "hyp2f2: no convergence after " << ctrl.max_terms
        << " terms (partial sum " << sum.value() << ", last term " << term << ")";
    throw ConvergenceError(msg.str());
}

double hyp2f2(double a1, double a2, double b1, double b2, double x, const SeriesControl& ctrl) {
    return hyp2f2_series(a1, a2, b1, b2, x, ctrl).value;
}

void KahanSum::add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

void LogSum::add_log(double log_term) {
    if (log_term == -kInf) return;
    if (std::isnan(log_term)) throw NumericalError("LogSum: NaN term");
    if (log_term > max_) {
        if (max_ != -kInf) {
            const double scale = std::exp(max_ - log_term);
            sum_ *= scale;
            comp_ *= scale;
        }
        max_ = log_term;
    }
    const double x = std::exp(log_term - max_);
    const double t = sum_ + x;
    if (std::fabs(sum_) >= x)
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

void LogSum::add(double term) {
    if (term < 0.0) throw NumericalError("LogSum: negative term");
    if (term > 0.0) add_log(std::log(term));
}

double LogSum::log() const {
    if (empty()) return -kInf;
    return max_ + std::log(sum_ + comp_);
}

double LogSum::value() const { return std::exp(log()); }

void SignedLogSum::add_log(double log_magnitude, bool negative) {
    (negative ? neg_ : pos_).add_log(log_magnitude);
}

void SignedLogSum::add(double term) {
    if (term >= 0.0)
        pos_.add(term);
    else
        neg_.add(-term);
}

double SignedLogSum::value() const {
    const double lp = pos_.log();
    const double ln = neg_.log();
    const double m = std::max(lp, ln);
    if (m == -kInf) return 0.0;
    return std::exp(m) * (std::exp(lp - m) - std::exp(ln - m));
}

double SignedLogSum::condition() const {
    const double lp = pos_.log();
    const double ln = neg_.log();
    const double m = std::max(lp, ln);
    if (m == -kInf) return 1.0;
    const double p = std::exp(lp - m);
    const double n = std::exp(ln - m);
    if (p == n) return kInf;
    return (p + n) / std::fabs(p - n);
}

}  // namespace starris::specfun
