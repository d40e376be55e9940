#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace starris::specfun {

/// Truncation policy for infinite series (generalized hypergeometric sums and
/// the Case-II j-series). The sum stops once `consecutive_small` successive
/// terms are below `rel_tol` times the running partial sum.
struct SeriesControl {
    double rel_tol = 1e-12;
    int max_terms = 10000;
    int consecutive_small = 3;

    void validate() const;
};

/// Result of a truncated series, with the data needed to judge cancellation.
struct SeriesSum {
    double value = 0.0;
    double abs_sum = 0.0;  // sum of |term|
    int terms = 0;

    /// abs_sum / |value|; large values mean the sum lost digits to cancellation.
    double condition() const;
};

double ln_gamma(double x);
double ln_factorial(int n);
double ln_binomial(int n, int k);

/// (a)_n = a (a+1) ... (a+n-1), with (a)_0 = 1.
double pochhammer(double a, int n);
/// ln (a)_n for a > 0.
double ln_pochhammer(double a, int n);

// Incomplete gamma functions. Unregularized forms overflow for large a; use
// the regularized or log forms there.
double lower_inc_gamma(double a, double x);
double upper_inc_gamma(double a, double x);
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double log_gamma_p(double a, double x);
double log_gamma_q(double a, double x);

/// Exponential integral Ei(x) (principal value), x != 0.
double exp_integral_ei(double x);
/// E1(x) = -Ei(-x) for x > 0.
double exp_integral_e1(double x);

/// s_M(a) = e^a E_{M+1}(a) for M = 0 .. count-1, a > 0.
///
/// These are the building blocks of every logarithmic Gamma moment in the
/// closed forms: for integer K >= 1,
///   integral_0^inf u^{K-1} e^{-u} ln(1 + u/a) du = (K-1)! * sum_{M<K} s_M(a).
/// Continued fraction per entry for a >= 1, forward recurrence below.
std::vector<double> scaled_expint_table(double a, std::size_t count);

/// The bracket that recurs in the ergodic-rate closed forms,
///   (-1)^{M-1} a^M e^a Ei(-a) + sum_{w=1}^{M} (w-1)! (-a)^{M-w},
/// evaluated through the identity bracket = M! e^a E_{M+1}(a). Always > 0.
double ei_bracket(int M, double a);
/// Same bracket summed term by term as printed. Loses all accuracy once
/// M exceeds a few tens; kept to cross-check ei_bracket.
double ei_bracket_literal(int M, double a);

/// E[ln(1 + b U)] for U ~ Gamma(K, 1), integer K >= 1, b > 0.
double expected_log1p_gamma(int K, double b);

double hyp2f2(double a1, double a2, double b1, double b2, double x,
              const SeriesControl& ctrl = {});
/// Series evaluation with diagnostics. When `partial_sums` is non-null it
/// receives the running sum after every term.
SeriesSum hyp2f2_series(double a1, double a2, double b1, double b2, double x,
                        const SeriesControl& ctrl = {},
                        std::vector<double>* partial_sums = nullptr);

/// Compensated accumulator for positive terms supplied as logarithms.
class LogSum {
public:
    void add_log(double log_term);
    void add(double term);
    double log() const;
    double value() const;
    bool empty() const { return max_ == -std::numeric_limits<double>::infinity(); }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Signed variant: separate positive and negative LogSums.
class SignedLogSum {
public:
    void add_log(double log_magnitude, bool negative);
    void add(double term);
    double value() const;
    /// (|positive| + |negative|) / |value|.
    double condition() const;

private:
    LogSum pos_;
    LogSum neg_;
};

/// Kahan–Babuska summation of plain doubles.
class KahanSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace starris::specfun
