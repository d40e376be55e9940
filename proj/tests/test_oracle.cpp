#include <cmath>
#include <limits>

#include "doctest.h"
#include "starris/error.hpp"
#include "starris/oracle.hpp"
#include "starris/quadrature.hpp"

using namespace starris;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

SystemConfig small_config() {
    SystemConfig c;
    c.N = 16;
    c.m = 1.0;
    c.beta = 0.5;
    c.alpha = 0.5;
    c.gamma_p_target = 1.0;
    c.omega = 0.5;
    c.P_p = 6.4;
    c.P_s = 3.2;
    return c;
}

SystemConfig point(double alpha, double beta, double g) {
    SystemConfig c;
    c.alpha = alpha;
    c.beta = beta;
    c.gamma_p_target = g;
    return c;
}

}  // namespace

TEST_CASE("Kronrod panel integrates polynomials up to degree 31 exactly") {
    for (int d = 0; d <= 31; ++d) {
        double err = 0.0;
        const double v = quad::kronrod21([d](double x) { return std::pow(x, d); }, -0.5, 1.5, err);
        const double exact = (std::pow(1.5, d + 1) - std::pow(-0.5, d + 1)) / (d + 1);
        CAPTURE(d);
        CHECK(rel(v, exact) < 1e-14);
    }
}

TEST_CASE("adaptive integration on standard integrals") {
    const double pi = std::acos(-1.0);
    CHECK(rel(quad::integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0).value, pi / 4.0) < 1e-13);
    CHECK(rel(quad::integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0).value, 2.0 / 3.0) < 1e-11);
    CHECK(rel(quad::integrate([](double x) { return std::fabs(x - 0.3); }, 0.0, 1.0, {}, {0.3}).value, 0.29) <
          1e-14);
    quad::AdaptiveOptions starved;
    starved.max_subdivisions = 2;
    starved.rel_tol = 1e-14;
    CHECK_THROWS_AS(quad::integrate([](double x) { return std::sin(200.0 * x); }, 0.0, 3.0, starved),
                    ToleranceError);
}

TEST_CASE("log-concave integration survives underflow") {
    // Gamma(k, 1) density shifted by -2000: integral is e^{-2000}
    for (double k : {1.0, 3.0, 50.0, 1e4}) {
        const double lg = std::lgamma(k);
        auto lf = [&](double x) {
            if (x <= 0.0) return -std::numeric_limits<double>::infinity();
            return (k - 1.0) * std::log(x) - x - lg - 2000.0;
        };
        const auto r = quad::integrate_log_concave(lf, 0.0, std::numeric_limits<double>::infinity(),
                                                   std::max(k - 1.0, 0.0), std::sqrt(k));
        CAPTURE(k);
        // terms of size ~k ln k cancel in the log density
        CHECK(std::fabs(r.ln_value + 2000.0) < 1e-15 * k * std::log(k) + 1e-11);
        CHECK(r.lo_cut <= r.peak_at);
        CHECK(r.hi_cut >= r.peak_at);
    }
}

TEST_CASE("oracle matches closed forms at integer shapes") {
    for (const SystemConfig& c : {small_config(), point(0.8, 0.8, 10.0), SystemConfig{}}) {
        const ClosedFormParams p = closed_form_params(c);
        const RateBreakdown cf = er_total(p);
        const QuadBreakdown q = evaluate_quad(p);
        CAPTURE(p.k_p);
        CHECK(std::fabs(q.er1.ln_value - cf.ln_er1) < 1e-9);
        CHECK(std::fabs(q.er2.ln_value - cf.ln_er2) < 1e-9);
        CHECK(std::fabs(q.er3.ln_value - cf.ln_er3) < 1e-9);
        CHECK(std::fabs(q.outage.p_out - cf.p_out) < 1e-10);
        CHECK(std::fabs(q.outage.ln_success - cf.ln_success) < 1e-9);
        CHECK(q.er1.rel_error < 1e-8);
    }
}

TEST_CASE("Riemann grid check of the Case III integral") {
    const ClosedFormParams p = closed_form_params(small_config());
    const double ks = p.k_s, b = p.L_s * p.theta_s3;
    double sum = 0.0;
    const double h = 1e-3;
    for (double v = 0.5 * h; v < 120.0; v += h)
        sum += std::log1p(b * v) * std::exp((ks - 1.0) * std::log(v) - v - std::lgamma(ks));
    const double ref = specfun::gamma_p(p.k_p, p.tau1) * sum * h / std::log(2.0);
    CHECK(rel(er3_quad(p).value, ref) < 1e-7);
}

TEST_CASE("tail cut and subdivision budget do not move the result") {
    const ClosedFormParams p = closed_form_params(point(0.8, 0.8, 10.0));
    const QuadBreakdown base = evaluate_quad(p);
    QuadratureControl tight;
    tight.tail_cut = 1e-15;
    tight.max_subdivisions = 4000;
    tight.rel_tol = 1e-12;
    const QuadBreakdown t = evaluate_quad(p, tight);
    CHECK(rel(t.er1.value, base.er1.value) < 1e-10);
    CHECK(rel(t.er2.value, base.er2.value) < 1e-10);
    CHECK(rel(t.er3.value, base.er3.value) < 1e-10);
    CHECK(std::fabs(t.outage.p_out - base.outage.p_out) < 1e-12);
    QuadratureControl loose;
    loose.tail_cut = 1e-9;
    const QuadBreakdown l = evaluate_quad(p, loose);
    CHECK(rel(l.er2.value, base.er2.value) < 1e-8);
}

TEST_CASE("two-dimensional quadrant integral agrees with the case split") {
    for (const SystemConfig& c : {small_config(), point(0.8, 0.8, 10.0), point(0.5, 0.5, 3.0)}) {
        const ClosedFormParams p = closed_form_params(c);
        const QuadBreakdown q = evaluate_quad(p);
        const Estimate e = ergodic_rate_2d(p);
        CAPTURE(p.k_p);
        CHECK(rel(e.value, q.er_total) < 1e-8);
        const RegionProbabilities rp = region_probabilities_2d(p);
        CHECK(std::fabs(rp.case1 + rp.case2 + rp.case3 - 1.0) < 1e-9);
        CHECK(std::fabs(rp.case1 - std::exp(q.outage.ln_success)) < 1e-9);
        CHECK(std::fabs(rp.case3 - specfun::gamma_p(p.k_p, p.tau1)) < 1e-9);
    }
    SystemConfig full = small_config();
    full.case3_full_surface = true;
    CHECK_THROWS_AS(ergodic_rate_2d(closed_form_params(full)), DomainError);
}

TEST_CASE("real shapes differ from integer shapes only through k") {
    const ClosedFormParams p = closed_form_params(SystemConfig{});
    const Estimate a = er3_quad(p, {}, ShapeMode::real);
    const Estimate b = er3_quad(p.with_integer_shapes(), {}, ShapeMode::real);
    const Estimate c = er3_quad(p, {}, ShapeMode::integer);
    CHECK(rel(b.value, c.value) < 1e-13);
    CHECK(a.value != c.value);
    CHECK(rel(a.value, 8.0835e-4) < 1e-4);
}

TEST_CASE("degenerate and invalid inputs") {
    const ClosedFormParams p = closed_form_params(point(1.0, 0.3, 3.0));
    CHECK(er2_quad(p).value == 0.0);
    const ClosedFormParams z = closed_form_params(point(0.7, 0.3, 0.0));
    CHECK(er3_quad(z).value == 0.0);
    CHECK(pout_quad(z).p_out == 0.0);
    QuadratureControl bad;
    bad.tail_cut = 2.0;
    CHECK_THROWS_AS(er1_quad(closed_form_params(SystemConfig{}), bad), DomainError);
    ClosedFormParams thin = closed_form_params(SystemConfig{});
    thin.k_s_real = 0.7;
    CHECK_THROWS_AS(er1_quad(thin, {}, ShapeMode::real), DomainError);
}
