#include <cmath>

#include "doctest.h"
#include "starris/appendix.hpp"
#include "starris/error.hpp"
#include "starris/quadrature.hpp"

using namespace starris;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

ClosedFormParams small_params(double alpha = 0.5, double g = 1.0) {
    SystemConfig c;
    c.N = 16;
    c.m = 1.0;
    c.beta = 0.5;
    c.alpha = alpha;
    c.gamma_p_target = g;
    c.omega = 0.5;
    c.P_p = 6.4;
    c.P_s = 3.2;
    return closed_form_params(c);
}

// E over V ~ Gamma(k_s, 1) of h(w), w = tau2 + c V
template <class H>
double expect_w(const ClosedFormParams& p, H h) {
    const double ks = p.k_s, c = p.c();
    const double lg = std::lgamma(ks);
    auto f = [&](double v) {
        if (v <= 0.0) return 0.0;
        return h(p.tau2 + c * v) * std::exp((ks - 1.0) * std::log(v) - v - lg);
    };
    quad::AdaptiveOptions opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-16;
    const double hi = ks + 60.0 * std::sqrt(ks) + 60.0;
    return quad::integrate(f, 0.0, hi, opt, {ks - 1.0}).value;
}

}  // namespace

TEST_CASE("appendix pieces against quadrature of their defining integrals") {
    const ClosedFormParams p = small_params();
    REQUIRE(p.c() < 1.0);
    for (int kappa = 1; kappa <= p.k_p; ++kappa) {
        CAPTURE(kappa);
        const double k = kappa;
        const double lgk = std::lgamma(k);
        const double i1 = expect_w(p, [&](double w) { return std::log(w) * specfun::gamma_p(k, w); });
        const double i2 = -std::log(p.tau2) * expect_w(p, [&](double w) { return specfun::gamma_p(k, w); });
        const double i3 = expect_w(p, [&](double w) {
            return std::exp(k * std::log(w) - 2.0 * std::log(k) - lgk) * specfun::hyp2f2(k, k, k + 1.0, k + 1.0, -w);
        });
        const double i4 = std::exp(k * std::log(p.tau2) - 2.0 * std::log(k) - lgk) *
                          specfun::hyp2f2(k, k, k + 1.0, k + 1.0, -p.tau2);
        CHECK(rel(appendix_i1(p, kappa), i1) < 1e-10);
        CHECK(rel(appendix_i2(p, kappa), i2) < 1e-10);
        CHECK(rel(appendix_i3(p, kappa), i3) < 1e-10);
        CHECK(rel(appendix_i4(p, kappa), i4) < 1e-12);
        const AppendixPieces pc = appendix_pieces(p, kappa);
        CHECK(pc.total() == doctest::Approx(pc.i1 + pc.i2 - pc.i3 + pc.i4));
        CHECK(pc.abs_sum >= std::fabs(pc.total()));
    }
}

TEST_CASE("property: pieces combine to the band integral") {
    // I1 + I2 - I3 + I4 = E[ int_{tau2}^{w} ln(t/tau2) t^{kappa-1} e^{-t} dt ] / Gamma(kappa)
    quad::AdaptiveOptions opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 1e-16;
    for (double target : {0.5, 2.0}) {
        const ClosedFormParams p = small_params(0.3, target);
        for (int kappa : {1, 3, p.k_p}) {
            const double k = kappa, lgk = std::lgamma(k);
            const double ref = expect_w(p, [&](double w) {
                auto f = [&](double t) { return std::log(t / p.tau2) * std::exp((k - 1.0) * std::log(t) - t - lgk); };
                return quad::integrate(f, p.tau2, w, opt).value;
            });
            CAPTURE(kappa);
            CAPTURE(target);
            // the pieces cancel heavily once tau2 sits well above kappa
            const AppendixPieces pc = appendix_pieces(p, kappa);
            CHECK(std::fabs(pc.total() - ref) <= 1e-12 * pc.abs_sum + 1e-9 * std::fabs(ref));
        }
    }
}

TEST_CASE("I3 series diverges once psi*theta_s reaches 1") {
    const ClosedFormParams p = closed_form_params(SystemConfig{});
    REQUIRE(p.c() > 1.0);
    CHECK_THROWS_AS(appendix_i3(p, 3), ConvergenceError);
    specfun::SeriesControl tight;
    tight.max_terms = 5;
    tight.rel_tol = 1e-15;
    const ClosedFormParams q = small_params();
    try {
        appendix_i3_terms(q, q.k_p, tight);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(std::string(e.what()).find("partial sums") != std::string::npos);
    }
}

TEST_CASE("appendix argument checks") {
    const ClosedFormParams p = small_params();
    CHECK_THROWS_AS(appendix_i1(p, 0), DomainError);
    ClosedFormParams q = p;
    q.tau2 = 0.0;
    CHECK_THROWS_AS(appendix_i2(q, 1), DomainError);
    q = p;
    q.psi = 0.0;
    double cond = 0.0;
    CHECK(er2_closed_appendix(q, {}, &cond) == 0.0);
}
