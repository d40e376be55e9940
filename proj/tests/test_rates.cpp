#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "starris/appendix.hpp"
#include "starris/error.hpp"
#include "starris/rates.hpp"

using namespace starris;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

SystemConfig point(double alpha, double beta, double g) {
    SystemConfig c;
    c.alpha = alpha;
    c.beta = beta;
    c.gamma_p_target = g;
    return c;
}

// k_p = k_s = 7, c = 0.25: small enough for the four-integral route
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

}  // namespace

TEST_CASE("analytic symbols at the defaults") {
    const ClosedFormParams p = closed_form_params(SystemConfig{});
    CHECK(p.k_p == 347);
    CHECK(p.k_s == 809);
    CHECK(rel(p.theta_p, 38.229525016113739803) < 1e-12);
    CHECK(rel(p.theta_s, 89.180908229787705544) < 1e-12);
    CHECK(rel(p.tau1, 3.0 / (0.00027777777777777777778 * 38.229525016113739803)) < 1e-12);
    CHECK(rel(p.zeta1, 0.3 + 0.7 / 4.0) < 1e-15);
    CHECK(rel(p.zeta2, 0.7 / (0.3 * 4.0)) < 1e-15);
    CHECK(rel(p.tau2, p.tau1 / (1.0 + p.zeta2)) < 1e-15);
    CHECK(rel(p.c(), 13.121863) < 1e-7);
    CHECK(p.k_s3 == p.k_s);
    CHECK(p.theta_s3 == p.theta_s);

    SystemConfig full;
    full.case3_full_surface = true;
    const ClosedFormParams q = closed_form_params(full);
    CHECK(q.k_s3 == 1156);
    CHECK(rel(q.theta_s3, 127.39444261577305729) < 1e-12);

    const ClosedFormParams r = p.with_integer_shapes();
    CHECK(r.k_p_real == 347.0);
    CHECK(r.k_s_real == 809.0);
}

TEST_CASE("alpha = 1 leaves no Case II band") {
    const ClosedFormParams p = closed_form_params(point(1.0, 0.3, 3.0));
    CHECK(std::isinf(p.zeta2));
    CHECK(p.tau2 == 0.0);
    CHECK(p.c() == 0.0);
    std::string route;
    CHECK(er2_closed(p, {}, &route) == 0.0);
    CHECK(er2_closed_ln(p) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("case classification boundaries") {
    const EffectivePowers L{0.5, 2.0};
    const double alpha = 0.6, g = 3.0;
    // Case I iff L_p g_p >= g ((1 - alpha) L_s g_s + 1)
    const double gs = 1.5;
    const double edge = g * ((1.0 - alpha) * L.L_s * gs + 1.0) / L.L_p;
    CHECK(classify_case(edge, gs, L, alpha, g) == CaseLabel::CaseI);
    CHECK(classify_case(std::nextafter(edge, 0.0), gs, L, alpha, g) == CaseLabel::CaseII);
    const double floor_ = g / L.L_p;
    CHECK(classify_case(floor_, gs, L, alpha, g) == CaseLabel::CaseII);
    CHECK(classify_case(std::nextafter(floor_, 0.0), gs, L, alpha, g) == CaseLabel::CaseIII);
    CHECK(classify_case(0.0, 0.0, L, alpha, 0.0) == CaseLabel::CaseI);
    CHECK(std::string(to_string(CaseLabel::CaseII)) == "CaseII");
}

TEST_CASE("instantaneous SINRs and rates") {
    const EffectivePowers L{0.5, 2.0};
    const Sinrs s = instantaneous_sinrs(10.0, 3.0, L, 0.6);
    CHECK(s.gamma_s1 == doctest::Approx(0.6 * 6.0 / (0.4 * 6.0 + 5.0 + 1.0)));
    CHECK(s.gamma_p == doctest::Approx(5.0 / (0.4 * 6.0 + 1.0)));
    CHECK(s.gamma_s2 == doctest::Approx(0.4 * 6.0));

    ClosedFormParams p = closed_form_params(point(0.6, 0.3, 3.0));
    const double gs = 1e5;
    CHECK(rel(su_rate_instant(CaseLabel::CaseI, 0.0, gs, p), std::log2(1.0 + p.zeta1 * p.L_s * gs)) < 1e-14);
    CHECK(rel(su_rate_instant(CaseLabel::CaseIII, 0.0, gs, p), std::log2(1.0 + p.L_s * gs)) < 1e-14);
    CHECK(rel(su_rate_instant(CaseLabel::CaseIII, 0.0, gs, 2.0 * gs, p), std::log2(1.0 + 2.0 * p.L_s * gs)) < 1e-14);
    const double gp = 2.0 * p.gamma_hat_p / p.L_p;
    CHECK(rel(su_rate_instant(CaseLabel::CaseII, gp, 0.0, p), std::log2(1.0 + (1.0 + p.zeta2))) < 1e-14);
    CHECK_THROWS_AS(su_rate_instant(CaseLabel::CaseII, 0.5 * p.gamma_hat_p / p.L_p, 0.0, p), DomainError);
}

TEST_CASE("property: merged rate forms equal the two-message sums") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> ua(0.0, 0.999), ue(-2.0, 2.0), uu(-4.0, 8.0), uv(-3.0, 6.0);
    for (int i = 0; i < 5000; ++i) {
        const double a = ua(gen), g = std::pow(10.0, ue(gen));
        const double z1 = (1.0 - a) + a / (1.0 + g);
        const double z2 = a / ((1.0 - a) * (1.0 + g));
        const double u = std::pow(10.0, uu(gen));
        CHECK(rel(su_rate_case1_two_term(u, a, g), std::log1p(z1 * u) / std::log(2.0)) < 1e-12);
        const double v = g * (1.0 + std::pow(10.0, uv(gen)));
        CHECK(rel(su_rate_case2_two_term(v, a, g), std::log1p((1.0 + z2) * (v - g) / g) / std::log(2.0)) <
              1e-12);
    }
}

TEST_CASE("closed forms against reference integrals") {
    // references: high-precision quadrature of the defining one- and
    // two-dimensional integrals at integer shapes
    struct Ref {
        SystemConfig cfg;
        double ln_er1, er2, er3, ln_success;
    };
    const Ref refs[] = {
        {SystemConfig{}, -1664.1656621893337222, 0.44091890091472267435, 0.00079684196602175173568,
         -1665.1683756731783995},
        {point(0.8, 0.8, 10.0), -5.2172426797426067621, 1.6749242548723645425, 2.8315134878953761208e-140,
         -5.7756334773003185022},
        {point(0.2, 0.2, 1.0), -2365.8929134617760859, 0.77476118714738654041, 2.0536393260673211466e-11,
         -2367.0734759188569495},
        {small_config(), -1.2883767351421620748, 0.096349409904891716044, 0.17817536570834253625,
         -0.71044152539271040475},
    };
    for (const Ref& r : refs) {
        const ClosedFormParams p = closed_form_params(r.cfg);
        CAPTURE(p.k_p);
        CAPTURE(p.k_s);
        // absolute error in the log is relative error in the value
        CHECK(std::fabs(er1_closed_ln(p) - r.ln_er1) < 1e-10);
        CHECK(rel(er2_closed(p), r.er2) < 1e-10);
        CHECK(rel(er3_closed(p), r.er3) < 1e-10);
        const Outage o = pu_outage(p);
        CHECK(std::fabs(o.ln_success - r.ln_success) < 1e-10);
        CHECK(std::fabs(o.p_out + std::exp(r.ln_success) - 1.0) < 1e-12);
    }
    std::string route;
    er2_closed(closed_form_params(small_config()), {}, &route);
    CHECK(route == "appendix");
    er2_closed(closed_form_params(SystemConfig{}), {}, &route);
    CHECK(route == "expanded");
}

TEST_CASE("er2 routes agree where both apply") {
    for (double alpha : {0.3, 0.5, 0.8})
        for (double g : {0.5, 1.0, 2.0}) {
            SystemConfig c = small_config();
            c.alpha = alpha;
            c.gamma_p_target = g;
            const ClosedFormParams p = closed_form_params(c);
            REQUIRE(p.c() < 1.0);
            double cond = 0.0;
            const double a = er2_closed_appendix(p, {}, &cond);
            const double e = std::exp(er2_closed_expanded_ln(p));
            CAPTURE(alpha);
            CAPTURE(g);
            CHECK(rel(a, e) < 1e-15 * cond + 1e-13);
        }
}

TEST_CASE("totals, outage rate and fault hooks") {
    const ClosedFormParams p = closed_form_params(point(0.8, 0.8, 10.0));
    const RateBreakdown r = er_total(p);
    CHECK(r.er_total == doctest::Approx(r.er1 + r.er2 + r.er3).epsilon(1e-15));
    CHECK(rel(r.r_out, std::log2(11.0) * std::exp(r.ln_success)) < 1e-14);
    CHECK(rel(r.er1, std::exp(r.ln_er1)) < 1e-15);
    ClosedFormHooks h;
    h.er2_scale = 1.5;
    h.p_out_shift = -0.1;
    const RateBreakdown s = er_total(p, {}, h);
    CHECK(rel(s.er2, 1.5 * r.er2) < 1e-14);
    CHECK(s.er1 == r.er1);
    CHECK(std::fabs(s.p_out - (r.p_out - 0.1)) < 1e-14);
}

TEST_CASE("zero target SINR: PU never in outage") {
    const ClosedFormParams p = closed_form_params(point(0.7, 0.3, 0.0));
    const RateBreakdown r = er_total(p);
    CHECK(r.p_out == 0.0);
    CHECK(r.r_out == 0.0);
    CHECK(r.er2 == 0.0);
    CHECK(r.er3 == 0.0);
    CHECK(r.er1 > 0.0);
}

TEST_CASE("property: components nonnegative and finite across the sweep ranges") {
    for (double beta : {0.2, 0.4, 0.6, 0.8}) {
        for (double alpha = 0.0; alpha <= 1.0001; alpha += 0.1) {
            const RateBreakdown r = er_total(closed_form_params(point(alpha, beta, 3.0)));
            for (double v : {r.er1, r.er2, r.er3, r.er_total, r.p_out, r.r_out}) {
                CHECK(std::isfinite(v));
                CHECK(v >= 0.0);
            }
            CHECK(r.p_out <= 1.0);
        }
        for (double g : {0.5, 1.0, 3.0, 10.0, 30.0, 50.0}) {
            const RateBreakdown r = er_total(closed_form_params(point(0.7, beta, g)));
            CHECK(std::isfinite(r.er_total));
            CHECK(r.er_total >= 0.0);
        }
        for (double w = 0.05; w < 0.96; w += 0.1) {
            SystemConfig c = point(0.7, beta, 3.0);
            c.omega = w;
            const RateBreakdown r = er_total(closed_form_params(c));
            CHECK(std::isfinite(r.er_total));
            CHECK(r.er_total >= 0.0);
        }
    }
}

TEST_CASE("property: outage probability rises with the target SINR") {
    double prev = -1.0;
    for (double g = 0.1; g < 20.0; g *= 1.5) {
        SystemConfig c = point(0.7, 0.7, g);
        const Outage o = pu_outage(closed_form_params(c));
        // 1 - (sum near 1) carries ~1e-14 absolute noise
        CHECK(o.p_out >= prev - 1e-13);
        prev = o.p_out;
    }
}
