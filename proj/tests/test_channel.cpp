#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "starris/channel.hpp"
#include "starris/error.hpp"

using namespace starris;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

// E[(sum_i x_i)^p] for i.i.d. x_i with raw moments mom[0..p], by expanding
// over all index tuples (n^p terms).
double brute_power_moment(int n, int p, const std::vector<double>& mom) {
    std::vector<int> idx(p, 0);
    double total = 0.0;
    for (;;) {
        std::vector<int> count(n, 0);
        for (int i : idx) ++count[i];
        double term = 1.0;
        for (int c : count) term *= mom[c];
        total += term;
        int k = 0;
        while (k < p && ++idx[k] == n) idx[k++] = 0;
        if (k == p) break;
    }
    return total;
}

}  // namespace

TEST_CASE("Nakagami moments") {
    CHECK(rel(nakagami_moment(1, 3.0, 1.0), 0.95936878869983295795) < 1e-14);
    CHECK(rel(nakagami_moment(3, 1.5, 2.0), 3.4745067513096527757) < 1e-14);
    CHECK(nakagami_moment(2, 2.7, 4.5) == 4.5);
    CHECK(nakagami_moment(0, 2.7, 4.5) == 1.0);
    // Rayleigh
    CHECK(rel(nakagami_moment(1, 1.0, 2.0), std::sqrt(M_PI * 2.0) / 2.0) < 1e-14);
    CHECK_THROWS_AS(nakagami_moment(1, 0.3, 1.0), DomainError);
    CHECK_THROWS_AS(nakagami_moment(1, 1.0, 0.0), DomainError);
}

TEST_CASE("coherent sum moments and Gamma fit reference values") {
    struct Ref {
        int n;
        double m, Omega, I1, I2, k, theta;
    };
    const Ref refs[] = {
        {120, 3.0, 1.0, 13263.147390604174056, 176418122.52985181716, 346.93466332667641471,
         38.229525016113739803},
        {280, 3.0, 1.0, 72180.747489775775719, 5216497452.8006151205, 809.37443812291618131,
         89.180908229787705544},
        {400, 3.0, 1.0, 147294.00024792900416, 21714286946.099141992, 1156.2042835115958799,
         127.39444261577305729},
        {2, 0.5, 1.0, 3.2732395447351626862, 22.185916357881301489, 0.93394926231409279077,
         3.5047295145615227351},
        {7, 1.7, 2.5, 108.31663080587520171, 12770.963998343587885, 11.297847491308505211,
         9.5873688230615405173},
    };
    for (const Ref& r : refs) {
        CAPTURE(r.n);
        const SumMoments s = coherent_sum_moments(r.n, r.m, r.Omega);
        CHECK(rel(s.I1, r.I1) < 1e-13);
        CHECK(rel(s.I2, r.I2) < 1e-13);
        const GammaFit g = gamma_fit(r.n, r.m, r.Omega, 1.0);
        CHECK(rel(g.k_real, r.k) < 1e-12);
        CHECK(rel(g.theta_unit, r.theta) < 1e-12);
        CHECK(g.k_int == std::max(1, static_cast<int>(std::lround(r.k))));
    }
}

TEST_CASE("single element reduces to Gamma(m, Omega/m)") {
    const GammaFit g = gamma_fit(1, 3.0, 1.0, 1.0);
    CHECK(g.k_real == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(g.theta_unit == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(g.k_int == 3);
}

TEST_CASE("Gamma fit scales theta by rho^2 and keeps the shape") {
    const GammaFit a = gamma_fit(50, 2.0, 1.5, 1.0);
    const GammaFit b = gamma_fit(50, 2.0, 1.5, 0.6);
    CHECK(a.k_real == b.k_real);
    CHECK(rel(b.theta, 0.36 * a.theta_unit) < 1e-15);
    CHECK(b.theta_unit == a.theta_unit);
    CHECK_THROWS_AS(gamma_fit(50, 2.0, 1.5, 0.0), DomainError);
    CHECK_THROWS_AS(gamma_fit(50, 2.0, 1.5, 1.2), DomainError);
    CHECK_THROWS_AS(coherent_sum_moments(0, 2.0, 1.5), DomainError);
}

TEST_CASE("property: moment formula matches brute-force expansion") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> um(0.5, 6.0), uo(0.2, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double m = um(gen), Om = uo(gen);
        std::vector<double> mom(5);
        for (int i = 0; i <= 4; ++i) mom[i] = nakagami_moment(i, m, Om);
        for (int n = 1; n <= 6; ++n) {
            const SumMoments s = coherent_sum_moments(n, m, Om);
            CHECK(rel(s.I1, brute_power_moment(n, 2, mom)) < 1e-13);
            CHECK(rel(s.I2, brute_power_moment(n, 4, mom)) < 1e-13);
        }
    }
}

TEST_CASE("property: fitted Gamma reproduces both moments") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> um(0.5, 6.0), uo(0.2, 3.0);
    std::uniform_int_distribution<int> un(1, 2000);
    for (int trial = 0; trial < 200; ++trial) {
        const double m = um(gen), Om = uo(gen);
        const int n = un(gen);
        const GammaFit g = gamma_fit(n, m, Om, 1.0);
        CHECK(rel(g.k_real * g.theta_unit, g.I1) < 1e-12);
        // E[X^2] = k (k + 1) theta^2
        CHECK(rel(g.k_real * (g.k_real + 1.0) * g.theta_unit * g.theta_unit, g.I2) < 1e-10);
        CHECK(g.k_real > 0.0);
    }
}

TEST_CASE("path loss and effective powers at the defaults") {
    const SystemConfig cfg;
    CHECK(rel(pathloss(10.0, cfg), 1e-4) < 1e-15);
    const EffectivePowers L = effective_powers(cfg);
    CHECK(rel(L.L_p, 0.00027777777777777777778) < 1e-14);
    CHECK(rel(L.L_s, 0.0017361111111111111111) < 1e-14);
    SystemConfig edge = cfg;
    edge.omega = 0.0;
    CHECK_THROWS_AS(effective_powers(edge), DomainError);
    edge.omega = 1.0;
    CHECK_THROWS_AS(effective_powers(edge), DomainError);
    CHECK_THROWS_AS(pathloss(0.0, cfg), DomainError);
}

TEST_CASE("config defaults and element split") {
    const SystemConfig cfg;
    CHECK(cfg.N_r() == 120);
    CHECK(cfg.N_t() == 280);
    CHECK_NOTHROW(cfg.validate());
    SystemConfig bad = cfg;
    bad.beta = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.alpha = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.m = 0.4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config JSON round trip, aliases and errors") {
    SystemConfig cfg;
    cfg.alpha = 0.35;
    cfg.N = 64;
    cfg.case3_full_surface = true;
    const SystemConfig back = config_from_json(config_to_json(cfg));
    CHECK(back.alpha == 0.35);
    CHECK(back.N == 64);
    CHECK(back.case3_full_surface);

    const SystemConfig db = parse_config(R"({"P_p_dBm": 10, "P_s_dBm": 30, "sigma2_dB": -60})");
    CHECK(rel(db.P_p, 0.01) < 1e-14);
    CHECK(rel(db.P_s, 1.0) < 1e-14);
    CHECK(rel(db.sigma2, 1e-6) < 1e-14);

    CHECK_THROWS_AS(parse_config(R"({"P_p": 0.01, "P_p_dBm": 10})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"alpah": 0.5})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"N": 40.5})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"alpha": "high"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"([1, 2])"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
    try {
        parse_config("{\n  \"alpha\": 0.5,\n  \"beta\": ]\n}");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3, column 11") != std::string::npos);
    }
}
