#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "starris/channel.hpp"
#include "starris/montecarlo.hpp"
#include "starris/oracle.hpp"

using namespace starris;

namespace {

struct Stats {
    double mean = 0.0, var = 0.0;
    double se() const { return std::sqrt(var / n); }
    double n = 0.0;
};

template <class F>
Stats sample_stats(int n, F draw) {
    specfun::KahanSum s, s2;
    for (int i = 0; i < n; ++i) {
        const double x = draw();
        s.add(x);
        s2.add(x * x);
    }
    Stats st;
    st.n = n;
    st.mean = s.value() / n;
    st.var = (s2.value() / n - st.mean * st.mean) * n / (n - 1.0);
    return st;
}

SystemConfig point(double alpha, double beta, double g) {
    SystemConfig c;
    c.alpha = alpha;
    c.beta = beta;
    c.gamma_p_target = g;
    return c;
}

bool same(const McReport& a, const McReport& b) {
    return a.trials == b.trials && a.er_total == b.er_total && a.er1 == b.er1 && a.er2 == b.er2 &&
           a.er3 == b.er3 && a.se_er == b.se_er && a.p_out_strict == b.p_out_strict &&
           a.p_out_caseIII == b.p_out_caseIII && a.case_counts == b.case_counts &&
           a.gain_p.m1 == b.gain_p.m1 && a.gain_p.m2 == b.gain_p.m2 && a.gain_s.m1 == b.gain_s.m1 &&
           a.gain_s.m2 == b.gain_s.m2;
}

}  // namespace

TEST_CASE("generator reference outputs and streams") {
    std::uint64_t st = 0;
    CHECK(splitmix64(st) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(st) == 0x6e789e6aa1b965f4ULL);
    Xoshiro256 a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Xoshiro256 c(42);
    c.jump();
    Xoshiro256 d(42);
    CHECK(c.next() != d.next());
    Xoshiro256 s0 = Xoshiro256::for_shard(7, 0), s1 = Xoshiro256::for_shard(7, 1);
    CHECK(s0.next() != s1.next());
    CHECK(std::string(Xoshiro256::algorithm) == "xoshiro256**/splitmix64");
    for (int i = 0; i < 10000; ++i) {
        const double u = a.uniform();
        CHECK((u > 0.0 && u < 1.0));
    }
}

TEST_CASE("normal and gamma samplers") {
    Xoshiro256 rng(1);
    const Stats z = sample_stats(200000, [&] { return rng.normal(); });
    CHECK(std::fabs(z.mean) < 3.0 * z.se());
    CHECK(std::fabs(z.var - 1.0) < 0.02);
    for (double k : {0.5, 1.0, 3.0, 809.37}) {
        const Stats g = sample_stats(200000, [&] { return rng.gamma(k); });
        CAPTURE(k);
        CHECK(std::fabs(g.mean - k) < 3.0 * g.se());
        CHECK(std::fabs(g.var - k) < 0.03 * k);
    }
}

TEST_CASE("Nakagami amplitudes") {
    Xoshiro256 rng(3);
    const int n = 1000000;
    const Stats p2 = sample_stats(n, [&] {
        const double h = sample_nakagami(2.5, 1.7, rng);
        return h * h;
    });
    CHECK(std::fabs(p2.mean - 1.7) < 3.0 * p2.se());
    const Stats ray = sample_stats(n, [&] { return sample_nakagami(1.0, 2.0, rng); });
    CHECK(std::fabs(ray.mean - std::sqrt(M_PI * 2.0) / 2.0) < 3.0 * ray.se());
    const Stats m3 = sample_stats(n, [&] { return sample_nakagami(3.0, 1.0, rng); });
    CHECK(std::fabs(m3.mean - nakagami_moment(1, 3.0, 1.0)) < 3.0 * m3.se());
    CHECK(std::fabs(m3.mean - 0.95937) < 3.0 * m3.se() + 1e-5);
}

TEST_CASE("single-element gain follows Gamma(m, Omega/m)") {
    SystemConfig c;
    c.N = 2;
    c.beta = 0.5;
    c.m = 2.3;
    c.Omega = 1.4;
    Xoshiro256 rng(9);
    const GainSampler s(c, FadingMode::exact);
    const int n = 100000;
    std::vector<double> x(n);
    for (auto& v : x) v = s.draw(rng).g_p;
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double F = specfun::gamma_p(c.m, x[i] * c.m / c.Omega);
        ks = std::max({ks, std::fabs(F - static_cast<double>(i) / n), std::fabs(F - (i + 1.0) / n)});
    }
    CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gain moments: exact sums and the Gamma surrogate") {
    const SystemConfig cfg;
    const GammaFit fp = gamma_fit(cfg.N_r(), cfg.m, cfg.Omega, 1.0);
    const McReport ex = run_mc(cfg, 100000, 11, FadingMode::exact);
    CHECK(std::fabs(ex.gain_p.m1 - fp.I1) < 3.0 * ex.gain_p.se_m1);
    CHECK(std::fabs(ex.gain_p.m2 - fp.I2) < 3.0 * ex.gain_p.se_m2);
    const McReport sg = run_mc(cfg, 1000000, 12, FadingMode::gamma_surrogate);
    // surrogate: mean k theta, variance k theta^2
    CHECK(std::fabs(sg.gain_p.m1 - fp.k_real * fp.theta_unit) < 3.0 * sg.gain_p.se_m1);
    const double var = sg.gain_p.m2 - sg.gain_p.m1 * sg.gain_p.m1;
    CHECK(std::fabs(var / (fp.k_real * fp.theta_unit * fp.theta_unit) - 1.0) < 0.01);
}

TEST_CASE("report invariants") {
    for (const SystemConfig& c : {SystemConfig{}, point(0.8, 0.8, 10.0), point(0.3, 0.5, 1.0)}) {
        const McReport r = run_mc(c, 20000, 5);
        CHECK(std::fabs(r.case_freqs[0] + r.case_freqs[1] + r.case_freqs[2] - 1.0) < 1e-12);
        CHECK(r.p_out_caseIII <= r.p_out_strict);
        CHECK(std::fabs(r.er_total - (r.er1 + r.er2 + r.er3)) < 1e-12);
        CHECK(r.case_counts[0] + r.case_counts[1] + r.case_counts[2] == r.trials);
        CHECK(r.rng == Xoshiro256::algorithm);
    }
}

TEST_CASE("determinism and shard merge") {
    const SystemConfig cfg = point(0.8, 0.8, 10.0);
    CHECK(same(run_mc(cfg, 1, 3), run_mc(cfg, 1, 3)));
    const McReport a = run_mc(cfg, 30001, 3, FadingMode::exact, 8, 1);
    const McReport b = run_mc(cfg, 30001, 3, FadingMode::exact, 8, 4);
    CHECK(same(a, b));
    McAccumulator acc;
    std::uint64_t total = 0;
    for (unsigned s = 0; s < 8; ++s) {
        const std::uint64_t n = shard_size(30001, 8, s);
        total += n;
        acc.merge(run_mc_shard(cfg, n, 3, s, FadingMode::exact));
    }
    CHECK(total == 30001);
    CHECK(same(finalize(acc, closed_form_params(cfg)), a));
    CHECK(!same(run_mc(cfg, 30001, 4, FadingMode::exact, 8, 1), a));
}

TEST_CASE("exact fading against the closed forms at the defaults") {
    const SystemConfig cfg;
    const RateBreakdown cf = er_total(closed_form_params(cfg));
    const McReport r = run_mc(cfg, 100000, 21);
    CHECK(std::fabs(r.er_total - cf.er_total) / cf.er_total < 0.03);
    CHECK(std::fabs(r.p_out_strict - cf.p_out) < 0.01);
}

TEST_CASE("surrogate fading against the real-shape oracle") {
    const SystemConfig cfg = point(0.8, 0.8, 10.0);
    const ClosedFormParams p = closed_form_params(cfg);
    const QuadBreakdown q = evaluate_quad(p, {}, ShapeMode::real);
    const McReport r = run_mc(cfg, 1000000, 8, FadingMode::gamma_surrogate);
    CHECK(std::fabs(r.er_total - q.er_total) < 3.0 * r.se_er);
    const double se_p = std::sqrt(q.outage.p_out * (1.0 - q.outage.p_out) / r.trials);
    CHECK(std::fabs(r.p_out_strict - q.outage.p_out) < 3.0 * se_p);
    const RegionProbabilities rp = region_probabilities_2d(p, {}, ShapeMode::real);
    const double probs[3] = {rp.case1, rp.case2, rp.case3};
    for (int i = 0; i < 3; ++i) {
        const double se = std::sqrt(std::max(probs[i] * (1.0 - probs[i]), 1e-12) / r.trials);
        CAPTURE(i);
        CHECK(std::fabs(r.case_freqs[i] - probs[i]) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("unsplit benchmark endpoints") {
    SystemConfig cfg = point(0.7, 0.2, 3.0);
    const NomaBenchmark nb = run_noma_benchmark(cfg, 20000, 17);
    CHECK(nb.alpha0.er1 == 0.0);
    CHECK(nb.alpha1.case_counts[1] == 0);
    SystemConfig a0 = cfg;
    a0.alpha = 0.0;
    CHECK(same(nb.alpha0, run_mc(a0, 20000, 17)));
}
