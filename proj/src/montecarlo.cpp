#include "starris/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "starris/channel.hpp"
#include "starris/error.hpp"

namespace starris {

const char* to_string(FadingMode m) {
    return m == FadingMode::exact ? "exact" : "gamma_surrogate";
}

double sample_nakagami(double m, double Omega, Xoshiro256& rng) {
    return std::sqrt(rng.gamma(m) * (Omega / m));
}

GainSampler::GainSampler(const SystemConfig& cfg, FadingMode mode) : cfg_(cfg), mode_(mode) {
    cfg_.validate();
    if (mode_ == FadingMode::gamma_surrogate) {
        fit_p_ = gamma_fit(cfg_.N_r(), cfg_.m, cfg_.Omega, 1.0);
        fit_s_ = gamma_fit(cfg_.N_t(), cfg_.m, cfg_.Omega, 1.0);
        fit_s3_ = cfg_.case3_full_surface ? gamma_fit(cfg_.N, cfg_.m, cfg_.Omega, 1.0) : fit_s_;
    }
}

Gains GainSampler::draw(Xoshiro256& rng) const {
    Gains g;
    if (mode_ == FadingMode::gamma_surrogate) {
        g.g_p = rng.gamma(fit_p_.k_real) * fit_p_.theta_unit;
        g.g_s = rng.gamma(fit_s_.k_real) * fit_s_.theta_unit;
        g.g_s3 = cfg_.case3_full_surface ? rng.gamma(fit_s3_.k_real) * fit_s3_.theta_unit : g.g_s;
        return g;
    }
    const double scale = cfg_.Omega / cfg_.m;
    auto amplitude_sum = [&](int n) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::sqrt(rng.gamma(cfg_.m) * scale);
        return s;
    };
    const double ap = amplitude_sum(cfg_.N_r());
    const double as = amplitude_sum(cfg_.N_t());
    g.g_p = ap * ap;
    g.g_s = as * as;
    if (cfg_.case3_full_surface) {
        const double a3 = as + amplitude_sum(cfg_.N_r());
        g.g_s3 = a3 * a3;
    } else {
        g.g_s3 = g.g_s;
    }
    return g;
}

Gains realize_gains(const SystemConfig& cfg, Xoshiro256& rng, FadingMode mode) {
    return GainSampler(cfg, mode).draw(rng);
}

void McAccumulator::merge(const McAccumulator& o) {
    trials += o.trials;
    strict += o.strict;
    case3 += o.case3;
    for (int i = 0; i < 3; ++i) {
        counts[i] += o.counts[i];
        rate_sum[i].add(o.rate_sum[i].value());
        rate_sq_case[i].add(o.rate_sq_case[i].value());
        gp_pow[i].add(o.gp_pow[i].value());
        gs_pow[i].add(o.gs_pow[i].value());
    }
    rate_sq.add(o.rate_sq.value());
}

std::uint64_t shard_size(std::uint64_t trials, unsigned shards, unsigned s) {
    return trials / shards + (s < trials % shards ? 1 : 0);
}

McAccumulator run_mc_shard(const SystemConfig& cfg, std::uint64_t count, std::uint64_t seed,
                           unsigned index, FadingMode mode) {
    const ClosedFormParams p = closed_form_params(cfg);
    const EffectivePowers L{p.L_p, p.L_s};
    const GainSampler sampler(cfg, mode);
    Xoshiro256 rng = Xoshiro256::for_shard(seed, index);
    McAccumulator acc;
    for (std::uint64_t t = 0; t < count; ++t) {
        const Gains g = sampler.draw(rng);
        const CaseLabel label = classify_case(g.g_p, g.g_s, L, cfg.alpha, cfg.gamma_p_target);
        const double r = su_rate_instant(label, g.g_p, g.g_s, g.g_s3, p);
        const int k = static_cast<int>(label);
        ++acc.counts[k];
        acc.rate_sum[k].add(r);
        acc.rate_sq.add(r * r);
        acc.rate_sq_case[k].add(r * r);
        if (label != CaseLabel::CaseI) ++acc.strict;
        if (label == CaseLabel::CaseIII) ++acc.case3;
        const double p2 = g.g_p * g.g_p, s2 = g.g_s * g.g_s;
        acc.gp_pow[0].add(g.g_p);
        acc.gp_pow[1].add(p2);
        acc.gp_pow[2].add(p2 * p2);
        acc.gs_pow[0].add(g.g_s);
        acc.gs_pow[1].add(s2);
        acc.gs_pow[2].add(s2 * s2);
    }
    acc.trials = count;
    return acc;
}

namespace {

GainMoments moments(const std::array<specfun::KahanSum, 3>& pw, double n) {
    GainMoments m;
    m.m1 = pw[0].value() / n;
    m.m2 = pw[1].value() / n;
    if (n > 1.0) {
        const double v1 = std::max(0.0, (m.m2 - m.m1 * m.m1) * n / (n - 1.0));
        const double v2 = std::max(0.0, (pw[2].value() / n - m.m2 * m.m2) * n / (n - 1.0));
        m.se_m1 = std::sqrt(v1 / n);
        m.se_m2 = std::sqrt(v2 / n);
    }
    return m;
}

}  // namespace

McReport finalize(const McAccumulator& acc, const ClosedFormParams& p) {
    McReport r;
    r.trials = acc.trials;
    if (acc.trials == 0) return r;
    const double n = static_cast<double>(acc.trials);
    r.er1 = acc.rate_sum[0].value() / n;
    r.er2 = acc.rate_sum[1].value() / n;
    r.er3 = acc.rate_sum[2].value() / n;
    const double total = acc.rate_sum[0].value() + acc.rate_sum[1].value() + acc.rate_sum[2].value();
    r.er_total = total / n;
    if (acc.trials > 1) {
        const double var = std::max(0.0, (acc.rate_sq.value() - total * r.er_total) / (n - 1.0));
        r.se_er = std::sqrt(var / n);
        double* se[3] = {&r.se_er1, &r.se_er2, &r.se_er3};
        for (int i = 0; i < 3; ++i) {
            const double s = acc.rate_sum[i].value();
            const double v = std::max(0.0, (acc.rate_sq_case[i].value() - s * s / n) / (n - 1.0));
            *se[i] = std::sqrt(v / n);
        }
    }
    r.p_out_strict = static_cast<double>(acc.strict) / n;
    r.p_out_caseIII = static_cast<double>(acc.case3) / n;
    r.r_out = std::log2(1.0 + p.gamma_hat_p) * (1.0 - r.p_out_strict);
    r.case_counts = acc.counts;
    for (int i = 0; i < 3; ++i) r.case_freqs[i] = static_cast<double>(acc.counts[i]) / n;
    r.gain_p = moments(acc.gp_pow, n);
    r.gain_s = moments(acc.gs_pow, n);
    return r;
}

McReport run_mc(const SystemConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                FadingMode mode, unsigned shards, unsigned threads) {
    cfg.validate();
    if (trials < 1) throw DomainError("run_mc: trials must be >= 1");
    if (shards < 1) throw DomainError("run_mc: shards must be >= 1");
    const ClosedFormParams p = closed_form_params(cfg);
    std::vector<McAccumulator> parts(shards);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, shards);
    std::atomic<unsigned> next{0};
    auto worker = [&] {
        for (unsigned s; (s = next.fetch_add(1)) < shards;)
            parts[s] = run_mc_shard(cfg, shard_size(trials, shards, s), seed, s, mode);
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    McAccumulator total;
    for (const auto& a : parts) total.merge(a);
    McReport r = finalize(total, p);
    r.seed = seed;
    r.shards = shards;
    r.mode = mode;
    return r;
}

NomaBenchmark run_noma_benchmark(const SystemConfig& cfg, std::uint64_t trials,
                                 std::uint64_t seed, FadingMode mode) {
    SystemConfig c0 = cfg, c1 = cfg;
    c0.alpha = 0.0;
    c1.alpha = 1.0;
    return {run_mc(c0, trials, seed, mode), run_mc(c1, trials, seed, mode)};
}

}  // namespace starris
