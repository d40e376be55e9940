#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "starris/config.hpp"
#include "starris/rates.hpp"
#include "starris/rng.hpp"

namespace starris {

enum class FadingMode { exact, gamma_surrogate };

const char* to_string(FadingMode m);

/// |h| for h ~ Nakagami(m, Omega).
double sample_nakagami(double m, double Omega, Xoshiro256& rng);

/// Channel gains at rho = 1. g_s3 is the SU gain in the outage regime:
/// equal to g_s unless case3_full_surface is set, in which case it sums
/// over all N elements (the N_t transmitting amplitudes plus N_r more).
struct Gains {
    double g_p = 0.0;
    double g_s = 0.0;
    double g_s3 = 0.0;
};

class GainSampler {
public:
    GainSampler(const SystemConfig& cfg, FadingMode mode);
    Gains draw(Xoshiro256& rng) const;

private:
    SystemConfig cfg_;
    FadingMode mode_;
    GammaFit fit_p_, fit_s_, fit_s3_;
};

Gains realize_gains(const SystemConfig& cfg, Xoshiro256& rng, FadingMode mode);

struct GainMoments {
    double m1 = 0.0;  // mean of g
    double m2 = 0.0;  // mean of g^2
    double se_m1 = 0.0;
    double se_m2 = 0.0;
};

struct McReport {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    unsigned shards = 0;
    std::string rng = Xoshiro256::algorithm;
    FadingMode mode = FadingMode::exact;

    double er_total = 0.0;
    double er1 = 0.0;
    double er2 = 0.0;
    double er3 = 0.0;
    double se_er = 0.0;
    double se_er1 = 0.0;
    double se_er2 = 0.0;
    double se_er3 = 0.0;
    double p_out_strict = 0.0;   // Case II or III
    double p_out_caseIII = 0.0;  // Case III only
    double r_out = 0.0;          // log2(1 + gamma_hat) (1 - p_out_strict)
    std::array<std::uint64_t, 3> case_counts{};
    std::array<double, 3> case_freqs{};
    GainMoments gain_p, gain_s;
};

/// Per-shard running sums. Merging is in shard order, so reports depend
/// only on (cfg, trials, seed, shards, mode).
struct McAccumulator {
    std::uint64_t trials = 0;
    std::uint64_t strict = 0;
    std::uint64_t case3 = 0;
    std::array<std::uint64_t, 3> counts{};
    std::array<specfun::KahanSum, 3> rate_sum;
    specfun::KahanSum rate_sq;
    std::array<specfun::KahanSum, 3> rate_sq_case;
    std::array<specfun::KahanSum, 3> gp_pow;  // g, g^2, g^4
    std::array<specfun::KahanSum, 3> gs_pow;

    void merge(const McAccumulator& o);
};

/// Runs trials [first, first + count) of shard `index`.
McAccumulator run_mc_shard(const SystemConfig& cfg, std::uint64_t count, std::uint64_t seed,
                           unsigned index, FadingMode mode);
McReport finalize(const McAccumulator& acc, const ClosedFormParams& p);

constexpr unsigned kDefaultShards = 16;

/// Shards run concurrently on up to `threads` workers (0 = hardware).
McReport run_mc(const SystemConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                FadingMode mode = FadingMode::exact, unsigned shards = kDefaultShards,
                unsigned threads = 0);

/// Shard s gets trials/shards, plus one if s < trials % shards.
std::uint64_t shard_size(std::uint64_t trials, unsigned shards, unsigned s);

struct NomaBenchmark {
    McReport alpha0;
    McReport alpha1;
};

/// The same pipeline at the two unsplit endpoints alpha = 0 and alpha = 1.
NomaBenchmark run_noma_benchmark(const SystemConfig& cfg, std::uint64_t trials,
                                 std::uint64_t seed, FadingMode mode = FadingMode::exact);

}  // namespace starris
