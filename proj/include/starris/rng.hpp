#pragma once

#include <cstdint>

namespace starris {

/// SplitMix64, used to expand seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** 1.0 (Blackman and Vigna). Samplers below are written out
/// by hand so that streams do not depend on the standard library.
class Xoshiro256 {
public:
    static constexpr const char* algorithm = "xoshiro256**/splitmix64";

    explicit Xoshiro256(std::uint64_t seed);
    /// Stream for shard `index` of a run seeded with `seed`.
    static Xoshiro256 for_shard(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next();
    /// Advances by 2^128 draws.
    void jump();

    /// Uniform on (0, 1).
    double uniform();
    double normal();
    /// Gamma(shape, 1), Marsaglia and Tsang; boosted for shape < 1.
    double gamma(double shape);

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace starris
