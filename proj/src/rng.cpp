#include "starris/rng.hpp"

#include <cmath>

namespace starris {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Xoshiro256::Xoshiro256(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
}

Xoshiro256 Xoshiro256::for_shard(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t st = seed;
    std::uint64_t mixed = splitmix64(st);
    st = mixed ^ (index * 0xd1b54a32d192ed03ULL);
    return Xoshiro256(splitmix64(st));
}

std::uint64_t Xoshiro256::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

void Xoshiro256::jump() {
    static constexpr std::uint64_t J[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                          0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
    std::uint64_t t[4] = {0, 0, 0, 0};
    for (std::uint64_t j : J)
        for (int b = 0; b < 64; ++b) {
            if (j & (std::uint64_t{1} << b))
                for (int i = 0; i < 4; ++i) t[i] ^= s_[i];
            next();
        }
    for (int i = 0; i < 4; ++i) s_[i] = t[i];
    has_spare_ = false;
}

double Xoshiro256::uniform() {
    // 53 random bits, shifted off zero
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Xoshiro256::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double x, y, r;
    do {
        x = 2.0 * uniform() - 1.0;
        y = 2.0 * uniform() - 1.0;
        r = x * x + y * y;
    } while (r >= 1.0 || r == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r) / r);
    spare_ = y * f;
    has_spare_ = true;
    return x * f;
}

double Xoshiro256::gamma(double shape) {
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace starris
