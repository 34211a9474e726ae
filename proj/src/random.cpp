#include "truncscore/random.hpp"

#include <cmath>
#include <stdexcept>

#include "truncscore/numerics.hpp"

namespace truncscore {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (int i = 0; i < 4; ++i) s_[i] = splitmix64(sm);
}

RandomSource RandomSource::child(std::uint64_t index) const {
    // Mix seed and index through splitmix64 so consecutive indices land far
    // apart in seed space.
    std::uint64_t sm = seed_ ^ 0xa0761d6478bd642fULL;
    std::uint64_t h = splitmix64(sm);
    sm = h + (index + 1) * 0x9e3779b97f4a7c15ULL;
    h = splitmix64(sm);
    return RandomSource(splitmix64(sm) ^ h);
}

std::uint64_t RandomSource::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomSource::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double RandomSource::normal() { return norm_quantile(uniform()); }

double RandomSource::normal(double mu, double sd) { return mu + sd * normal(); }

bool RandomSource::bernoulli(double p) { return uniform() < p; }

double RandomSource::weibull(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("weibull: shape and scale must be positive");
    return scale * std::pow(-std::log(uniform()), 1.0 / shape);
}

} // namespace truncscore
