#ifndef TRUNCSCORE_RANDOM_HPP
#define TRUNCSCORE_RANDOM_HPP

#include <cstdint>

namespace truncscore {

// Deterministic stream generator (xoshiro256++ seeded through splitmix64).
// Two sources built from the same seed produce identical streams, and
// child(i) is a pure function of (seed, i), so replications and worker
// shards can be reproduced independently of scheduling.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed);

    // Independent stream derived from this source's seed and an index;
    // does not consume or disturb the parent stream.
    RandomSource child(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    // Uniform on the open interval (0,1); never returns 0 or 1, so logs and
    // quantile transforms are always finite.
    double uniform();

    double normal();                       // standard normal by inverse cdf
    double normal(double mu, double sd);
    bool bernoulli(double p);              // true with probability p

    // Weibull time with survival exp(-(t/scale)^shape).
    double weibull(double shape, double scale);

  private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

} // namespace truncscore

#endif
