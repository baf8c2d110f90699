#pragma once

#include <cmath>
#include <cstdint>

namespace avgpg {

// Counter-based deterministic generator. Each draw hashes (seed, counter)
// with the splitmix64 finalizer, so streams reproduce bit-for-bit across
// platforms and are safe to split by offsetting the counter.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))), counter_(0) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (++counter_);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // standard exponential; Dirichlet(1,...,1) rows are normalized Exp(1) draws
    double exponential() { return -std::log1p(-uniform()); }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace avgpg
