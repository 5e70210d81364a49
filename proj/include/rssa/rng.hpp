#pragma once

#include "rssa/tensor.hpp"

#include <cstdint>
#include <string>

namespace rssa {

// Deterministic random stream. Gaussian draws use Box-Muller on top of a
// splitmix64-seeded xoshiro-style engine so sequences are identical across
// compilers and platforms.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t next_u64();
    double uniform();                      // [0,1)
    double uniform(double lo, double hi);  // [lo,hi)
    std::int64_t uniform_int(std::int64_t n);  // [0,n)
    double normal();

    Tensor normal_tensor(std::vector<int> shape);
    Tensor normal_tensor(std::vector<int> shape, double stddev);
    // Uniform draw from the open ball of the given radius in dim dimensions.
    Tensor ball(int dim, double radius);

    std::string serialize() const;
    static RandomStream deserialize(const std::string& s);

    // Derive an independent stream for a named purpose.
    RandomStream fork(std::uint64_t tag) const;

  private:
    RandomStream() = default;
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

}  // namespace rssa
