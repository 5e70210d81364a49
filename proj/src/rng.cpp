#include "rssa/rng.hpp"

#include <cmath>
#include <sstream>

namespace rssa {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    return splitmix64(s);
}

RandomStream::RandomStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

// xoshiro256**
std::uint64_t RandomStream::next_u64() {
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

double RandomStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t RandomStream::uniform_int(std::int64_t n) {
    RSSA_CHECK(n > 0, "uniform_int needs n > 0");
    return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
}

double RandomStream::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Tensor RandomStream::normal_tensor(std::vector<int> shape) { return normal_tensor(std::move(shape), 1.0); }

Tensor RandomStream::normal_tensor(std::vector<int> shape, double stddev) {
    Tensor t(std::move(shape));
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = normal() * stddev;
    return t;
}

Tensor RandomStream::ball(int dim, double radius) {
    Tensor dir({dim});
    double norm2 = 0;
    do {
        norm2 = 0;
        for (int i = 0; i < dim; ++i) {
            dir[i] = normal();
            norm2 += dir[i] * dir[i];
        }
    } while (norm2 == 0.0);
    const double norm = std::sqrt(norm2);
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
    for (int i = 0; i < dim; ++i) dir[i] = dir[i] / norm * r;
    return dir;
}

std::string RandomStream::serialize() const {
    std::ostringstream os;
    os << s_[0] << " " << s_[1] << " " << s_[2] << " " << s_[3];
    return os.str();
}

RandomStream RandomStream::deserialize(const std::string& s) {
    RandomStream r;
    std::istringstream is(s);
    for (auto& x : r.s_) is >> x;
    RSSA_CHECK(!is.fail(), "bad RandomStream state string");
    return r;
}

RandomStream RandomStream::fork(std::uint64_t tag) const {
    std::uint64_t h = hash_combine(s_[0] ^ s_[3], tag);
    return RandomStream(hash_combine(h, s_[1] ^ s_[2]));
}

}  // namespace rssa
