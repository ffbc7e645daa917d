#include "glasslab/rng.hpp"

namespace glasslab {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

StreamKey seed_stream(std::uint64_t master_seed, std::uint64_t index, StreamRole role) {
    const std::uint64_t r = static_cast<std::uint64_t>(role);
    StreamKey key;
    key.words[0] = mix64(master_seed ^ 0x243f6a8885a308d3ULL);
    key.words[1] = mix64(index ^ 0x13198a2e03707344ULL);
    key.words[2] = mix64(r ^ 0xa4093822299f31d0ULL);
    key.words[3] = mix64(rotl(master_seed, 32) ^ (index * 0x9e3779b97f4a7c15ULL) ^ (r + 0x082efa98ec4e6c89ULL));
    // Two cross-mixing rounds so every output word depends on the whole triple.
    for (int round = 0; round < 2; ++round) {
        key.words[0] += rotl(key.words[2], 13);
        key.words[1] ^= rotl(key.words[3], 29);
        key.words[2] += rotl(key.words[1], 41);
        key.words[3] ^= rotl(key.words[0], 7);
        for (auto& w : key.words) w = mix64(w);
    }
    // xoshiro must not be seeded with the all-zero state.
    if ((key.words[0] | key.words[1] | key.words[2] | key.words[3]) == 0) {
        key.words[0] = 0x9e3779b97f4a7c15ULL;
    }
    return key;
}

Rng::Rng(const StreamKey& key) : s_(key.words) {
    // Discard a few outputs in case of a low-entropy key.
    for (int i = 0; i < 8; ++i) (void)next_u64();
}

std::uint64_t Rng::next_u64() {
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

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
    double u;
    do {
        u = uniform();
    } while (u == 0.0);
    return u;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
    // Rejection to kill modulo bias.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

} // namespace glasslab
