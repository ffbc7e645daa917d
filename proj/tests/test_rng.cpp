#include <doctest.h>

#include <set>
#include <vector>

#include "glasslab/rng.hpp"

using namespace glasslab;

TEST_CASE("seed_stream is deterministic and role-separated") {
    const StreamKey a = seed_stream(42, 7, StreamRole::disorder);
    const StreamKey b = seed_stream(42, 7, StreamRole::disorder);
    CHECK(a == b);

    CHECK(seed_stream(42, 7, StreamRole::chain_replica_1) != seed_stream(42, 7, StreamRole::chain_replica_2));
    CHECK(seed_stream(42, 7, StreamRole::disorder) != seed_stream(42, 8, StreamRole::disorder));
    CHECK(seed_stream(42, 7, StreamRole::disorder) != seed_stream(43, 7, StreamRole::disorder));
}

TEST_CASE("seed_stream: 1e6 derived keys have no collisions") {
    std::set<std::array<std::uint64_t, 4>> seen;
    for (std::uint64_t master = 0; master < 10; ++master) {
        for (std::uint64_t index = 0; index < 20000; ++index) {
            for (int role = 0; role < 5; ++role) {
                const StreamKey key = seed_stream(master, index, static_cast<StreamRole>(role));
                seen.insert(key.words);
            }
        }
    }
    CHECK(seen.size() == 10u * 20000u * 5u);
}

TEST_CASE("rng uniforms live in [0,1) and normals have sane moments") {
    Rng rng(seed_stream(1, 2, StreamRole::scratch));
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
        sum4 += z * z * z * z;
    }
    // 5-sigma bands for the empirical moments.
    CHECK(std::abs(sum / n) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sum2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(sum4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("identical keys give identical streams") {
    Rng a(seed_stream(9, 9, StreamRole::scratch));
    Rng b(seed_stream(9, 9, StreamRole::scratch));
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}
