#include <doctest.h>

#include <cmath>
#include <set>

#include "spotcheck/rng.hpp"

using namespace spotcheck::rng;

TEST_SUITE("rng") {

TEST_CASE("Philox4x32-10 known-answer vectors") {
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniforms are reproducible and lie strictly inside the unit interval") {
    const CounterRng a(7, 3, 0), b(7, 3, 0);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const auto u = a.uniforms(i);
        CHECK(u == b.uniforms(i));
        CHECK(u[0] > 0.0);
        CHECK(u[0] < 1.0);
        CHECK(u[1] > 0.0);
        CHECK(u[1] < 1.0);
    }
}

TEST_CASE("seeds, streams and domains give distinct sequences") {
    std::set<double> seen;
    for (std::uint64_t seed : {0ull, 1ull, 1ull << 40})
        for (std::uint32_t stream : {0u, 1u})
            for (std::uint32_t domain : {0u, 1u, 2u}) seen.insert(CounterRng(seed, stream, domain).uniforms(5)[0]);
    CHECK(seen.size() == 18);
}

TEST_CASE("uniform moments") {
    const CounterRng g(11, 0, 0);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniforms(i)[1];
        s += u;
        s2 += u * u;
    }
    CHECK(std::abs(s / n - 0.5) < 0.003);
    CHECK(std::abs(s2 / n - 1.0 / 3.0) < 0.003);
}

}  // TEST_SUITE
