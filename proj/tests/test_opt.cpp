#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "scanbench/opt.hpp"

using namespace scanbench;

namespace {

Trace make_trace(const std::vector<std::uint64_t>& pages) {
    Trace t;
    for (std::size_t i = 0; i < pages.size(); ++i)
        t.push_back({TimeNs(i), PageId{0, 0, pages[i]}});
    return t;
}

Trace random_trace(std::mt19937_64& rng, std::size_t len, std::uint64_t universe) {
    std::vector<std::uint64_t> pages;
    for (std::size_t i = 0; i < len; ++i) pages.push_back(rng() % universe);
    return make_trace(pages);
}

}  // namespace

TEST_CASE("opt_replay counts misses of the clairvoyant policy") {
    CHECK(opt_replay(make_trace({7, 7, 7}), 1) == 1);
    CHECK(opt_replay(make_trace({0, 1, 2, 3, 4}), 5) == 5);  // cold loads only
    CHECK(opt_replay({}, 3) == 0);

    const Trace classic = make_trace({1, 2, 3, 4, 1, 2, 5, 1, 2, 3, 4, 5});
    CHECK(opt_replay(classic, 3) == brute_force_min_misses(classic, 3));
    CHECK(opt_replay(classic, 3) == 7);
}

TEST_CASE("brute force refuses oversized instances") {
    const Trace small = make_trace({1, 2, 3});
    CHECK(brute_force_min_misses(small, 2) == 3);
    CHECK_THROWS_AS(brute_force_min_misses(small, 5), std::invalid_argument);
    Trace big;
    for (int i = 0; i < 21; ++i) big.push_back({TimeNs(i), PageId{0, 0, 1}});
    CHECK_THROWS_AS(brute_force_min_misses(big, 2), std::invalid_argument);
}

TEST_CASE("opt equals exhaustive search on random tiny instances") {
    std::mt19937_64 rng(0x0b7);
    for (int iter = 0; iter < 60; ++iter) {
        const std::size_t len = 1 + rng() % 20;
        const std::size_t cap = 1 + rng() % 4;
        const Trace t = random_trace(rng, len, 2 + rng() % 6);
        CHECK(opt_replay(t, cap) == brute_force_min_misses(t, cap));
    }
}

TEST_CASE("opt never misses more than lru on the same trace") {
    std::mt19937_64 rng(0xd0d0);
    for (int iter = 0; iter < 40; ++iter) {
        const Trace t = random_trace(rng, 400, 30);
        for (std::size_t cap : {2, 5, 13}) {
            CHECK(opt_replay(t, cap) <= lru_replay(t, cap));
        }
    }
}

TEST_CASE("opt misses are non-increasing in capacity") {
    std::mt19937_64 rng(0x57ac);
    for (int iter = 0; iter < 20; ++iter) {
        const Trace t = random_trace(rng, 300, 24);
        std::uint64_t prev = opt_replay(t, 1);
        for (std::size_t cap = 2; cap <= 26; ++cap) {
            const std::uint64_t m = opt_replay(t, cap);
            CHECK(m <= prev);
            prev = m;
        }
    }
}

TEST_CASE("trace files round-trip bit-exactly") {
    Trace t;
    t.push_back({0, PageId{0, 0, 0}});
    t.push_back({123456789, PageId{3, 1, 77}});
    t.push_back({987654321012345, PageId{4294967295u, 2, 18446744073709551615ull}});

    const std::string path = "opt_trace_roundtrip.tmp";
    write_trace(path, t);
    CHECK(read_trace(path) == t);

    // identical bytes when written twice
    const std::string path2 = path + "2";
    write_trace(path2, read_trace(path));
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().find("123456789 3 1 77\n") != std::string::npos);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("trace reader rejects malformed files") {
    const std::string path = "opt_trace_bad.tmp";
    std::ofstream(path) << "12 0 0 zzz\n";
    CHECK_THROWS_AS(read_trace(path), std::runtime_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_trace("does_not_exist.trace"), std::runtime_error);
}

TEST_CASE("replay volume accounts bytes per missed page") {
    const Trace t = make_trace({0, 1, 0, 2});
    const auto vol = opt_replay_volume(t, 2, [](const PageId&) { return 100ull; });
    CHECK(vol.misses == 3);
    CHECK(vol.bytes == 300);
}
