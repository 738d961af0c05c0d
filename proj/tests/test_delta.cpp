#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "scanbench/delta.hpp"

using namespace scanbench;

namespace {

// 6 stable tuples, tuple 1 deleted, two inserts in front of tuple 3;
// visible stream is RID 0..6
DeltaList setup_s() {
    return DeltaList(6, {{1, 0, true}, {3, 2, false}});
}

std::vector<DeltaEntry> random_entries(std::mt19937_64& rng, std::uint64_t n) {
    std::vector<DeltaEntry> entries;
    for (std::uint64_t sid = 0; sid < n; ++sid) {
        if (rng() % 5 == 0) entries.push_back({sid, 0, true});
        if (rng() % 7 == 0) entries.push_back({sid, 1 + rng() % 3, false});
    }
    if (rng() % 3 == 0) entries.push_back({n, 1 + rng() % 3, false});  // trailing append
    return entries;
}

}  // namespace

TEST_CASE("rid_to_sid resolves stable tuples and inserts") {
    const DeltaList empty(100, {});
    CHECK(empty.rid_to_sid(7) == 7);

    const DeltaList s = setup_s();
    const auto oracle = testing::merge_by_brute_force(6, {{1, 0, true}, {3, 2, false}});
    CHECK(s.visible_count() == 7);
    CHECK(s.rid_to_sid(1) == oracle.rid_to_sid(1));
    CHECK(s.rid_to_sid(1) == 2);
    CHECK(s.rid_to_sid(2) == oracle.rid_to_sid(2));
    CHECK(s.rid_to_sid(2) == 3);  // first insert carries the key of stable tuple 3
    CHECK_THROWS_AS(s.rid_to_sid(7), std::out_of_range);
}

TEST_CASE("sid_to_rid low and high variants") {
    const DeltaList empty(100, {});
    CHECK(empty.sid_to_rid_low(4) == 4);
    CHECK(empty.sid_to_rid_high(4) == 4);

    const DeltaList s = setup_s();
    const auto oracle = testing::merge_by_brute_force(6, {{1, 0, true}, {3, 2, false}});
    CHECK(s.sid_to_rid_low(3) == oracle.sid_to_rid_low(3));
    CHECK(s.sid_to_rid_low(3) == 2);
    CHECK(s.sid_to_rid_high(3) == oracle.sid_to_rid_high(3));
    CHECK(s.sid_to_rid_high(3) == 4);
    // deleted tuple: the lowest RID that translates into a higher SID
    CHECK(s.sid_to_rid_low(1) == oracle.sid_to_rid_low(1));
    CHECK(s.sid_to_rid_low(1) == 1);
    CHECK(s.sid_to_rid_high(0) == 0);
    CHECK_THROWS_AS(s.sid_to_rid_low(7), std::out_of_range);
}

TEST_CASE("chunk_to_rid_range translates chunk boundaries") {
    const DeltaList empty(1000, {});
    CHECK(empty.chunk_to_rid_range({100, 200}) == TupleRange{100, 200});

    const DeltaList s = setup_s();
    CHECK(s.chunk_to_rid_range({3, 6}) == TupleRange{2, 7});
    CHECK(s.chunk_to_rid_range({0, 3}) == TupleRange{0, 2});
    const auto e = s.chunk_to_rid_range({2, 2});
    CHECK(e.empty());
}

TEST_CASE("delta list construction validates entries") {
    CHECK_THROWS_AS(DeltaList(5, {{6, 1, false}}), std::invalid_argument);
    CHECK_THROWS_AS(DeltaList(5, {{5, 0, true}}), std::invalid_argument);
    CHECK_THROWS_AS(DeltaList(5, {{2, 0, true}, {2, 0, true}}), std::invalid_argument);
    // inserts at the same key merge
    const DeltaList d(5, {{2, 1, false}, {2, 2, false}});
    CHECK(d.visible_count() == 8);
}

TEST_CASE("translation round trip and ordering on random deltas") {
    std::mt19937_64 rng(0xd17a);
    for (int iter = 0; iter < 200; ++iter) {
        const std::uint64_t n = 1 + rng() % 40;
        const auto entries = random_entries(rng, n);
        const DeltaList d(n, entries);
        const auto oracle = testing::merge_by_brute_force(n, entries);
        REQUIRE(d.visible_count() == oracle.visible_count());

        for (std::uint64_t sid = 0; sid <= n; ++sid) {
            CHECK(d.sid_to_rid_low(sid) == oracle.sid_to_rid_low(sid));
            CHECK(d.sid_to_rid_high(sid) == oracle.sid_to_rid_high(sid));
            CHECK(d.sid_to_rid_low(sid) <= d.sid_to_rid_high(sid));
            if (sid > 0) {
                CHECK(d.sid_to_rid_low(sid - 1) <= d.sid_to_rid_low(sid));
                CHECK(d.sid_to_rid_high(sid - 1) <= d.sid_to_rid_high(sid));
            }
        }
        for (std::uint64_t rid = 0; rid < d.visible_count(); ++rid)
            CHECK(d.rid_to_sid(rid) == oracle.rid_to_sid(rid));
    }
}

TEST_CASE("trim_delivered subtracts processed ranges") {
    ProcessedSet done;
    CHECK(done.trim_delivered({0, 10}) == std::vector<TupleRange>{{0, 10}});

    ProcessedSet done2;
    done2.add({0, 10});
    CHECK(done2.trim_delivered({5, 15}) == std::vector<TupleRange>{{10, 15}});

    ProcessedSet done3;
    done3.add({0, 5});
    done3.add({8, 12});
    // oracle: per-position membership over [3,10)
    std::vector<TupleRange> expected;
    for (std::uint64_t p = 3; p < 10; ++p) {
        if (p < 5 || p >= 8) continue;
        if (!expected.empty() && expected.back().end == p)
            expected.back().end = p + 1;
        else
            expected.push_back({p, p + 1});
    }
    CHECK(expected == std::vector<TupleRange>{{5, 8}});
    CHECK(done3.trim_delivered({3, 10}) == expected);
}

TEST_CASE("processed set coalesces adjacent ranges") {
    ProcessedSet done;
    done.add({0, 5});
    done.add({5, 9});
    done.add({20, 30});
    CHECK(done.ranges().size() == 2);
    CHECK(done.covers(4));
    CHECK(done.covers(8));
    CHECK(!done.covers(9));
    CHECK(done.trim_delivered({0, 9}).empty());
}

TEST_CASE("chunk permutations deliver every rid exactly once") {
    std::mt19937_64 rng(0xcafe);
    for (int iter = 0; iter < 200; ++iter) {
        const std::uint64_t n = 1 + rng() % 60;
        const auto entries = random_entries(rng, n);
        const DeltaList d(n, entries);
        const std::uint64_t chunk = 1 + rng() % n;

        std::vector<std::uint64_t> order((n + chunk - 1) / chunk);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);

        ProcessedSet done;
        std::vector<char> produced(d.visible_count(), 0);
        for (std::uint64_t c : order) {
            const TupleRange sid_range{c * chunk, std::min((c + 1) * chunk, n)};
            for (const TupleRange& r : done.trim_delivered(d.chunk_to_rid_range(sid_range))) {
                for (std::uint64_t rid = r.begin; rid < r.end; ++rid) {
                    REQUIRE(rid < d.visible_count());
                    REQUIRE(produced[rid] == 0);  // no duplicates, ever
                    produced[rid] = 1;
                }
            }
        }
        CHECK(std::count(produced.begin(), produced.end(), 1) ==
              std::int64_t(d.visible_count()));
    }
}
