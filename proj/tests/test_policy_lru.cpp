#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "scanbench/policy_lru.hpp"

using namespace scanbench;

namespace {

PageId pg(std::uint64_t index) {
    return PageId{0, 0, index};
}

}  // namespace

TEST_CASE("least recently used page is the victim") {
    LruPolicy lru;
    lru.on_loaded(pg(0), 0);  // A
    lru.on_loaded(pg(1), 1);  // B
    lru.on_loaded(pg(2), 2);  // C
    CHECK(lru.select_victims(1, 3) == std::vector<PageId>{pg(0)});

    lru.on_access(pg(0), 4);  // A,B,A pattern: B is now oldest
    CHECK(lru.select_victims(1, 5) == std::vector<PageId>{pg(1)});
}

TEST_CASE("victims come in tail order") {
    LruPolicy lru;
    for (std::uint64_t i = 0; i < 4; ++i) lru.on_loaded(pg(i), TimeNs(i));
    CHECK(lru.select_victims(3, 9) == std::vector<PageId>{pg(0), pg(1), pg(2)});
    // k beyond the list returns everything
    CHECK(lru.select_victims(99, 9).size() == 4);
}

TEST_CASE("pinned pages leave the recency list") {
    LruPolicy lru;
    lru.on_loaded(pg(0), 0);
    lru.on_loaded(pg(1), 1);
    lru.on_pinned(pg(0));
    CHECK(lru.select_victims(9, 2) == std::vector<PageId>{pg(1)});
    lru.on_unpinned(pg(0), 3);  // unpin counts as a use
    CHECK(lru.select_victims(1, 4) == std::vector<PageId>{pg(1)});
    lru.on_evicted(pg(1));
    CHECK(lru.select_victims(1, 5) == std::vector<PageId>{pg(0)});
}

TEST_CASE("victim order equals a timestamp-sort reference on random traffic") {
    std::mt19937_64 rng(0x17u);
    LruPolicy lru;
    std::map<PageId, std::uint64_t> last_use;  // reference model
    std::uint64_t tick = 0;

    for (int step = 0; step < 4000; ++step) {
        const std::uint64_t op = rng() % 3;
        const PageId page = pg(rng() % 64);
        ++tick;
        if (op == 0) {
            if (!last_use.count(page)) {
                lru.on_loaded(page, TimeNs(tick));
                last_use[page] = tick;
            }
        } else if (op == 1) {
            if (last_use.count(page)) {
                lru.on_access(page, TimeNs(tick));
                last_use[page] = tick;
            }
        } else if (!last_use.empty()) {
            auto oldest = std::min_element(
                last_use.begin(), last_use.end(),
                [](const auto& a, const auto& b) { return a.second < b.second; });
            const auto victims = lru.select_victims(1, TimeNs(tick));
            REQUIRE(victims.size() == 1);
            CHECK(victims[0] == oldest->first);
            lru.on_evicted(victims[0]);
            last_use.erase(victims[0]);
        }
    }
}
