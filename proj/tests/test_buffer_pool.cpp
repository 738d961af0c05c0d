#include <doctest.h>

#include <algorithm>
#include <deque>

#include "scanbench/buffer_pool.hpp"

using namespace scanbench;

namespace {

PageId pg(std::uint64_t index) {
    return PageId{0, 0, index};
}

// Nominates victims in load order unless a script overrides it.
struct StubPolicy : EvictionPolicy {
    std::deque<PageId> order;
    std::vector<PageId> scripted;

    const char* name() const override { return "stub"; }
    void on_access(const PageId&, TimeNs) override {}
    void on_loaded(const PageId& page, TimeNs) override { order.push_back(page); }
    void on_evicted(const PageId& page) override {
        auto it = std::find(order.begin(), order.end(), page);
        if (it != order.end()) order.erase(it);
    }
    void on_pinned(const PageId&) override {}
    void on_unpinned(const PageId&, TimeNs) override {}
    std::vector<PageId> select_victims(std::size_t k, TimeNs) override {
        if (!scripted.empty()) {
            std::vector<PageId> out(scripted.begin(),
                                    scripted.begin() + std::min(k, scripted.size()));
            return out;
        }
        std::vector<PageId> out;
        for (const PageId& p : order) {
            if (out.size() >= k) break;
            out.push_back(p);
        }
        return out;
    }
};

void load(BufferPool& pool, const PageId& page, TimeNs now = 0) {
    pool.request_page(page, now);
    pool.ensure_frame(now);
    pool.complete_load(page, now);
}

}  // namespace

TEST_CASE("request_page pins on hit and marks loads pending on miss") {
    StubPolicy policy;
    BufferPool pool(4, 2, policy);

    auto r = pool.request_page(pg(1), 0);
    CHECK(!r.hit);
    CHECK(r.enqueue_load);
    // a second requester shares the in-flight load
    auto r2 = pool.request_page(pg(1), 1);
    CHECK(!r2.hit);
    CHECK(!r2.enqueue_load);

    pool.complete_load(pg(1), 2);
    CHECK(pool.is_resident(pg(1)));
    CHECK(pool.stats().io_pages_loaded == 1);

    // both waiters claim the one load
    pool.claim_loaded(pg(1));
    pool.claim_loaded(pg(1));
    CHECK(pool.pin_count(pg(1)) == 2);

    auto r3 = pool.request_page(pg(1), 3);
    CHECK(r3.hit);
    CHECK(pool.pin_count(pg(1)) == 3);
}

TEST_CASE("complete_load without a pending request is an internal error") {
    StubPolicy policy;
    BufferPool pool(4, 2, policy);
    CHECK_THROWS_AS(pool.complete_load(pg(9), 0), std::logic_error);
    load(pool, pg(1));
    CHECK_THROWS_AS(pool.complete_load(pg(1), 1), std::logic_error);  // duplicate
}

TEST_CASE("eviction works in groups") {
    StubPolicy policy;
    BufferPool pool(64, 16, policy);
    for (std::uint64_t i = 0; i < 40; ++i) load(pool, pg(i));

    SUBCASE("n_min below the group size evicts a full group") {
        CHECK(pool.evict(1, 100).size() == 16);
    }
    SUBCASE("n_min above the group size wins") {
        CHECK(pool.evict(20, 100).size() == 20);
    }
    SUBCASE("clamped to the unpinned population") {
        for (std::uint64_t i = 3; i < 40; ++i) pool.pin(pg(i));
        CHECK(pool.evict(1, 100).size() == 3);
    }
}

TEST_CASE("evict skips pinned pages even if the policy nominates them") {
    StubPolicy policy;
    BufferPool pool(8, 2, policy);
    for (std::uint64_t i = 0; i < 4; ++i) load(pool, pg(i));
    pool.pin(pg(0));
    policy.scripted = {pg(0), pg(1), pg(2), pg(3)};

    const auto victims = pool.evict(2, 5);
    CHECK(victims == std::vector<PageId>{pg(1), pg(2)});
    CHECK(pool.is_resident(pg(0)));
}

TEST_CASE("pool exhausted when everything is pinned") {
    StubPolicy policy;
    BufferPool pool(2, 2, policy);
    load(pool, pg(0));
    load(pool, pg(1));
    pool.pin(pg(0));
    pool.pin(pg(1));
    CHECK_THROWS_AS(pool.evict(1, 3), SimError);

    // a full pool with pinned frames cannot accept a load either
    pool.request_page(pg(2), 4);
    CHECK_THROWS_AS(pool.complete_load(pg(2), 4), SimError);
}

TEST_CASE("pin and unpin adjust evictability") {
    StubPolicy policy;
    BufferPool pool(4, 1, policy);
    load(pool, pg(0));
    pool.pin(pg(0));
    pool.pin(pg(0));
    CHECK(pool.pin_count(pg(0)) == 2);
    pool.unpin(pg(0), 1);
    CHECK(pool.unpinned_resident() == 0);  // double pin needs double unpin
    pool.unpin(pg(0), 2);
    CHECK(pool.unpinned_resident() == 1);
    CHECK_THROWS_AS(pool.unpin(pg(0), 3), std::logic_error);

    CHECK(pool.evict(1, 4) == std::vector<PageId>{pg(0)});
}

TEST_CASE("io accounting equals completed loads") {
    StubPolicy policy;
    BufferPool pool(8, 4, policy);
    for (std::uint64_t i = 0; i < 6; ++i) load(pool, pg(i));
    CHECK(pool.stats().io_pages_loaded == 6);
    pool.evict(2, 50);
    // re-load one evicted page
    load(pool, pg(0));
    CHECK(pool.stats().io_pages_loaded == 7);
    CHECK(pool.resident_count() <= pool.capacity());
}

TEST_CASE("capacity is never exceeded under load pressure") {
    StubPolicy policy;
    BufferPool pool(3, 1, policy);
    for (std::uint64_t i = 0; i < 10; ++i) {
        load(pool, pg(i), TimeNs(i));
        CHECK(pool.resident_count() <= 3);
    }
    CHECK(pool.stats().io_pages_loaded == 10);
}
