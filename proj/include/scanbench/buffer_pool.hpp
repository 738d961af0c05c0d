#pragma once

// Fixed-capacity page frame pool. Victim choice is delegated to a pluggable
// policy; the pool itself enforces pin safety and the grouped-eviction floor.
// All mutation happens under exclusive access (the simulator is
// single-threaded over a simulated clock).

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "scanbench/types.hpp"

namespace scanbench {

struct Frame {
    PageId page;
    std::uint32_t pin_count = 0;
    TimeNs loaded_at = 0;
};

// Callback contract shared by all eviction policies. Callbacks are invoked
// only while the caller holds exclusive access to the pool.
class EvictionPolicy {
  public:
    virtual ~EvictionPolicy() = default;
    virtual const char* name() const = 0;
    virtual void on_access(const PageId& page, TimeNs now) = 0;
    virtual void on_loaded(const PageId& page, TimeNs now) = 0;
    virtual void on_evicted(const PageId& page) = 0;
    virtual void on_pinned(const PageId& page) = 0;
    virtual void on_unpinned(const PageId& page, TimeNs now) = 0;
    // Up to k distinct resident pages in preferred-eviction order. The pool
    // skips pinned nominations and re-asks with a larger k if it runs short.
    virtual std::vector<PageId> select_victims(std::size_t k, TimeNs now) = 0;
};

struct PoolStats {
    std::uint64_t requests = 0;
    std::uint64_t hits = 0;
    std::uint64_t io_pages_loaded = 0;
    std::uint64_t evictions = 0;
};

struct RequestResult {
    bool hit = false;
    // On a miss: true when this is the first request for the page, i.e. the
    // caller must enqueue the load on the I/O channel. Later requesters of
    // the same in-flight page share the load.
    bool enqueue_load = false;
};

class BufferPool {
  public:
    BufferPool(std::size_t capacity, std::size_t group_size, EvictionPolicy& policy);

    // Fires once per logical page reference (hit or miss).
    void set_trace_hook(std::function<void(TimeNs, const PageId&)> hook) {
        trace_hook_ = std::move(hook);
    }

    // Scan-side entry: on a hit the frame is pinned and the policy notified
    // of the access; on a miss the page is marked load-pending.
    RequestResult request_page(const PageId& page, TimeNs now);

    // ABM-side entry: records the reference and marks the page load-pending
    // without pinning. Returns true when the caller must enqueue the load.
    bool request_load(const PageId& page, TimeNs now);

    // Pin after a load completes (the waiter was woken); no access recorded.
    void claim_loaded(const PageId& page);

    // Make room for one incoming page; called when the I/O channel starts
    // servicing a load.
    void ensure_frame(TimeNs now);

    void complete_load(const PageId& page, TimeNs now);

    // Evict max(n_min, group_size) unpinned pages, clamped to how many exist.
    std::vector<PageId> evict(std::size_t n_min, TimeNs now);

    void pin(const PageId& page);
    void unpin(const PageId& page, TimeNs now);

    bool is_resident(const PageId& page) const { return resident_.count(page) > 0; }
    bool is_load_pending(const PageId& page) const { return pending_.count(page) > 0; }
    std::uint32_t pin_count(const PageId& page) const;
    std::size_t capacity() const { return capacity_; }
    std::size_t group_size() const { return group_size_; }
    std::size_t resident_count() const { return resident_.size(); }
    std::size_t free_frames() const { return capacity_ - resident_.size(); }
    std::size_t unpinned_resident() const { return resident_.size() - pinned_pages_; }
    const PoolStats& stats() const { return stats_; }
    EvictionPolicy& policy() { return policy_; }

    // Deterministically ordered snapshot of the resident set (test support).
    std::vector<PageId> resident_pages_sorted() const;

  private:
    void trace(TimeNs now, const PageId& page) {
        if (trace_hook_) trace_hook_(now, page);
    }

    std::size_t capacity_;
    std::size_t group_size_;
    EvictionPolicy& policy_;
    std::unordered_map<PageId, Frame, PageIdHash> resident_;
    std::unordered_set<PageId, PageIdHash> pending_;
    std::size_t pinned_pages_ = 0;  // frames with pin_count > 0
    PoolStats stats_;
    std::function<void(TimeNs, const PageId&)> trace_hook_;
};

}  // namespace scanbench
