#include "scanbench/buffer_pool.hpp"

#include <algorithm>
#include <stdexcept>

namespace scanbench {

BufferPool::BufferPool(std::size_t capacity, std::size_t group_size, EvictionPolicy& policy)
    : capacity_(capacity), group_size_(group_size), policy_(policy) {
    if (capacity < 1) throw std::invalid_argument("pool capacity must be >= 1");
    if (group_size < 1) throw std::invalid_argument("eviction group size must be >= 1");
}

RequestResult BufferPool::request_page(const PageId& page, TimeNs now) {
    ++stats_.requests;
    trace(now, page);
    auto it = resident_.find(page);
    if (it != resident_.end()) {
        ++stats_.hits;
        policy_.on_access(page, now);
        if (it->second.pin_count++ == 0) {
            ++pinned_pages_;
            policy_.on_pinned(page);
        }
        return {true, false};
    }
    const bool first = pending_.insert(page).second;
    return {false, first};
}

bool BufferPool::request_load(const PageId& page, TimeNs now) {
    ++stats_.requests;
    trace(now, page);
    if (resident_.count(page)) {
        ++stats_.hits;
        return false;
    }
    return pending_.insert(page).second;
}

void BufferPool::claim_loaded(const PageId& page) {
    pin(page);
}

void BufferPool::ensure_frame(TimeNs now) {
    if (resident_.size() >= capacity_) evict(1, now);
}

void BufferPool::complete_load(const PageId& page, TimeNs now) {
    if (pending_.erase(page) == 0)
        throw std::logic_error("complete_load without a pending load: " + to_string(page));
    if (resident_.size() >= capacity_)
        throw SimError("complete_load with no free frame (evict must run first)");
    resident_.emplace(page, Frame{page, 0, now});
    ++stats_.io_pages_loaded;
    policy_.on_loaded(page, now);
}

std::vector<PageId> BufferPool::evict(std::size_t n_min, TimeNs now) {
    const std::size_t available = unpinned_resident();
    if (available == 0) {
        if (n_min == 0) return {};
        throw SimError("buffer pool exhausted: all resident pages pinned");
    }
    const std::size_t target = std::min(std::max(n_min, group_size_), available);
    std::vector<PageId> evicted;
    evicted.reserve(target);
    std::size_t ask = target;
    while (evicted.size() < target) {
        const auto nominated = policy_.select_victims(ask, now);
        std::size_t accepted = 0;
        for (const auto& page : nominated) {
            if (evicted.size() >= target) break;
            auto it = resident_.find(page);
            if (it == resident_.end()) continue;
            if (it->second.pin_count > 0) continue;  // pool enforces pin safety
            resident_.erase(it);
            policy_.on_evicted(page);
            evicted.push_back(page);
            ++accepted;
        }
        // a policy may withhold pages it must protect; stop once it does
        if (accepted == 0) break;
        ask += target;
    }
    if (evicted.size() < n_min)
        throw SimError("policy could not satisfy the eviction minimum");
    stats_.evictions += evicted.size();
    return evicted;
}

void BufferPool::pin(const PageId& page) {
    auto it = resident_.find(page);
    if (it == resident_.end()) throw std::logic_error("pin of non-resident page");
    if (it->second.pin_count++ == 0) {
        ++pinned_pages_;
        policy_.on_pinned(page);
    }
}

void BufferPool::unpin(const PageId& page, TimeNs now) {
    auto it = resident_.find(page);
    if (it == resident_.end()) throw std::logic_error("unpin of non-resident page");
    if (it->second.pin_count == 0) throw std::logic_error("unpin below zero");
    if (--it->second.pin_count == 0) {
        --pinned_pages_;
        policy_.on_unpinned(page, now);
    }
}

std::uint32_t BufferPool::pin_count(const PageId& page) const {
    auto it = resident_.find(page);
    return it == resident_.end() ? 0 : it->second.pin_count;
}

std::vector<PageId> BufferPool::resident_pages_sorted() const {
    std::vector<PageId> out;
    out.reserve(resident_.size());
    for (const auto& [page, frame] : resident_) out.push_back(page);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace scanbench
