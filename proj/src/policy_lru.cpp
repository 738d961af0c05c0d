#include "scanbench/policy_lru.hpp"

namespace scanbench {

void LruPolicy::touch(const PageId& page) {
    auto it = index_.find(page);
    if (it == index_.end()) {
        recency_.push_front(page);
        index_[page] = recency_.begin();
    } else {
        recency_.splice(recency_.begin(), recency_, it->second);
    }
}

void LruPolicy::on_access(const PageId& page, TimeNs) {
    if (index_.count(page)) touch(page);
}

void LruPolicy::on_loaded(const PageId& page, TimeNs) {
    touch(page);
}

void LruPolicy::on_evicted(const PageId& page) {
    auto it = index_.find(page);
    if (it == index_.end()) return;
    recency_.erase(it->second);
    index_.erase(it);
}

void LruPolicy::on_pinned(const PageId& page) {
    on_evicted(page);  // same removal; pinned pages leave the recency list
}

void LruPolicy::on_unpinned(const PageId& page, TimeNs) {
    touch(page);
}

std::vector<PageId> LruPolicy::select_victims(std::size_t k, TimeNs) {
    std::vector<PageId> out;
    out.reserve(std::min(k, recency_.size()));
    for (auto it = recency_.rbegin(); it != recency_.rend() && out.size() < k; ++it)
        out.push_back(*it);
    return out;
}

}  // namespace scanbench
