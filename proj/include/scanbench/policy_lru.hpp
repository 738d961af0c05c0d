#pragma once

#include <list>
#include <unordered_map>

#include "scanbench/buffer_pool.hpp"

namespace scanbench {

// Least-recently-used baseline. The recency list holds exactly the unpinned
// resident pages, most recent at the front.
class LruPolicy : public EvictionPolicy {
  public:
    const char* name() const override { return "lru"; }

    void on_access(const PageId& page, TimeNs now) override;
    void on_loaded(const PageId& page, TimeNs now) override;
    void on_evicted(const PageId& page) override;
    void on_pinned(const PageId& page) override;
    void on_unpinned(const PageId& page, TimeNs now) override;
    std::vector<PageId> select_victims(std::size_t k, TimeNs now) override;

    std::size_t tracked() const { return index_.size(); }

  private:
    void touch(const PageId& page);

    std::list<PageId> recency_;  // front = most recent
    std::unordered_map<PageId, std::list<PageId>::iterator, PageIdHash> index_;
};

}  // namespace scanbench
