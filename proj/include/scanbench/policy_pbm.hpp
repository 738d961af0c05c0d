#pragma once

// Predictive Buffer Management. Scans register the pages they will touch
// together with how many tuples they must consume first; the policy estimates
// each resident page's time of next consumption from scan positions and
// speeds and evicts the farthest-in-future pages. Resident pages live in a
// timeline of buckets whose spans double per group; placing a page, removing
// it and shifting the timeline are all constant-cost operations.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "scanbench/buffer_pool.hpp"
#include "scanbench/storage.hpp"

namespace scanbench {

struct PbmConfig {
    int n_groups = 5;
    int buckets_per_group = 10;       // m
    TimeNs time_slice = 100'000'000;  // refresh cadence and span of group-0 buckets
    double ema_alpha = 0.3;
    double speed_floor = 1.0;  // tuples/s; keeps stalled scans finite
    bool validate = false;     // structural checks after every refresh
};

struct BucketOpCounters {
    std::uint64_t adds = 0;
    std::uint64_t removes = 0;
    std::uint64_t pops = 0;
    std::uint64_t shifts = 0;
    std::uint64_t node_touches = 0;
    // pages whose shifted position no longer matched their recomputed
    // estimate; zero while predictions track actual scan progress
    std::uint64_t sweep_repushes = 0;
};

class PbmPolicy : public EvictionPolicy {
  public:
    static constexpr int kNotRequested = -1;

    PbmPolicy(PbmConfig cfg, double initial_speed);
    ~PbmPolicy() override;

    // --- scan registration interface ---------------------------------------
    ScanId register_scan(const TableDef& table, std::span<const ColumnId> columns,
                         std::span<const TupleRange> ranges, TimeNs now);
    void report_scan_position(ScanId id, ColumnId column, std::uint64_t tuples_consumed,
                              TimeNs now);
    void unregister_scan(ScanId id, TimeNs now);

    // Estimated seconds until some registered scan consumes the page;
    // nullopt when no live scan will. Entries already passed by their scan
    // are dropped as a side effect.
    std::optional<double> page_next_consumption(const PageId& page, TimeNs now);

    // Index of the bucket whose span contains offset `t` from now; times
    // beyond the timeline clamp to the last requested bucket.
    std::size_t time_to_bucket_number(TimeNs t) const;

    // Shift buckets left according to elapsed slices, re-bucket the drained
    // frontier bucket, then re-push any page whose recomputed estimate lands
    // elsewhere (keeps placement consistent under scan speed changes).
    void refresh_requested_buckets(TimeNs now);

    // --- EvictionPolicy -----------------------------------------------------
    const char* name() const override { return "pbm"; }
    void on_access(const PageId& page, TimeNs now) override;
    void on_loaded(const PageId& page, TimeNs now) override;
    void on_evicted(const PageId& page) override;
    void on_pinned(const PageId& page) override;
    void on_unpinned(const PageId& page, TimeNs now) override;
    std::vector<PageId> select_victims(std::size_t k, TimeNs now) override;

    // --- introspection (tests and validation) -------------------------------
    TimeNs time_slice() const { return cfg_.time_slice; }
    std::size_t num_requested_buckets() const { return requested_.size(); }
    // kNotRequested or a requested index; nullopt when in no bucket.
    std::optional<int> bucket_of(const PageId& page) const;
    std::vector<PageId> bucket_contents(int bucket) const;
    std::vector<std::pair<ScanId, std::uint64_t>> consuming_scans(const PageId& page) const;
    double scan_speed(ScanId id) const;
    const BucketOpCounters& counters() const { return counters_; }
    std::size_t tracked_pages() const { return metas_.size(); }
    void validate_structures(TimeNs now) const;

  private:
    struct Bucket;

    struct PageMeta {
        PageId page;
        std::vector<std::pair<ScanId, std::uint64_t>> consuming;  // (scan, tuples_behind)
        Bucket* bucket = nullptr;
        bool resident = false;
        bool pinned = false;
        PageMeta* prev = nullptr;
        PageMeta* next = nullptr;
    };

    struct Bucket {
        int index = 0;  // current timeline position; kNotRequested for the terminal
        PageMeta* head = nullptr;  // pop end (least recently added)
        PageMeta* tail = nullptr;
        std::size_t count = 0;
    };

    struct ScanInfo {
        std::map<ColumnId, std::uint64_t> consumed;
        std::map<ColumnId, std::pair<TimeNs, std::uint64_t>> last_report;
        double speed = 1.0;
        bool have_sample = false;
    };

    void bucket_add(Bucket& b, PageMeta& meta);
    void bucket_remove(PageMeta& meta);
    PageMeta* bucket_pop(Bucket& b);

    std::optional<double> estimate_const(const PageMeta& meta) const;
    int target_bucket_index(const std::optional<double>& est_seconds) const;
    void page_push(PageMeta& meta, TimeNs now);
    void maybe_gc(const PageId& page);

    PbmConfig cfg_;
    double initial_speed_;
    std::vector<std::unique_ptr<Bucket>> requested_;  // position i spans time_slice*2^(i/m)
    std::unique_ptr<Bucket> not_requested_;
    std::map<PageId, PageMeta> metas_;
    std::map<ScanId, ScanInfo> scans_;
    ScanId next_scan_id_ = 1;
    std::uint64_t time_passed_slices_ = 0;
    BucketOpCounters counters_;
};

}  // namespace scanbench
