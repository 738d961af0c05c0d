#pragma once

// Cooperative Scans: an Active Buffer Manager that schedules chunk loads and
// evictions through four relevance functions and serves CScan operators
// possibly out of table order. Chunks are logical tuple ranges in the SID
// domain; delivered chunks are translated to RID ranges and trimmed so no
// tuple is produced twice. Snapshots sharing a page-list prefix mark the
// covered chunks shared, which raises their load/keep priority.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "scanbench/buffer_pool.hpp"
#include "scanbench/delta.hpp"
#include "scanbench/storage.hpp"

namespace scanbench {

struct AbmConfig {
    double shared_bonus = 0.5;  // keeps shared status below a full interest count
};

struct ChunkDelivery {
    ChunkId chunk;
    std::vector<TupleRange> rid_ranges;  // trimmed; may be empty
    std::uint64_t tuple_count = 0;       // sum of range sizes
};

struct GetChunkResult {
    enum class Status { Delivered, Done, Blocked };
    Status status = Status::Blocked;
    ChunkDelivery delivery;
};

struct AbmAction {
    enum class Kind { Deliver, Load };
    Kind kind = Kind::Deliver;
    CScanId cscan = 0;
    ChunkId chunk;
};

class AbmScheduler : public EvictionPolicy {
  public:
    enum class RegisterCase { NewTable, IdenticalSnapshot, CommonPrefix, NewVersion };

    explicit AbmScheduler(AbmConfig cfg = {});

    void set_pool(BufferPool* pool) { pool_ = pool; }
    void set_io_hook(std::function<void(const PageId&)> hook) { io_hook_ = std::move(hook); }
    void set_wake_hook(std::function<void(CScanId)> hook) { wake_hook_ = std::move(hook); }

    // --- CScan lifecycle ----------------------------------------------------
    CScanId register_cscan(const TableDef& table, const Snapshot& snapshot,
                           std::span<const ColumnId> columns,
                           std::span<const TupleRange> rid_ranges, const DeltaList& delta,
                           bool in_order, TimeNs now);
    GetChunkResult get_chunk(CScanId id, TimeNs now);
    void chunk_consumed(CScanId id, ChunkId chunk, TimeNs now);
    void unregister_cscan(CScanId id, TimeNs now);
    bool done(CScanId id) const;

    // One scheduling round: deliver every cached chunk some blocked CScan can
    // consume, then issue at most one chunk load if the channel is free.
    std::vector<AbmAction> step(TimeNs now);

    // --- EvictionPolicy -----------------------------------------------------
    const char* name() const override { return "cscans"; }
    void on_access(const PageId& page, TimeNs now) override;
    void on_loaded(const PageId& page, TimeNs now) override;
    void on_evicted(const PageId& page) override;
    void on_pinned(const PageId& page) override;
    void on_unpinned(const PageId& page, TimeNs now) override;
    std::vector<PageId> select_victims(std::size_t k, TimeNs now) override;

    // --- relevance functions and metadata (also used by tests) --------------
    // (starved_tier desc, remaining asc, id asc); smaller tuple = served first
    std::tuple<int, std::uint64_t, CScanId> query_relevance_key(CScanId id) const;
    bool starved(CScanId id) const;
    double load_relevance(TableVersionId version, std::uint64_t chunk_index) const;
    std::optional<std::uint64_t> use_choice(CScanId id) const;
    double keep_score(const PageId& page) const;
    RegisterCase last_register_case() const { return last_case_; }
    bool chunk_shared(TableVersionId version, std::uint64_t chunk_index) const;
    std::size_t chunk_interest(TableVersionId version, std::uint64_t chunk_index) const;
    // Page numbers of the longest per-column prefix shared by >= 2 live scans.
    std::vector<std::uint64_t> shared_prefix_pages(TableVersionId version,
                                                   ColumnId column) const;
    std::size_t live_versions() const { return versions_.size(); }
    std::vector<PageId> wanted_pages(CScanId id) const;  // sharing-potential support
    std::uint64_t remaining_chunks(CScanId id) const;
    std::optional<ChunkId> in_flight() const { return in_flight_; }

  private:
    struct CScanState {
        CScanId id = 0;
        TableDef table;  // tuple_count adjusted to the snapshot
        Snapshot snapshot;
        std::vector<ColumnId> columns;
        std::vector<TupleRange> rid_ranges;
        DeltaList delta;
        bool in_order = false;
        std::set<std::uint64_t> needed;
        std::set<std::uint64_t> delivered;
        std::set<std::uint64_t> ready;  // needed, undelivered, fully cached
        ProcessedSet processed;         // seeded with the complement of rid_ranges
        std::deque<ChunkDelivery> pending;
        bool blocked = false;
    };

    struct ChunkMeta {
        std::set<CScanId> interested;
        bool shared = false;
    };

    struct VersionMeta {
        TableDef base_table;
        std::set<CScanId> cscans;
        std::map<std::uint64_t, ChunkMeta> chunks;
        std::vector<std::uint64_t> shared_prefix_len;  // per column, logical pages
        std::vector<std::vector<std::uint64_t>> shared_prefix;  // page numbers
        // page number -> logical position, per column, over live snapshots
        std::vector<std::map<std::uint64_t, std::uint64_t>> page_position;
    };

    CScanState& state(CScanId id);
    const CScanState& state(CScanId id) const;
    std::vector<PageId> cscan_chunk_pages(const CScanState& cs,
                                          std::uint64_t chunk_index) const;
    bool chunk_cached(const CScanState& cs, std::uint64_t chunk_index) const;
    void refresh_ready(CScanState& cs, std::uint64_t chunk_index);
    void recompute_shared(VersionMeta& vm);
    void rebuild_page_positions(VersionMeta& vm);
    void deliver(CScanState& cs, std::uint64_t chunk_index);
    bool try_issue_load(TimeNs now, bool force);
    void page_event(const PageId& page);

    AbmConfig cfg_;
    BufferPool* pool_ = nullptr;
    std::function<void(const PageId&)> io_hook_;
    std::function<void(CScanId)> wake_hook_;
    std::map<CScanId, CScanState> cscans_;
    std::map<TableVersionId, VersionMeta> versions_;
    std::set<PageId> evictable_;  // resident & unpinned, mirrors pool callbacks
    std::optional<ChunkId> in_flight_;
    std::set<PageId> in_flight_pending_;
    std::set<PageId> guard_pages_;  // never nominated while their chunk loads
    CScanId next_id_ = 1;
    RegisterCase last_case_ = RegisterCase::NewTable;
    std::vector<AbmAction> step_actions_;
};

}  // namespace scanbench
