#include "scanbench/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>

#include "scanbench/policy_lru.hpp"

namespace scanbench {

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Lru: return "lru";
        case PolicyKind::Pbm: return "pbm";
        case PolicyKind::CScans: return "cscans";
    }
    return "?";
}

std::optional<PolicyKind> parse_policy(const std::string& name) {
    if (name == "lru") return PolicyKind::Lru;
    if (name == "pbm") return PolicyKind::Pbm;
    if (name == "cscans") return PolicyKind::CScans;
    return std::nullopt;
}

void WorkloadSpec::validate() const {
    if (tables.empty()) throw std::invalid_argument("workload needs a table");
    for (const TableDef& t : tables) t.validate();
    if (streams < 0) throw std::invalid_argument("streams must be >= 0");
    if (queries_per_stream < 0) throw std::invalid_argument("queries_per_stream >= 0");
    if (cpu_rate <= 0) throw std::invalid_argument("cpu_rate must be positive");
    if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
    if (fractions.empty()) throw std::invalid_argument("fractions must be non-empty");
    for (double f : fractions) {
        const bool known = std::abs(f - 0.01) < 1e-9 || std::abs(f - 0.1) < 1e-9 ||
                           std::abs(f - 0.5) < 1e-9 || std::abs(f - 1.0) < 1e-9;
        if (!known)
            throw std::invalid_argument("scan fractions come from {1%, 10%, 50%, 100%}");
    }
}

std::vector<TupleRange> split_range(TupleRange range, int n) {
    if (n < 1) throw std::invalid_argument("split needs n >= 1");
    const std::uint64_t a = range.begin, width = range.end - range.begin;
    std::vector<TupleRange> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const std::uint64_t lo = a + width * std::uint64_t(i) / std::uint64_t(n);
        const std::uint64_t hi = a + width * std::uint64_t(i + 1) / std::uint64_t(n);
        out.push_back({lo, hi});
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// xorshift-style generator kept local so workloads reproduce across toolchains
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(splitmix64(seed)) {}
    std::uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
};

}  // namespace

std::vector<std::vector<QuerySpec>> gen_microbenchmark(const WorkloadSpec& spec) {
    spec.validate();
    std::vector<std::vector<QuerySpec>> streams(spec.streams);
    for (int s = 0; s < spec.streams; ++s) {
        Rng rng(splitmix64(spec.seed) ^ splitmix64(std::uint64_t(s) + 1));
        for (int q = 0; q < spec.queries_per_stream; ++q) {
            QuerySpec query;
            query.stream = s;
            query.table_index = 0;
            const TableDef& table = spec.tables[query.table_index];
            // wide (Q1-like) and narrow (Q6-like) column sets alternate
            const std::size_t ncols = table.columns.size();
            const std::size_t narrow = std::max<std::size_t>(1, ncols / 2);
            const std::size_t take = (q % 2 == 0) ? ncols : narrow;
            for (ColumnId c = 0; c < take; ++c) query.columns.push_back(c);
            const double frac = spec.fractions[rng.below(spec.fractions.size())];
            const std::uint64_t len = std::max<std::uint64_t>(
                1, std::uint64_t(frac * double(table.tuple_count)));
            const std::uint64_t start = rng.below(table.tuple_count - len + 1);
            query.rid_range = {start, start + len};
            streams[s].push_back(std::move(query));
        }
    }
    return streams;
}

std::uint64_t footprint_pages(const std::vector<TableDef>& tables,
                              const std::vector<std::vector<QuerySpec>>& streams) {
    std::set<PageId> pages;
    for (const auto& stream : streams) {
        for (const QuerySpec& q : stream) {
            const TableDef& table = tables[q.table_index];
            for (ColumnId col : q.columns)
                for (const PageId& p : pages_for_range(table, col, q.rid_range))
                    pages.insert(p);
        }
    }
    return pages.size();
}

std::uint64_t workload_footprint_pages(const WorkloadSpec& spec) {
    return footprint_pages(spec.tables, gen_microbenchmark(spec));
}

namespace {

struct Event {
    TimeNs t = 0;
    std::uint64_t seq = 0;
    std::function<void()> fn;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.seq > b.seq;
    }
};

class Simulation {
  public:
    Simulation(const RunConfig& cfg, std::vector<std::vector<QuerySpec>> queries)
        : cfg_(cfg), queries_(std::move(queries)) {}

    RunResult execute();

  private:
    struct ColCursor {
        ColumnId col = 0;
        std::uint64_t tpp = 1;
        std::uint64_t last_page = 0;
        std::uint64_t next_request = 0;
        std::set<std::uint64_t> pinned;
        std::set<std::uint64_t> awaited;
        std::uint64_t consumed_tuples = 0;  // whole-page units for PBM reports
    };

    struct ScanPart {
        int stream = 0;
        std::size_t table_index = 0;
        TupleRange range;
        std::vector<ColCursor> cols;
        std::uint64_t pos = 0;
        std::uint64_t span_end = 0;
        ScanId pbm_id = 0;
        std::uint64_t next_report = 0;
        bool consuming = false;
        bool finished = false;
    };

    struct CScanPart {
        int stream = 0;
        std::size_t table_index = 0;
        TupleRange range;
        CScanId id = 0;
        std::uint64_t tuples_produced = 0;
        bool finished = false;
    };

    struct StreamState {
        std::vector<QuerySpec> queries;
        std::size_t next = 0;
        int parts_active = 0;
        TimeNs finished_at = 0;
        bool done = false;
    };

    void schedule(TimeNs t, std::function<void()> fn) {
        events_.push({t, next_seq_++, std::move(fn)});
    }

    const TableDef& table_of_version(TableVersionId v) const {
        return *tables_by_version_.at(v);
    }
    std::uint64_t page_bytes(const PageId& p) const {
        return table_of_version(p.table_version).columns[p.column_id].page_size_bytes;
    }
    TimeNs load_latency(const PageId& p) const {
        return TimeNs(page_bytes(p) * std::uint64_t(kNsPerSecond) /
                      cfg_.io.bandwidth_bps);
    }
    TimeNs cpu_time(std::uint64_t tuples) const {
        return TimeNs(std::llround(double(tuples) * double(kNsPerSecond) /
                                   cfg_.workload.cpu_rate));
    }

    // --- I/O channel: single FIFO server, never idle while work is queued ---
    void io_enqueue(const PageId& page) {
        io_queue_.push_back(page);
        io_start_next();
    }
    void io_start_next() {
        if (io_busy_ || io_queue_.empty()) return;
        io_busy_ = true;
        const PageId page = io_queue_.front();
        io_queue_.pop_front();
        pool_->ensure_frame(now_);
        schedule(now_ + load_latency(page), [this, page] { io_complete(page); });
    }
    void io_complete(const PageId& page) {
        pool_->complete_load(page, now_);
        io_bytes_ += page_bytes(page);
        if (abm_) {
            abm_->step(now_);
        } else {
            auto it = waiters_.find(page);
            if (it != waiters_.end()) {
                const std::vector<std::size_t> woken = std::move(it->second);
                waiters_.erase(it);
                for (std::size_t part : woken) scan_on_page(part, page);
            }
        }
        io_busy_ = false;
        io_start_next();
    }

    // --- order-preserving scan operators (LRU / PBM) -------------------------
    void scan_begin(std::size_t idx, const QuerySpec& q, TupleRange range) {
        ScanPart& part = scans_[idx];
        part.stream = q.stream;
        part.table_index = q.table_index;
        part.range = range;
        part.pos = range.begin;
        part.next_report = table(q.table_index).chunk_size;
        for (ColumnId col : q.columns) {
            ColCursor c;
            c.col = col;
            c.tpp = table(q.table_index).columns[col].tuples_per_page;
            c.last_page = (range.end - 1) / c.tpp;
            c.next_request = range.begin / c.tpp;
            part.cols.push_back(std::move(c));
        }
        if (pbm_) {
            const TupleRange ranges[1] = {range};
            std::vector<ColumnId> cols(q.columns);
            part.pbm_id = pbm_->register_scan(table(q.table_index), cols, ranges, now_);
        }
        scan_fill_window(idx);
        scan_try_consume(idx);
    }

    void scan_fill_window(std::size_t idx) {
        ScanPart& part = scans_[idx];
        const TableDef& t = table(part.table_index);
        for (ColCursor& c : part.cols) {
            const std::uint64_t window_last = std::min(
                c.last_page, part.pos / c.tpp + std::uint64_t(cfg_.prefetch_depth) - 1);
            while (c.next_request <= window_last) {
                const PageId page{t.table_version, c.col, c.next_request};
                const RequestResult r = pool_->request_page(page, now_);
                if (r.hit) {
                    c.pinned.insert(c.next_request);
                } else {
                    c.awaited.insert(c.next_request);
                    waiters_[page].push_back(idx);
                    if (r.enqueue_load) io_enqueue(page);
                }
                ++c.next_request;
            }
        }
    }

    void scan_try_consume(std::size_t idx) {
        ScanPart& part = scans_[idx];
        if (part.consuming || part.finished) return;
        std::uint64_t span_end = part.range.end;
        for (ColCursor& c : part.cols) {
            const std::uint64_t cur = part.pos / c.tpp;
            if (!c.pinned.count(cur)) return;  // blocked until the page arrives
            span_end = std::min(span_end, (cur + 1) * c.tpp);
        }
        part.consuming = true;
        part.span_end = span_end;
        schedule(now_ + cpu_time(span_end - part.pos), [this, idx] { scan_consumed(idx); });
    }

    void scan_consumed(std::size_t idx) {
        ScanPart& part = scans_[idx];
        part.consuming = false;
        const std::uint64_t old_pos = part.pos;
        part.pos = part.span_end;
        const TableDef& t = table(part.table_index);
        for (ColCursor& c : part.cols) {
            const std::uint64_t cur = old_pos / c.tpp;
            if (part.pos == part.range.end || part.pos / c.tpp > cur) {
                pool_->unpin(PageId{t.table_version, c.col, cur}, now_);
                c.pinned.erase(cur);
                c.consumed_tuples += t.page_tuple_count(c.col, cur);
            }
        }
        if (pbm_) {
            while (part.pos - part.range.begin >= part.next_report) {
                for (ColCursor& c : part.cols)
                    pbm_->report_scan_position(part.pbm_id, c.col, c.consumed_tuples, now_);
                part.next_report += t.chunk_size;
            }
        }
        if (part.pos == part.range.end) {
            if (pbm_) pbm_->unregister_scan(part.pbm_id, now_);
            part.finished = true;
            part_done(part.stream);
            return;
        }
        scan_fill_window(idx);
        scan_try_consume(idx);
    }

    void scan_on_page(std::size_t idx, const PageId& page) {
        ScanPart& part = scans_[idx];
        pool_->claim_loaded(page);
        for (ColCursor& c : part.cols) {
            if (c.col != page.column_id) continue;
            c.awaited.erase(page.page_index);
            c.pinned.insert(page.page_index);
        }
        scan_try_consume(idx);
    }

    // --- chunk-at-a-time CScan operators -------------------------------------
    void cscan_begin(std::size_t idx, const QuerySpec& q, TupleRange range) {
        CScanPart& part = cscans_[idx];
        part.stream = q.stream;
        part.table_index = q.table_index;
        part.range = range;
        const TupleRange ranges[1] = {range};
        part.id = abm_->register_cscan(table(q.table_index), snapshots_[q.table_index],
                                       q.columns, ranges, *deltas_[q.table_index],
                                       q.in_order, now_);
        cscan_part_by_id_[part.id] = idx;
        cscan_poll(idx);
    }

    void cscan_poll(std::size_t idx) {
        CScanPart& part = cscans_[idx];
        for (;;) {
            GetChunkResult r = abm_->get_chunk(part.id, now_);
            if (r.status == GetChunkResult::Status::Blocked) return;
            if (r.status == GetChunkResult::Status::Done) {
                if (part.tuples_produced != part.range.size())
                    throw SimError("tuple conservation violated: cscan produced " +
                                   std::to_string(part.tuples_produced) + " of " +
                                   std::to_string(part.range.size()));
                cscan_part_by_id_.erase(part.id);
                abm_->unregister_cscan(part.id, now_);
                part.finished = true;
                part_done(part.stream);
                return;
            }
            part.tuples_produced += r.delivery.tuple_count;
            if (r.delivery.tuple_count == 0) {
                // fully trimmed by earlier deliveries; hand the pages back
                abm_->chunk_consumed(part.id, r.delivery.chunk, now_);
                continue;
            }
            const ChunkId chunk = r.delivery.chunk;
            schedule(now_ + cpu_time(r.delivery.tuple_count), [this, idx, chunk] {
                abm_->chunk_consumed(cscans_[idx].id, chunk, now_);
                cscan_poll(idx);
            });
            return;
        }
    }

    // --- streams --------------------------------------------------------------
    void part_done(int stream) {
        --active_parts_;
        StreamState& st = streams_[stream];
        if (--st.parts_active == 0) start_next_query(stream);
    }

    void start_next_query(int stream) {
        StreamState& st = streams_[stream];
        while (st.next < st.queries.size()) {
            const QuerySpec& q = st.queries[st.next++];
            const auto pieces = split_range(q.rid_range, cfg_.workload.parallelism);
            int started = 0;
            for (const TupleRange& piece : pieces) {
                if (piece.empty()) continue;
                ++started;
                ++active_parts_;
                ++st.parts_active;
                if (abm_) {
                    cscans_.emplace_back();
                    cscan_begin(cscans_.size() - 1, q, piece);
                } else {
                    scans_.emplace_back();
                    scan_begin(scans_.size() - 1, q, piece);
                }
            }
            if (started > 0) return;
        }
        st.done = true;
        st.finished_at = now_;
        ++streams_done_;
    }

    // --- periodic actors --------------------------------------------------------
    void schedule_refresh() {
        if (!pbm_) return;
        schedule(now_ + pbm_->time_slice(), [this] {
            if (streams_done_ == int(streams_.size())) return;
            pbm_->refresh_requested_buckets(now_);
            schedule_refresh();
        });
    }

    void schedule_sampler() {
        if (cfg_.sharing_sample_period <= 0) return;
        schedule(now_ + cfg_.sharing_sample_period, [this] {
            if (streams_done_ == int(streams_.size())) return;
            take_sharing_sample();
            schedule_sampler();
        });
    }

    void take_sharing_sample() {
        std::vector<std::vector<PageId>> wanted;
        for (const ScanPart& part : scans_) {
            if (part.finished) continue;
            std::vector<PageId> pages;
            const TableDef& t = table(part.table_index);
            for (const ColCursor& c : part.cols)
                for (std::uint64_t p = part.pos / c.tpp; p <= c.last_page; ++p)
                    pages.push_back(PageId{t.table_version, c.col, p});
            wanted.push_back(std::move(pages));
        }
        for (const CScanPart& part : cscans_) {
            if (part.finished) continue;
            wanted.push_back(abm_->wanted_pages(part.id));
        }
        if (!wanted.empty()) metrics_.sharing.push_back(sharing_histogram(now_, wanted));
    }

    const TableDef& table(std::size_t index) const { return cfg_.workload.tables[index]; }

    RunConfig cfg_;
    std::vector<std::vector<QuerySpec>> queries_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    std::uint64_t next_seq_ = 0;
    TimeNs now_ = 0;

    std::unique_ptr<LruPolicy> lru_;
    std::unique_ptr<PbmPolicy> pbm_;
    std::unique_ptr<AbmScheduler> abm_;
    std::unique_ptr<BufferPool> pool_;

    std::deque<PageId> io_queue_;
    bool io_busy_ = false;
    std::uint64_t io_bytes_ = 0;

    std::deque<ScanPart> scans_;
    std::deque<CScanPart> cscans_;
    std::unordered_map<PageId, std::vector<std::size_t>, PageIdHash> waiters_;
    std::map<CScanId, std::size_t> cscan_part_by_id_;
    std::vector<StreamState> streams_;
    std::vector<Snapshot> snapshots_;
    std::vector<std::unique_ptr<DeltaList>> deltas_;
    std::map<TableVersionId, const TableDef*> tables_by_version_;
    int streams_done_ = 0;
    int active_parts_ = 0;
    Metrics metrics_;
    Trace trace_;
};

RunResult Simulation::execute() {
    cfg_.workload.validate();
    const std::uint64_t footprint = footprint_pages(cfg_.workload.tables, queries_);
    std::size_t capacity = cfg_.capacity_frames.value_or(
        std::max<std::size_t>(1, std::size_t(std::ceil(cfg_.pool_frac * double(footprint)))));
    if (capacity == 0) capacity = 1;

    EvictionPolicy* policy = nullptr;
    switch (cfg_.policy) {
        case PolicyKind::Lru:
            lru_ = std::make_unique<LruPolicy>();
            policy = lru_.get();
            break;
        case PolicyKind::Pbm: {
            PbmConfig pc = cfg_.pbm;
            pc.validate = pc.validate || cfg_.validate;
            pbm_ = std::make_unique<PbmPolicy>(pc, cfg_.workload.cpu_rate);
            policy = pbm_.get();
            break;
        }
        case PolicyKind::CScans:
            abm_ = std::make_unique<AbmScheduler>(cfg_.abm);
            policy = abm_.get();
            break;
    }
    pool_ = std::make_unique<BufferPool>(capacity, cfg_.group_size, *policy);
    if (cfg_.capture_trace)
        pool_->set_trace_hook(
            [this](TimeNs t, const PageId& p) { trace_.push_back({t, p}); });
    if (abm_) {
        abm_->set_pool(pool_.get());
        abm_->set_io_hook([this](const PageId& p) { io_enqueue(p); });
        abm_->set_wake_hook([this](CScanId id) {
            schedule(now_, [this, id] {
                auto it = cscan_part_by_id_.find(id);
                if (it != cscan_part_by_id_.end()) cscan_poll(it->second);
            });
        });
    }

    for (const TableDef& t : cfg_.workload.tables) {
        tables_by_version_[t.table_version] = &t;
        snapshots_.push_back(Snapshot::identity(t, snapshots_.size()));
        deltas_.push_back(std::make_unique<DeltaList>(t.tuple_count,
                                                      std::vector<DeltaEntry>{}));
    }

    streams_.resize(queries_.size());
    for (std::size_t s = 0; s < queries_.size(); ++s) streams_[s].queries = queries_[s];

    metrics_.policy = policy->name();
    metrics_.streams = cfg_.workload.streams;
    metrics_.pool_frac = cfg_.capacity_frames
                             ? (footprint ? double(capacity) / double(footprint) : 1.0)
                             : cfg_.pool_frac;
    metrics_.bandwidth_bps = cfg_.io.bandwidth_bps;
    metrics_.seed = cfg_.workload.seed;

    for (std::size_t s = 0; s < streams_.size(); ++s) start_next_query(int(s));
    schedule_refresh();
    schedule_sampler();

    while (!events_.empty()) {
        Event ev = events_.top();
        events_.pop();
        if (ev.t < now_) throw SimError("event loop time went backwards");
        now_ = ev.t;
        ev.fn();
    }
    if (streams_done_ != int(streams_.size())) {
        int blocked = 0;
        for (const ScanPart& p : scans_)
            if (!p.finished) ++blocked;
        for (const CScanPart& p : cscans_)
            if (!p.finished) ++blocked;
        throw SimError("deadlock: no schedulable event with " + std::to_string(blocked) +
                       " unfinished scans, io queue " + std::to_string(io_queue_.size()));
    }

    metrics_.io_pages_loaded = pool_->stats().io_pages_loaded;
    metrics_.io_bytes = io_bytes_;
    for (const StreamState& st : streams_) metrics_.stream_times.push_back(st.finished_at);

    RunResult result;
    result.metrics = std::move(metrics_);
    result.trace = std::move(trace_);
    result.capacity_frames = capacity;
    result.footprint_pages = footprint;
    if (pbm_) result.pbm_counters = pbm_->counters();
    return result;
}

}  // namespace

RunResult run(const RunConfig& config) {
    Simulation sim(config, gen_microbenchmark(config.workload));
    return sim.execute();
}

RunResult run_queries(const RunConfig& config,
                      const std::vector<std::vector<QuerySpec>>& streams) {
    Simulation sim(config, streams);
    return sim.execute();
}

}  // namespace scanbench
