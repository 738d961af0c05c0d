#include "scanbench/policy_cscans.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace scanbench {

AbmScheduler::AbmScheduler(AbmConfig cfg) : cfg_(cfg) {}

AbmScheduler::CScanState& AbmScheduler::state(CScanId id) {
    auto it = cscans_.find(id);
    if (it == cscans_.end()) throw std::logic_error("unknown cscan id");
    return it->second;
}

const AbmScheduler::CScanState& AbmScheduler::state(CScanId id) const {
    auto it = cscans_.find(id);
    if (it == cscans_.end()) throw std::logic_error("unknown cscan id");
    return it->second;
}

CScanId AbmScheduler::register_cscan(const TableDef& table, const Snapshot& snapshot,
                                     std::span<const ColumnId> columns,
                                     std::span<const TupleRange> rid_ranges,
                                     const DeltaList& delta, bool in_order, TimeNs) {
    if (snapshot.pages_per_column.size() != table.columns.size())
        throw std::invalid_argument("snapshot column count mismatch");
    CScanState cs;
    cs.id = next_id_++;
    cs.table = table;
    cs.table.table_version = snapshot.table_version;
    cs.table.tuple_count = snapshot.tuple_count;
    cs.snapshot = snapshot;
    cs.columns.assign(columns.begin(), columns.end());
    cs.delta = delta;
    cs.in_order = in_order;
    for (ColumnId c = 0; c < table.columns.size(); ++c) {
        if (snapshot.pages_per_column[c].size() != cs.table.num_pages(c))
            throw std::invalid_argument("snapshot page list does not cover its tuples");
    }

    // normalized registered RID ranges; the processed set starts as their
    // complement so trimming confines deliveries to the registration
    std::vector<TupleRange> ranges(rid_ranges.begin(), rid_ranges.end());
    std::sort(ranges.begin(), ranges.end());
    for (const TupleRange& r : ranges) {
        if (r.begin > r.end || r.end > cs.delta.visible_count())
            throw std::out_of_range("rid range out of bounds");
        if (!r.empty()) cs.rid_ranges.push_back(r);
    }
    std::uint64_t hole_begin = 0;
    for (const TupleRange& r : cs.rid_ranges) {
        if (r.begin > hole_begin) cs.processed.add({hole_begin, r.begin});
        hole_begin = std::max(hole_begin, r.end);
    }
    cs.processed.add({hole_begin, std::numeric_limits<std::uint64_t>::max()});

    if (cs.table.tuple_count > 0) {
        for (const TupleRange& r : cs.rid_ranges) {
            const std::uint64_t lo_sid =
                std::min(cs.delta.rid_to_sid(r.begin), cs.table.tuple_count - 1);
            const std::uint64_t hi_sid =
                std::min(cs.delta.rid_to_sid(r.end - 1), cs.table.tuple_count - 1);
            for (std::uint64_t c = lo_sid / cs.table.chunk_size;
                 c <= hi_sid / cs.table.chunk_size; ++c)
                cs.needed.insert(c);
        }
    }

    // snapshot classification: (i) first scan of the table, (ii) identical
    // snapshot, (iii) common prefix within the version, (iv) a new version
    const TableVersionId version = snapshot.table_version;
    auto vit = versions_.find(version);
    if (vit == versions_.end()) {
        bool table_live = false;
        for (const auto& [v, vm] : versions_)
            if (vm.base_table.table_id == table.table_id) table_live = true;
        last_case_ = table_live ? RegisterCase::NewVersion : RegisterCase::NewTable;
        VersionMeta vm;
        vm.base_table = table;
        vm.base_table.table_version = version;
        vit = versions_.emplace(version, std::move(vm)).first;
    } else {
        last_case_ = RegisterCase::IdenticalSnapshot;
        for (CScanId other : vit->second.cscans) {
            if (state(other).snapshot.pages_per_column != snapshot.pages_per_column)
                last_case_ = RegisterCase::CommonPrefix;
        }
    }
    VersionMeta& vm = vit->second;
    vm.cscans.insert(cs.id);
    for (std::uint64_t c : cs.needed) vm.chunks[c].interested.insert(cs.id);

    const CScanId id = cs.id;
    cscans_.emplace(id, std::move(cs));
    rebuild_page_positions(vm);
    recompute_shared(vm);

    CScanState& stored = state(id);
    for (std::uint64_t c : stored.needed) refresh_ready(stored, c);
    return id;
}

std::vector<PageId> AbmScheduler::cscan_chunk_pages(const CScanState& cs,
                                                    std::uint64_t chunk_index) const {
    const TupleRange span = cs.table.chunk_range(chunk_index);
    std::vector<PageId> out;
    for (ColumnId col : cs.columns) {
        for (const PageId& logical : pages_for_range(cs.table, col, span)) {
            const std::uint64_t number =
                cs.snapshot.pages_per_column[col][logical.page_index];
            out.push_back(PageId{cs.snapshot.table_version, col, number});
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool AbmScheduler::chunk_cached(const CScanState& cs, std::uint64_t chunk_index) const {
    for (const PageId& page : cscan_chunk_pages(cs, chunk_index))
        if (!pool_->is_resident(page)) return false;
    return true;
}

void AbmScheduler::refresh_ready(CScanState& cs, std::uint64_t chunk_index) {
    if (!cs.needed.count(chunk_index) || cs.delivered.count(chunk_index)) {
        cs.ready.erase(chunk_index);
        return;
    }
    if (chunk_cached(cs, chunk_index))
        cs.ready.insert(chunk_index);
    else
        cs.ready.erase(chunk_index);
}

void AbmScheduler::rebuild_page_positions(VersionMeta& vm) {
    vm.page_position.assign(vm.base_table.columns.size(), {});
    for (CScanId id : vm.cscans) {
        const CScanState& cs = state(id);
        for (ColumnId col = 0; col < cs.snapshot.pages_per_column.size(); ++col) {
            const auto& list = cs.snapshot.pages_per_column[col];
            for (std::uint64_t pos = 0; pos < list.size(); ++pos)
                vm.page_position[col][list[pos]] = pos;
        }
    }
}

void AbmScheduler::recompute_shared(VersionMeta& vm) {
    const std::size_t ncols = vm.base_table.columns.size();
    vm.shared_prefix_len.assign(ncols, 0);
    vm.shared_prefix.assign(ncols, {});
    std::vector<const Snapshot*> snaps;
    std::uint64_t max_tuples = 0;
    for (CScanId id : vm.cscans) {
        const CScanState& cs = state(id);
        snaps.push_back(&cs.snapshot);
        max_tuples = std::max(max_tuples, cs.table.tuple_count);
    }
    for (ColumnId col = 0; col < ncols; ++col) {
        std::uint64_t best = 0;
        const std::vector<std::uint64_t>* content = nullptr;
        for (std::size_t i = 0; i < snaps.size(); ++i) {
            for (std::size_t j = i + 1; j < snaps.size(); ++j) {
                const auto& a = snaps[i]->pages_per_column[col];
                const auto& b = snaps[j]->pages_per_column[col];
                std::uint64_t len = 0;
                while (len < a.size() && len < b.size() && a[len] == b[len]) ++len;
                if (len > best) {
                    best = len;
                    content = &a;
                }
            }
        }
        vm.shared_prefix_len[col] = best;
        if (content)
            vm.shared_prefix[col].assign(content->begin(), content->begin() + best);
    }
    // a chunk is shared only if every page of every column sits in the prefix
    const std::uint64_t chunk_size = vm.base_table.chunk_size;
    for (auto& [index, meta] : vm.chunks) {
        const std::uint64_t begin = index * chunk_size;
        const std::uint64_t end = std::min(begin + chunk_size, max_tuples);
        bool shared = begin < end && snaps.size() >= 2;
        for (ColumnId col = 0; col < ncols && shared; ++col) {
            const auto tpp = vm.base_table.columns[col].tuples_per_page;
            if ((end - 1) / tpp >= vm.shared_prefix_len[col]) shared = false;
        }
        meta.shared = shared;
    }
}

std::tuple<int, std::uint64_t, CScanId> AbmScheduler::query_relevance_key(CScanId id) const {
    const CScanState& cs = state(id);
    const int tier = cs.ready.empty() ? 0 : 1;  // starved first
    return {tier, cs.needed.size() - cs.delivered.size(), id};
}

bool AbmScheduler::starved(CScanId id) const {
    return state(id).ready.empty();
}

double AbmScheduler::load_relevance(TableVersionId version, std::uint64_t chunk_index) const {
    auto vit = versions_.find(version);
    if (vit == versions_.end()) return 0.0;
    auto cit = vit->second.chunks.find(chunk_index);
    if (cit == vit->second.chunks.end()) return 0.0;
    return double(cit->second.interested.size()) +
           (cit->second.shared ? cfg_.shared_bonus : 0.0);
}

std::optional<std::uint64_t> AbmScheduler::use_choice(CScanId id) const {
    const CScanState& cs = state(id);
    if (cs.in_order) {
        for (std::uint64_t c : cs.needed) {
            if (cs.delivered.count(c)) continue;
            if (cs.ready.count(c)) return c;  // next undelivered chunk, in order
            return std::nullopt;
        }
        return std::nullopt;
    }
    std::optional<std::uint64_t> best;
    std::size_t best_interest = 0;
    for (std::uint64_t c : cs.ready) {
        const std::size_t interest = chunk_interest(cs.snapshot.table_version, c);
        if (!best || interest < best_interest) {
            best = c;
            best_interest = interest;
        }
    }
    return best;
}

double AbmScheduler::keep_score(const PageId& page) const {
    auto vit = versions_.find(page.table_version);
    if (vit == versions_.end()) return 0.0;
    const VersionMeta& vm = vit->second;
    if (page.column_id >= vm.page_position.size()) return 0.0;
    auto pit = vm.page_position[page.column_id].find(page.page_index);
    if (pit == vm.page_position[page.column_id].end()) return 0.0;
    const auto tpp = vm.base_table.columns[page.column_id].tuples_per_page;
    const std::uint64_t first_chunk = pit->second * tpp / vm.base_table.chunk_size;
    const std::uint64_t last_chunk =
        ((pit->second + 1) * tpp - 1) / vm.base_table.chunk_size;
    double best = 0.0;
    for (std::uint64_t c = first_chunk; c <= last_chunk; ++c) {
        auto cit = vm.chunks.find(c);
        if (cit == vm.chunks.end()) continue;
        best = std::max(best, double(cit->second.interested.size()) +
                                  (cit->second.shared ? cfg_.shared_bonus : 0.0));
    }
    return best;
}

bool AbmScheduler::chunk_shared(TableVersionId version, std::uint64_t chunk_index) const {
    auto vit = versions_.find(version);
    if (vit == versions_.end()) return false;
    auto cit = vit->second.chunks.find(chunk_index);
    return cit != vit->second.chunks.end() && cit->second.shared;
}

std::size_t AbmScheduler::chunk_interest(TableVersionId version,
                                         std::uint64_t chunk_index) const {
    auto vit = versions_.find(version);
    if (vit == versions_.end()) return 0;
    auto cit = vit->second.chunks.find(chunk_index);
    return cit == vit->second.chunks.end() ? 0 : cit->second.interested.size();
}

std::vector<std::uint64_t> AbmScheduler::shared_prefix_pages(TableVersionId version,
                                                             ColumnId column) const {
    auto vit = versions_.find(version);
    if (vit == versions_.end()) return {};
    if (column >= vit->second.shared_prefix.size()) return {};
    return vit->second.shared_prefix[column];
}

void AbmScheduler::deliver(CScanState& cs, std::uint64_t chunk_index) {
    for (const PageId& page : cscan_chunk_pages(cs, chunk_index)) pool_->pin(page);
    cs.delivered.insert(chunk_index);
    cs.ready.erase(chunk_index);
    auto vit = versions_.find(cs.snapshot.table_version);
    if (vit != versions_.end()) {
        auto cit = vit->second.chunks.find(chunk_index);
        if (cit != vit->second.chunks.end()) cit->second.interested.erase(cs.id);
    }
    ChunkDelivery d;
    d.chunk = ChunkId{cs.snapshot.table_version, chunk_index};
    const TupleRange rid = cs.delta.chunk_to_rid_range(cs.table.chunk_range(chunk_index));
    d.rid_ranges = cs.processed.trim_delivered(rid);
    for (const TupleRange& r : d.rid_ranges) d.tuple_count += r.size();
    cs.pending.push_back(std::move(d));
    step_actions_.push_back({AbmAction::Kind::Deliver, cs.id,
                             ChunkId{cs.snapshot.table_version, chunk_index}});
    if (cs.blocked) {
        cs.blocked = false;
        if (wake_hook_) wake_hook_(cs.id);
    }
}

GetChunkResult AbmScheduler::get_chunk(CScanId id, TimeNs now) {
    CScanState& cs = state(id);
    if (!cs.pending.empty()) {
        GetChunkResult r{GetChunkResult::Status::Delivered, std::move(cs.pending.front())};
        cs.pending.pop_front();
        return r;
    }
    if (cs.delivered == cs.needed) return {GetChunkResult::Status::Done, {}};
    cs.blocked = true;
    step(now);
    return {GetChunkResult::Status::Blocked, {}};
}

void AbmScheduler::chunk_consumed(CScanId id, ChunkId chunk, TimeNs now) {
    CScanState& cs = state(id);
    for (const PageId& page : cscan_chunk_pages(cs, chunk.chunk_index))
        pool_->unpin(page, now);
    step(now);
}

void AbmScheduler::unregister_cscan(CScanId id, TimeNs now) {
    CScanState& cs = state(id);
    // drop undelivered handoffs (normally consumed before unregistering)
    for (const ChunkDelivery& d : cs.pending)
        for (const PageId& page : cscan_chunk_pages(cs, d.chunk.chunk_index))
            pool_->unpin(page, now);
    const TableVersionId version = cs.snapshot.table_version;
    auto vit = versions_.find(version);
    if (vit != versions_.end()) {
        VersionMeta& vm = vit->second;
        for (std::uint64_t c : cs.needed) {
            auto cit = vm.chunks.find(c);
            if (cit != vm.chunks.end()) cit->second.interested.erase(id);
        }
        vm.cscans.erase(id);
        if (vm.cscans.empty()) {
            versions_.erase(vit);  // metadata of an orphaned version dies here
        } else {
            rebuild_page_positions(vm);
            recompute_shared(vm);
        }
    }
    cscans_.erase(id);
    step(now);
}

bool AbmScheduler::done(CScanId id) const {
    const CScanState& cs = state(id);
    return cs.pending.empty() && cs.delivered == cs.needed;
}

std::uint64_t AbmScheduler::remaining_chunks(CScanId id) const {
    const CScanState& cs = state(id);
    return cs.needed.size() - cs.delivered.size();
}

std::vector<PageId> AbmScheduler::wanted_pages(CScanId id) const {
    const CScanState& cs = state(id);
    std::set<PageId> pages;
    for (std::uint64_t c : cs.needed) {
        if (cs.delivered.count(c)) continue;
        for (const PageId& p : cscan_chunk_pages(cs, c)) pages.insert(p);
    }
    return {pages.begin(), pages.end()};
}

std::vector<AbmAction> AbmScheduler::step(TimeNs now) {
    if (!pool_) throw std::logic_error("abm scheduler has no pool attached");
    step_actions_.clear();
    // Serve cached chunks until no blocked CScan can consume one. A single
    // load wakes every blocked CScan interested in the arrived chunk.
    bool delivered_any = false;
    for (;;) {
        CScanId best_id = 0;
        std::tuple<int, std::uint64_t, CScanId> best_key;
        std::optional<std::uint64_t> best_chunk;
        for (const auto& [id, cs] : cscans_) {
            if (!cs.blocked) continue;
            const auto choice = use_choice(id);
            if (!choice) continue;
            const auto key = query_relevance_key(id);
            if (!best_chunk || key < best_key) {
                best_id = id;
                best_key = key;
                best_chunk = choice;
            }
        }
        if (!best_chunk) break;
        deliver(state(best_id), *best_chunk);
        delivered_any = true;
    }
    if (!in_flight_) {
        bool all_blocked = !cscans_.empty();
        for (const auto& [id, cs] : cscans_) all_blocked &= cs.blocked;
        if (!try_issue_load(now, false) && !delivered_any && all_blocked) {
            // nothing in flight, nothing deliverable and nobody consuming:
            // force progress past the keep/load comparison so blocked scans
            // cannot stall forever
            try_issue_load(now, true);
        }
    }
    return std::move(step_actions_);
}

bool AbmScheduler::try_issue_load(TimeNs now, bool force) {
    // serve the most relevant blocked CScan that still needs a load
    std::vector<CScanId> order;
    for (const auto& [id, cs] : cscans_)
        if (cs.blocked) order.push_back(id);
    std::sort(order.begin(), order.end(), [&](CScanId a, CScanId b) {
        return query_relevance_key(a) < query_relevance_key(b);
    });
    for (CScanId id : order) {
        CScanState& cs = state(id);
        std::vector<std::uint64_t> candidates;
        if (cs.in_order) {
            for (std::uint64_t c : cs.needed) {
                if (cs.delivered.count(c)) continue;
                if (!cs.ready.count(c) &&
                    !(in_flight_ && in_flight_->table_version == cs.snapshot.table_version &&
                      in_flight_->chunk_index == c))
                    candidates.push_back(c);
                break;  // in-order scans only ever wait for their next chunk
            }
        } else {
            for (std::uint64_t c : cs.needed) {
                if (cs.delivered.count(c) || cs.ready.count(c)) continue;
                if (in_flight_ && in_flight_->table_version == cs.snapshot.table_version &&
                    in_flight_->chunk_index == c)
                    continue;
                candidates.push_back(c);
            }
        }
        if (candidates.empty()) continue;

        const TableVersionId version = cs.snapshot.table_version;
        std::uint64_t chosen = candidates.front();
        double chosen_score = load_relevance(version, chosen);
        for (std::uint64_t c : candidates) {
            const double s = load_relevance(version, c);
            if (s > chosen_score) {  // ties break to the lowest chunk index
                chosen = c;
                chosen_score = s;
            }
        }

        // pages for every interested CScan, so one load feeds all of them
        std::set<PageId> all_pages;
        auto vit = versions_.find(version);
        if (vit != versions_.end()) {
            auto cit = vit->second.chunks.find(chosen);
            if (cit != vit->second.chunks.end()) {
                for (CScanId other : cit->second.interested)
                    for (const PageId& p : cscan_chunk_pages(state(other), chosen))
                        all_pages.insert(p);
            }
        }
        std::vector<PageId> to_load;
        for (const PageId& p : all_pages)
            if (!pool_->is_resident(p) && !pool_->is_load_pending(p)) to_load.push_back(p);
        if (to_load.empty()) continue;  // races resolved by pending loads

        if (to_load.size() > pool_->free_frames()) {
            const std::size_t shortfall = to_load.size() - pool_->free_frames();
            std::optional<double> min_keep;
            std::size_t evictable_elsewhere = 0;
            for (const PageId& p : evictable_) {
                if (all_pages.count(p)) continue;
                ++evictable_elsewhere;
                const double s = keep_score(p);
                if (!min_keep || s < *min_keep) min_keep = s;
            }
            if (evictable_elsewhere < shortfall) continue;  // wait for unpins
            if (!force && !(min_keep && *min_keep < chosen_score)) continue;
            guard_pages_ = all_pages;
            pool_->evict(shortfall, now);
        }

        guard_pages_ = all_pages;
        in_flight_ = ChunkId{version, chosen};
        for (const PageId& p : to_load) {
            in_flight_pending_.insert(p);
            pool_->request_load(p, now);
            if (io_hook_) io_hook_(p);
        }
        step_actions_.push_back({AbmAction::Kind::Load, id, ChunkId{version, chosen}});
        return true;
    }
    return false;
}

void AbmScheduler::page_event(const PageId& page) {
    auto vit = versions_.find(page.table_version);
    if (vit == versions_.end()) return;
    VersionMeta& vm = vit->second;
    if (page.column_id >= vm.page_position.size()) return;
    auto pit = vm.page_position[page.column_id].find(page.page_index);
    if (pit == vm.page_position[page.column_id].end()) return;
    const auto tpp = vm.base_table.columns[page.column_id].tuples_per_page;
    const std::uint64_t first_chunk = pit->second * tpp / vm.base_table.chunk_size;
    const std::uint64_t last_chunk =
        ((pit->second + 1) * tpp - 1) / vm.base_table.chunk_size;
    for (CScanId id : vm.cscans) {
        CScanState& cs = state(id);
        bool scans_column = false;
        for (ColumnId c : cs.columns) scans_column |= (c == page.column_id);
        if (!scans_column) continue;
        const std::uint64_t limit = cs.table.num_chunks();
        for (std::uint64_t c = first_chunk; c <= last_chunk && c < limit; ++c)
            refresh_ready(cs, c);
    }
}

void AbmScheduler::on_access(const PageId&, TimeNs) {}

void AbmScheduler::on_loaded(const PageId& page, TimeNs) {
    evictable_.insert(page);
    if (in_flight_pending_.erase(page) && in_flight_pending_.empty()) {
        in_flight_.reset();
        guard_pages_.clear();
    }
    page_event(page);
}

void AbmScheduler::on_evicted(const PageId& page) {
    evictable_.erase(page);
    page_event(page);
}

void AbmScheduler::on_pinned(const PageId& page) {
    evictable_.erase(page);
}

void AbmScheduler::on_unpinned(const PageId& page, TimeNs) {
    evictable_.insert(page);
}

std::vector<PageId> AbmScheduler::select_victims(std::size_t k, TimeNs) {
    // chunk-granularity preference expressed per page: lowest keep score
    // first, higher chunk positions evicted before lower ones on ties
    struct Victim {
        double score;
        PageId page;
    };
    std::vector<Victim> victims;
    victims.reserve(evictable_.size());
    for (const PageId& p : evictable_) {
        if (guard_pages_.count(p)) continue;
        victims.push_back({keep_score(p), p});
    }
    std::sort(victims.begin(), victims.end(), [](const Victim& a, const Victim& b) {
        if (a.score != b.score) return a.score < b.score;
        return b.page < a.page;
    });
    std::vector<PageId> out;
    out.reserve(std::min(k, victims.size()));
    for (const Victim& v : victims) {
        if (out.size() >= k) break;
        out.push_back(v.page);
    }
    return out;
}

}  // namespace scanbench
