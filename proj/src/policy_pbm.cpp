#include "scanbench/policy_pbm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace scanbench {

PbmPolicy::PbmPolicy(PbmConfig cfg, double initial_speed)
    : cfg_(cfg), initial_speed_(std::max(initial_speed, cfg.speed_floor)) {
    if (cfg_.n_groups < 1 || cfg_.buckets_per_group < 1)
        throw std::invalid_argument("bucket geometry must be positive");
    if (cfg_.time_slice < 1) throw std::invalid_argument("time_slice must be positive");
    const std::size_t requested =
        static_cast<std::size_t>(cfg_.n_groups) * cfg_.buckets_per_group;
    requested_.reserve(requested);
    for (std::size_t i = 0; i < requested; ++i) {
        requested_.push_back(std::make_unique<Bucket>());
        requested_.back()->index = static_cast<int>(i);
    }
    not_requested_ = std::make_unique<Bucket>();
    not_requested_->index = kNotRequested;
}

PbmPolicy::~PbmPolicy() = default;

void PbmPolicy::bucket_add(Bucket& b, PageMeta& meta) {
    meta.prev = b.tail;
    meta.next = nullptr;
    if (b.tail)
        b.tail->next = &meta;
    else
        b.head = &meta;
    b.tail = &meta;
    ++b.count;
    meta.bucket = &b;
    ++counters_.adds;
    counters_.node_touches += 2;
}

void PbmPolicy::bucket_remove(PageMeta& meta) {
    Bucket* b = meta.bucket;
    if (!b) return;
    if (meta.prev)
        meta.prev->next = meta.next;
    else
        b->head = meta.next;
    if (meta.next)
        meta.next->prev = meta.prev;
    else
        b->tail = meta.prev;
    meta.prev = meta.next = nullptr;
    meta.bucket = nullptr;
    --b->count;
    ++counters_.removes;
    counters_.node_touches += 3;
}

PbmPolicy::PageMeta* PbmPolicy::bucket_pop(Bucket& b) {
    PageMeta* meta = b.head;
    if (!meta) return nullptr;
    b.head = meta->next;
    if (b.head)
        b.head->prev = nullptr;
    else
        b.tail = nullptr;
    meta->prev = meta->next = nullptr;
    meta->bucket = nullptr;
    --b.count;
    ++counters_.pops;
    counters_.node_touches += 2;
    return meta;
}

ScanId PbmPolicy::register_scan(const TableDef& table, std::span<const ColumnId> columns,
                                std::span<const TupleRange> ranges, TimeNs now) {
    const ScanId id = next_scan_id_++;
    ScanInfo info;
    info.speed = initial_speed_;
    for (ColumnId col : columns) {
        info.consumed[col] = 0;
        info.last_report[col] = {now, 0};
    }
    scans_.emplace(id, std::move(info));
    for (ColumnId col : columns) {
        std::uint64_t tuples_behind = 0;  // resets per column
        for (const TupleRange& range : ranges) {
            for (const PageId& page : pages_for_range(table, col, range)) {
                PageMeta& meta = metas_[page];
                meta.page = page;
                meta.consuming.emplace_back(id, tuples_behind);
                tuples_behind += table.page_tuple_count(col, page.page_index);
                if (meta.resident && !meta.pinned) page_push(meta, now);
            }
        }
    }
    return id;
}

void PbmPolicy::report_scan_position(ScanId id, ColumnId column,
                                     std::uint64_t tuples_consumed, TimeNs now) {
    auto it = scans_.find(id);
    if (it == scans_.end()) throw std::logic_error("report for unknown scan");
    ScanInfo& info = it->second;
    auto cit = info.consumed.find(column);
    if (cit == info.consumed.end()) throw std::logic_error("report for unregistered column");
    if (tuples_consumed < cit->second) throw std::logic_error("scan position regressed");
    cit->second = tuples_consumed;

    auto& [last_time, last_tuples] = info.last_report[column];
    if (now > last_time) {
        const double dt = double(now - last_time) / double(kNsPerSecond);
        const double observed = double(tuples_consumed - last_tuples) / dt;
        const double alpha = info.have_sample ? cfg_.ema_alpha : 1.0;
        info.speed =
            std::max(alpha * observed + (1.0 - alpha) * info.speed, cfg_.speed_floor);
        info.have_sample = true;
        last_time = now;
        last_tuples = tuples_consumed;
    }
}

void PbmPolicy::unregister_scan(ScanId id, TimeNs) {
    if (scans_.erase(id) == 0) throw std::logic_error("unregister of unknown scan");
    // page entries referencing the scan are dropped lazily at estimate time
}

std::optional<double> PbmPolicy::estimate_const(const PageMeta& meta) const {
    std::optional<double> nearest;
    for (const auto& [scan_id, behind] : meta.consuming) {
        auto it = scans_.find(scan_id);
        if (it == scans_.end()) continue;  // stale: scan unregistered
        const auto cit = it->second.consumed.find(meta.page.column_id);
        if (cit == it->second.consumed.end()) continue;
        if (behind < cit->second) continue;  // scan already passed this page
        const double est = double(behind - cit->second) / it->second.speed;
        if (!nearest || est < *nearest) nearest = est;
    }
    return nearest;
}

std::optional<double> PbmPolicy::page_next_consumption(const PageId& page, TimeNs) {
    auto it = metas_.find(page);
    if (it == metas_.end()) return std::nullopt;
    PageMeta& meta = it->second;
    std::erase_if(meta.consuming, [&](const auto& entry) {
        auto sit = scans_.find(entry.first);
        if (sit == scans_.end()) return true;
        const auto cit = sit->second.consumed.find(meta.page.column_id);
        return cit == sit->second.consumed.end() || entry.second < cit->second;
    });
    const auto est = estimate_const(meta);
    if (meta.consuming.empty() && !meta.resident) metas_.erase(it);
    return est;
}

std::size_t PbmPolicy::time_to_bucket_number(TimeNs t) const {
    if (t < 0) t = 0;
    const std::uint64_t slices = std::uint64_t(t) / std::uint64_t(cfg_.time_slice);
    const std::uint64_t m = std::uint64_t(cfg_.buckets_per_group);
    const std::uint64_t last = num_requested_buckets() - 1;
    // group g covers slices [m*(2^g - 1), m*(2^(g+1) - 1)), in spans of 2^g
    const unsigned g = std::bit_width(slices / m + 1) - 1;
    if (g >= static_cast<unsigned>(cfg_.n_groups)) return last;
    const std::uint64_t offset = (slices - m * ((std::uint64_t(1) << g) - 1)) >> g;
    return std::min(std::uint64_t(g) * m + offset, last);
}

int PbmPolicy::target_bucket_index(const std::optional<double>& est_seconds) const {
    if (!est_seconds) return kNotRequested;
    const TimeNs est_ns = TimeNs(std::llround(*est_seconds * double(kNsPerSecond)));
    return static_cast<int>(time_to_bucket_number(est_ns));
}

void PbmPolicy::page_push(PageMeta& meta, TimeNs now) {
    bucket_remove(meta);
    if (!meta.resident || meta.pinned) return;
    const int target = target_bucket_index(page_next_consumption(meta.page, now));
    if (target == kNotRequested)
        bucket_add(*not_requested_, meta);
    else
        bucket_add(*requested_[static_cast<std::size_t>(target)], meta);
}

void PbmPolicy::refresh_requested_buckets(TimeNs now) {
    ++time_passed_slices_;
    const std::size_t m = static_cast<std::size_t>(cfg_.buckets_per_group);
    std::unique_ptr<Bucket> drained;
    // Shift a bucket one position left when its span divides the elapsed
    // slices. Spans are positional (position i spans 2^(i/m) slices), so a
    // bucket entering a lower group implicitly halves its span.
    for (std::size_t i = 0; i < requested_.size(); ++i) {
        const std::uint64_t len = std::uint64_t(1) << (i / m);
        if (time_passed_slices_ % len != 0) continue;
        if (i == 0) {
            drained = std::move(requested_[0]);
        } else {
            // geometry guarantees the slot to the left shifted this pass too
            if (requested_[i - 1])
                throw std::logic_error("bucket shift into occupied slot");
            requested_[i - 1] = std::move(requested_[i]);
            requested_[i - 1]->index = static_cast<int>(i - 1);
        }
        ++counters_.shifts;
        ++counters_.node_touches;
    }
    for (std::size_t i = 0; i < requested_.size(); ++i) {
        if (!requested_[i]) {
            requested_[i] = std::make_unique<Bucket>();
            requested_[i]->index = static_cast<int>(i);
        }
    }
    if (drained) {
        while (PageMeta* meta = bucket_pop(*drained)) page_push(*meta, now);
    }
    // Estimates move when scans report, stall or unregister; re-push any page
    // whose recomputed estimate no longer matches its position.
    std::vector<PageMeta*> stale;
    for (auto& [page, meta] : metas_) {
        if (!meta.resident || meta.pinned) continue;
        if (target_bucket_index(estimate_const(meta)) != meta.bucket->index)
            stale.push_back(&meta);
    }
    counters_.sweep_repushes += stale.size();
    for (PageMeta* meta : stale) page_push(*meta, now);
    if (cfg_.validate) validate_structures(now);
}

void PbmPolicy::on_access(const PageId&, TimeNs) {}

void PbmPolicy::on_loaded(const PageId& page, TimeNs now) {
    PageMeta& meta = metas_[page];
    meta.page = page;
    meta.resident = true;
    page_push(meta, now);
}

void PbmPolicy::on_evicted(const PageId& page) {
    auto it = metas_.find(page);
    if (it == metas_.end()) return;
    bucket_remove(it->second);
    it->second.resident = false;
    it->second.pinned = false;
    maybe_gc(page);
}

void PbmPolicy::on_pinned(const PageId& page) {
    auto it = metas_.find(page);
    if (it == metas_.end()) return;
    bucket_remove(it->second);
    it->second.pinned = true;
}

void PbmPolicy::on_unpinned(const PageId& page, TimeNs now) {
    auto it = metas_.find(page);
    if (it == metas_.end()) return;
    it->second.pinned = false;
    page_push(it->second, now);
}

std::vector<PageId> PbmPolicy::select_victims(std::size_t k, TimeNs) {
    std::vector<PageId> out;
    out.reserve(k);
    while (out.size() < k) {
        PageMeta* meta = bucket_pop(*not_requested_);
        if (!meta) break;
        out.push_back(meta->page);
    }
    for (std::size_t i = requested_.size(); i-- > 0 && out.size() < k;) {
        while (out.size() < k) {
            PageMeta* meta = bucket_pop(*requested_[i]);
            if (!meta) break;
            out.push_back(meta->page);
        }
    }
    return out;
}

void PbmPolicy::maybe_gc(const PageId& page) {
    auto it = metas_.find(page);
    if (it == metas_.end()) return;
    PageMeta& meta = it->second;
    if (meta.resident) return;
    std::erase_if(meta.consuming,
                  [&](const auto& entry) { return scans_.count(entry.first) == 0; });
    if (meta.consuming.empty()) metas_.erase(it);
}

std::optional<int> PbmPolicy::bucket_of(const PageId& page) const {
    auto it = metas_.find(page);
    if (it == metas_.end() || !it->second.bucket) return std::nullopt;
    return it->second.bucket->index;
}

std::vector<PageId> PbmPolicy::bucket_contents(int bucket) const {
    const Bucket* b = bucket == kNotRequested
                          ? not_requested_.get()
                          : requested_.at(static_cast<std::size_t>(bucket)).get();
    std::vector<PageId> out;
    for (const PageMeta* m = b->head; m != nullptr; m = m->next) out.push_back(m->page);
    return out;
}

std::vector<std::pair<ScanId, std::uint64_t>> PbmPolicy::consuming_scans(
    const PageId& page) const {
    auto it = metas_.find(page);
    if (it == metas_.end()) return {};
    return it->second.consuming;
}

double PbmPolicy::scan_speed(ScanId id) const {
    auto it = scans_.find(id);
    if (it == scans_.end()) throw std::logic_error("unknown scan");
    return it->second.speed;
}

void PbmPolicy::validate_structures(TimeNs) const {
    std::size_t expected = 0;
    for (const auto& [page, meta] : metas_)
        if (meta.resident && !meta.pinned) ++expected;

    std::size_t linked = 0;
    auto walk = [&](const Bucket& b) {
        std::size_t n = 0;
        const PageMeta* prev = nullptr;
        for (const PageMeta* m = b.head; m != nullptr; m = m->next) {
            if (m->bucket != &b)
                throw SimError("pbm: bucket field disagrees with list membership");
            if (m->prev != prev) throw SimError("pbm: corrupt bucket links");
            if (!m->resident || m->pinned)
                throw SimError("pbm: non-evictable page present in a bucket");
            prev = m;
            ++n;
        }
        if (n != b.count) throw SimError("pbm: bucket count mismatch");
        linked += n;
    };
    for (const auto& b : requested_) walk(*b);
    walk(*not_requested_);
    if (linked != expected)
        throw SimError("pbm: resident unpinned pages not in exactly one bucket");

    // one-bucket slack on recomputed placement
    for (const auto& [page, meta] : metas_) {
        if (!meta.resident || meta.pinned) continue;
        const int target = target_bucket_index(estimate_const(meta));
        const int current = meta.bucket->index;
        if (target == current) continue;
        if (target >= 0 && current >= 0 && std::abs(target - current) <= 1) continue;
        throw SimError("pbm: page placed more than one bucket from its estimate");
    }
}

}  // namespace scanbench
