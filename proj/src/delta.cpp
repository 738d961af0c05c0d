#include "scanbench/delta.hpp"

#include <algorithm>
#include <stdexcept>

namespace scanbench {

DeltaList::DeltaList(std::uint64_t stable_tuple_count, std::vector<DeltaEntry> entries)
    : stable_count_(stable_tuple_count) {
    std::sort(entries.begin(), entries.end(),
              [](const DeltaEntry& a, const DeltaEntry& b) { return a.sid < b.sid; });
    for (const auto& e : entries) {
        if (e.sid > stable_count_)
            throw std::invalid_argument("delta entry sid beyond table end");
        if (e.deleted && e.sid == stable_count_)
            throw std::invalid_argument("delete must reference an existing stable tuple");
        if (!entries_.empty() && entries_.back().sid == e.sid) {
            auto& prev = entries_.back();
            if (prev.deleted && e.deleted)
                throw std::invalid_argument("duplicate delete at one sid");
            prev.deleted = prev.deleted || e.deleted;
            prev.insert_count += e.insert_count;
        } else if (e.insert_count > 0 || e.deleted) {
            entries_.push_back(e);
        }
    }
    cum_.resize(entries_.size() + 1);
    std::uint64_t ins = 0, del = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        cum_[i] = {ins, del};
        ins += entries_[i].insert_count;
        if (entries_[i].deleted) ++del;
    }
    cum_.back() = {ins, del};
    visible_count_ = stable_count_ - del + ins;
}

std::size_t DeltaList::lower_entry(std::uint64_t s) const {
    return std::lower_bound(entries_.begin(), entries_.end(), s,
                            [](const DeltaEntry& e, std::uint64_t v) { return e.sid < v; }) -
           entries_.begin();
}

std::uint64_t DeltaList::deletes_lt(std::uint64_t s) const {
    return cum_[lower_entry(s)].deletes_before;
}

std::uint64_t DeltaList::inserts_lt(std::uint64_t s) const {
    return cum_[lower_entry(s)].inserts_before;
}

std::uint64_t DeltaList::inserts_le(std::uint64_t s) const {
    const auto i = lower_entry(s);
    if (i < entries_.size() && entries_[i].sid == s)
        return cum_[i].inserts_before + entries_[i].insert_count;
    return cum_[i].inserts_before;
}

const DeltaEntry* DeltaList::entry_at(std::uint64_t s) const {
    const auto i = lower_entry(s);
    if (i < entries_.size() && entries_[i].sid == s) return &entries_[i];
    return nullptr;
}

std::uint64_t DeltaList::sid_to_rid_low(std::uint64_t sid) const {
    if (sid > stable_count_) throw std::out_of_range("sid out of bounds");
    return sid - deletes_lt(sid) + inserts_lt(sid);
}

std::uint64_t DeltaList::sid_to_rid_high(std::uint64_t sid) const {
    if (sid > stable_count_) throw std::out_of_range("sid out of bounds");
    const DeltaEntry* e = entry_at(sid);
    const bool deleted = (sid == stable_count_) || (e != nullptr && e->deleted);
    if (!deleted) return sid - deletes_lt(sid) + inserts_le(sid);
    const std::uint64_t inserts_here = e ? e->insert_count : 0;
    if (inserts_here > 0)  // highest RID mapping to sid is its last insert
        return sid - deletes_lt(sid) + inserts_lt(sid) + inserts_here - 1;
    return sid_to_rid_low(sid);
}

std::uint64_t DeltaList::rid_to_sid(std::uint64_t rid) const {
    if (rid >= visible_count_) throw std::out_of_range("rid out of bounds");
    // Largest s with sid_to_rid_low(s) <= rid; low() is monotone and empty
    // groups (deleted tuples without inserts) form plateaus no rid hits.
    std::uint64_t lo = 0, hi = stable_count_;
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo + 1) / 2;
        if (sid_to_rid_low(mid) <= rid)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

TupleRange DeltaList::chunk_to_rid_range(TupleRange sid_range) const {
    if (sid_range.begin > sid_range.end || sid_range.end > stable_count_)
        throw std::out_of_range("sid range out of bounds");
    const std::uint64_t lo = sid_to_rid_low(sid_range.begin);
    if (sid_range.empty()) return {lo, lo};
    // The table's final chunk also covers inserts appended after the last
    // stable tuple; everywhere else the exclusive upper bound translates via
    // the highest RID of the last stable tuple in range. A chunk ending in a
    // deleted run borrows the next tuple's RID, which the stream end caps.
    if (sid_range.end == stable_count_) return {lo, visible_count_};
    return {lo, std::min(sid_to_rid_high(sid_range.end - 1) + 1, visible_count_)};
}

void ProcessedSet::add(TupleRange r) {
    if (r.empty()) return;
    auto begin = r.begin, end = r.end;
    // absorb every range overlapping or touching [begin, end)
    auto it = ranges_.upper_bound(begin);
    if (it != ranges_.begin()) {
        auto prev = std::prev(it);
        if (prev->second >= begin) it = prev;
    }
    while (it != ranges_.end() && it->first <= end) {
        begin = std::min(begin, it->first);
        end = std::max(end, it->second);
        it = ranges_.erase(it);
    }
    ranges_.emplace(begin, end);
}

bool ProcessedSet::covers(std::uint64_t pos) const {
    auto it = ranges_.upper_bound(pos);
    if (it == ranges_.begin()) return false;
    return std::prev(it)->second > pos;
}

std::vector<TupleRange> ProcessedSet::trim_delivered(TupleRange candidate) {
    std::vector<TupleRange> out;
    if (candidate.empty()) {
        add(candidate);
        return out;
    }
    std::uint64_t pos = candidate.begin;
    auto it = ranges_.upper_bound(pos);
    if (it != ranges_.begin()) {
        auto prev = std::prev(it);
        if (prev->second > pos) pos = std::min(prev->second, candidate.end);
    }
    while (pos < candidate.end) {
        std::uint64_t gap_end = candidate.end;
        if (it != ranges_.end() && it->first < candidate.end) gap_end = it->first;
        if (pos < gap_end) out.push_back({pos, gap_end});
        if (it == ranges_.end() || it->first >= candidate.end) break;
        pos = std::min(it->second, candidate.end);
        ++it;
    }
    add(candidate);
    return out;
}

}  // namespace scanbench
