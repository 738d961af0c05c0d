#pragma once

// Positional-delta translation between stable positions (SID) and visible
// positions (RID). Deltas are kept as a flat list ordered by SID with
// prefix-summed running counts; every translation is a binary search.
//
// Conventions: an Insert(count) keyed at SID s produces `count` tuples
// immediately before stable tuple s (a key of s == stable_count appends after
// the table end). RID->SID maps an inserted tuple to its key. SID->RID of a
// deleted tuple with no attached inserts is the lowest RID translating to a
// higher SID, for both the low and the high variant.

#include <cstdint>
#include <map>
#include <vector>

#include "scanbench/types.hpp"

namespace scanbench {

struct DeltaEntry {
    std::uint64_t sid = 0;
    std::uint64_t insert_count = 0;  // tuples inserted before stable tuple `sid`
    bool deleted = false;            // stable tuple `sid` removed from the visible stream
};

class DeltaList {
  public:
    DeltaList() = default;
    // Entries need not be sorted; inserts and a delete at the same SID merge
    // into one entry. Throws on duplicate deletes or out-of-range keys.
    DeltaList(std::uint64_t stable_tuple_count, std::vector<DeltaEntry> entries);

    std::uint64_t stable_count() const { return stable_count_; }
    std::uint64_t visible_count() const { return visible_count_; }
    bool empty() const { return entries_.empty(); }
    const std::vector<DeltaEntry>& entries() const { return entries_; }

    std::uint64_t rid_to_sid(std::uint64_t rid) const;
    std::uint64_t sid_to_rid_low(std::uint64_t sid) const;
    std::uint64_t sid_to_rid_high(std::uint64_t sid) const;

    // Widest RID range producible from the stable tuples of `sid_range` plus
    // the inserts attached to them. Neighboring chunks may overlap in RID;
    // the caller trims against its ProcessedSet.
    TupleRange chunk_to_rid_range(TupleRange sid_range) const;

  private:
    struct Cum {
        std::uint64_t inserts_before = 0;  // inserts keyed at sid < entry sid
        std::uint64_t deletes_before = 0;
    };

    // index of first entry with sid >= s
    std::size_t lower_entry(std::uint64_t s) const;
    std::uint64_t deletes_lt(std::uint64_t s) const;
    std::uint64_t inserts_lt(std::uint64_t s) const;
    std::uint64_t inserts_le(std::uint64_t s) const;
    const DeltaEntry* entry_at(std::uint64_t s) const;

    std::uint64_t stable_count_ = 0;
    std::uint64_t visible_count_ = 0;
    std::vector<DeltaEntry> entries_;  // sorted by sid, unique
    std::vector<Cum> cum_;             // parallel to entries_, plus one tail element
};

// Disjoint, sorted, coalesced set of already-produced RID ranges owned by a
// single scan.
class ProcessedSet {
  public:
    bool empty() const { return ranges_.empty(); }
    const std::map<std::uint64_t, std::uint64_t>& ranges() const { return ranges_; }

    void add(TupleRange r);
    bool covers(std::uint64_t pos) const;

    // Parts of `candidate` not yet processed, in ascending order; `candidate`
    // itself is then marked processed in full.
    std::vector<TupleRange> trim_delivered(TupleRange candidate);

  private:
    std::map<std::uint64_t, std::uint64_t> ranges_;  // begin -> end
};

}  // namespace scanbench
