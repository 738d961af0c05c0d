#pragma once

// Offline replacement replays over a captured page-reference trace: Belady's
// OPT (evict the page referenced furthest in the future), an LRU replay for
// comparison, and an exhaustive-search oracle for tiny instances.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scanbench/types.hpp"

namespace scanbench {

struct TraceEvent {
    TimeNs time = 0;
    PageId page;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

// Misses (= pages loaded) of OPT over the reference string with `capacity`
// frames. Pages never referenced again count as infinitely far; ties among
// those break toward the largest PageId.
std::uint64_t opt_replay(const Trace& trace, std::size_t capacity);

struct ReplayVolume {
    std::uint64_t misses = 0;
    std::uint64_t bytes = 0;
};

ReplayVolume opt_replay_volume(const Trace& trace, std::size_t capacity,
                               const std::function<std::uint64_t(const PageId&)>& page_bytes);

std::uint64_t lru_replay(const Trace& trace, std::size_t capacity);

// Minimum achievable misses over every eviction decision sequence. Refuses
// instances beyond |trace| <= 20 or capacity > 4.
std::uint64_t brute_force_min_misses(const Trace& trace, std::size_t capacity);

// One line per event: `<time_ns> <table_version> <column_id> <page_index>`.
// Writing then reading reproduces the trace bit-exactly.
void write_trace(const std::string& path, const Trace& trace);
Trace read_trace(const std::string& path);

}  // namespace scanbench
