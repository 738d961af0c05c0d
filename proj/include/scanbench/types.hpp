#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace scanbench {

// Simulated time, nanoseconds since run start.
using TimeNs = std::int64_t;

constexpr TimeNs kNsPerSecond = 1'000'000'000;

using TableVersionId = std::uint32_t;
using ColumnId = std::uint32_t;
using ScanId = std::uint64_t;
using CScanId = std::uint64_t;

// Half-open range of tuple positions. Used in both the SID and the RID
// domain; which one is meant follows from context.
struct TupleRange {
    std::uint64_t begin = 0;
    std::uint64_t end = 0;

    std::uint64_t size() const { return end - begin; }
    bool empty() const { return begin == end; }
    bool contains(std::uint64_t pos) const { return pos >= begin && pos < end; }

    friend bool operator==(const TupleRange&, const TupleRange&) = default;
    friend auto operator<=>(const TupleRange&, const TupleRange&) = default;
};

struct PageId {
    TableVersionId table_version = 0;
    ColumnId column_id = 0;
    std::uint64_t page_index = 0;

    friend bool operator==(const PageId&, const PageId&) = default;
    friend auto operator<=>(const PageId&, const PageId&) = default;
};

struct ChunkId {
    TableVersionId table_version = 0;
    std::uint64_t chunk_index = 0;

    friend bool operator==(const ChunkId&, const ChunkId&) = default;
    friend auto operator<=>(const ChunkId&, const ChunkId&) = default;
};

struct PageIdHash {
    std::size_t operator()(const PageId& p) const {
        std::uint64_t h = p.page_index;
        h ^= (std::uint64_t(p.table_version) << 32) | p.column_id;
        h *= 0x9e3779b97f4a7c15ull;
        h ^= h >> 32;
        return static_cast<std::size_t>(h);
    }
};

// Raised when a run violates a structural invariant (pool exhausted,
// deadlocked event loop, policy contract breach).
class SimError : public std::runtime_error {
  public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

inline std::string to_string(const PageId& p) {
    return "v" + std::to_string(p.table_version) + ":c" + std::to_string(p.column_id) +
           ":p" + std::to_string(p.page_index);
}

}  // namespace scanbench
