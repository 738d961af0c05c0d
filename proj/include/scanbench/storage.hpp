#pragma once

// Columnar table layout model: tables hold tuple counts only, columns map
// tuple positions to fixed-size pages, chunks are large logical tuple ranges
// (the scheduling granularity of cooperative scans). No tuple contents are
// ever stored; the simulator tracks positions and bytes.

#include <cstdint>
#include <span>
#include <vector>

#include "scanbench/types.hpp"

namespace scanbench {

struct ColumnDef {
    ColumnId column_id = 0;
    std::uint64_t tuples_per_page = 1;
    std::uint64_t page_size_bytes = 65536;
};

struct TableDef {
    std::uint32_t table_id = 0;
    // Identity of this stable table image. A checkpoint produces a new
    // version with a fresh page identifier space.
    TableVersionId table_version = 0;
    std::uint64_t tuple_count = 0;
    std::vector<ColumnDef> columns;
    std::uint64_t chunk_size = 100000;

    void validate() const;

    std::uint64_t num_chunks() const {
        return (tuple_count + chunk_size - 1) / chunk_size;
    }
    std::uint64_t num_pages(ColumnId col) const;
    std::uint64_t page_tuple_count(ColumnId col, std::uint64_t page_index) const;
    // SID span of a chunk, clamped to the table end.
    TupleRange chunk_range(std::uint64_t chunk_index) const;
};

// A storage-level snapshot: one ordered page-number list per column. Lists of
// snapshots that differ only by appends share a common prefix; lists of
// different table versions never share pages (versioned PageId).
struct Snapshot {
    std::uint64_t snapshot_id = 0;
    TableVersionId table_version = 0;
    std::uint64_t tuple_count = 0;
    std::vector<std::vector<std::uint64_t>> pages_per_column;
    bool is_master = false;

    // Snapshot whose page lists are exactly the table's own layout.
    static Snapshot identity(const TableDef& table, std::uint64_t snapshot_id,
                             bool is_master = true);
};

// Pages of `col` whose tuple span intersects `range`, ascending.
std::vector<PageId> pages_for_range(const TableDef& table, ColumnId col, TupleRange range);

// Union of pages_for_range over the chunk's tuple range, one entry per page,
// sorted. A page that spans two adjacent chunks appears in both chunks' sets.
std::vector<PageId> chunk_pages(const TableDef& table, ChunkId chunk,
                                std::span<const ColumnId> columns);

std::uint64_t chunk_of_sid(const TableDef& table, std::uint64_t sid);

}  // namespace scanbench
