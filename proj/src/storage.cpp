#include "scanbench/storage.hpp"

#include <algorithm>
#include <stdexcept>

namespace scanbench {

void TableDef::validate() const {
    if (chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");
    if (columns.empty()) throw std::invalid_argument("table needs at least one column");
    for (const auto& c : columns) {
        if (c.tuples_per_page < 1)
            throw std::invalid_argument("tuples_per_page must be >= 1");
        if (c.page_size_bytes < 1)
            throw std::invalid_argument("page_size_bytes must be >= 1");
    }
    for (ColumnId i = 0; i < columns.size(); ++i) {
        if (columns[i].column_id != i)
            throw std::invalid_argument("column ids must equal their index");
    }
}

std::uint64_t TableDef::num_pages(ColumnId col) const {
    if (col >= columns.size()) throw std::out_of_range("unknown column");
    const auto tpp = columns[col].tuples_per_page;
    return (tuple_count + tpp - 1) / tpp;
}

std::uint64_t TableDef::page_tuple_count(ColumnId col, std::uint64_t page_index) const {
    const auto n = num_pages(col);
    if (page_index >= n) throw std::out_of_range("page index out of range");
    const auto tpp = columns[col].tuples_per_page;
    if (page_index + 1 < n) return tpp;
    return tuple_count - page_index * tpp;  // last page may be partial
}

TupleRange TableDef::chunk_range(std::uint64_t chunk_index) const {
    if (chunk_index >= num_chunks()) throw std::out_of_range("chunk index out of range");
    const std::uint64_t begin = chunk_index * chunk_size;
    return {begin, std::min(begin + chunk_size, tuple_count)};
}

Snapshot Snapshot::identity(const TableDef& table, std::uint64_t snapshot_id,
                            bool is_master) {
    Snapshot s;
    s.snapshot_id = snapshot_id;
    s.table_version = table.table_version;
    s.tuple_count = table.tuple_count;
    s.is_master = is_master;
    s.pages_per_column.resize(table.columns.size());
    for (ColumnId c = 0; c < table.columns.size(); ++c) {
        const auto n = table.num_pages(c);
        s.pages_per_column[c].resize(n);
        for (std::uint64_t p = 0; p < n; ++p) s.pages_per_column[c][p] = p;
    }
    return s;
}

std::vector<PageId> pages_for_range(const TableDef& table, ColumnId col, TupleRange range) {
    if (col >= table.columns.size()) throw std::out_of_range("unknown column");
    if (range.begin > range.end || range.end > table.tuple_count)
        throw std::out_of_range("tuple range out of bounds");
    std::vector<PageId> out;
    if (range.empty()) return out;
    const auto tpp = table.columns[col].tuples_per_page;
    const std::uint64_t first = range.begin / tpp;
    const std::uint64_t last = (range.end - 1) / tpp;
    out.reserve(last - first + 1);
    for (std::uint64_t p = first; p <= last; ++p)
        out.push_back(PageId{table.table_version, col, p});
    return out;
}

std::vector<PageId> chunk_pages(const TableDef& table, ChunkId chunk,
                                std::span<const ColumnId> columns) {
    if (chunk.table_version != table.table_version)
        throw std::invalid_argument("chunk does not belong to this table version");
    const TupleRange range = table.chunk_range(chunk.chunk_index);
    std::vector<PageId> out;
    for (ColumnId col : columns) {
        auto pages = pages_for_range(table, col, range);
        out.insert(out.end(), pages.begin(), pages.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::uint64_t chunk_of_sid(const TableDef& table, std::uint64_t sid) {
    if (sid >= table.tuple_count) throw std::out_of_range("sid out of bounds");
    return sid / table.chunk_size;
}

}  // namespace scanbench
