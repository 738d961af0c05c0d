#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "scanbench/storage.hpp"

using namespace scanbench;

namespace {

TableDef one_column_table(std::uint64_t tuples, std::uint64_t tpp,
                          std::uint64_t chunk_size) {
    TableDef t;
    t.table_id = 0;
    t.table_version = 0;
    t.tuple_count = tuples;
    t.chunk_size = chunk_size;
    t.columns = {ColumnDef{0, tpp, 65536}};
    t.validate();
    return t;
}

std::vector<std::uint64_t> indexes(const std::vector<PageId>& pages) {
    std::vector<std::uint64_t> out;
    for (const PageId& p : pages) out.push_back(p.page_index);
    return out;
}

}  // namespace

TEST_CASE("pages_for_range maps tuple ranges to page runs") {
    const TableDef t = one_column_table(1000, 100, 100);

    CHECK(indexes(pages_for_range(t, 0, {0, 100})) == std::vector<std::uint64_t>{0});
    CHECK(indexes(pages_for_range(t, 0, {150, 250})) ==
          testing::pages_by_tuple_enumeration(100, {150, 250}));
    CHECK(indexes(pages_for_range(t, 0, {150, 250})) == std::vector<std::uint64_t>{1, 2});
    CHECK(pages_for_range(t, 0, {50, 50}).empty());

    CHECK_THROWS_AS(pages_for_range(t, 0, {900, 1001}), std::out_of_range);
    CHECK_THROWS_AS(pages_for_range(t, 7, {0, 10}), std::out_of_range);
}

TEST_CASE("pages_for_range agrees with per-tuple enumeration") {
    for (std::uint64_t tpp : {1ull, 3ull, 64ull, 100ull, 150ull}) {
        const TableDef t = one_column_table(600, tpp, 100);
        for (std::uint64_t begin = 0; begin <= 600; begin += 37) {
            for (std::uint64_t end = begin; end <= 600; end += 91) {
                CHECK(indexes(pages_for_range(t, 0, {begin, end})) ==
                      testing::pages_by_tuple_enumeration(tpp, {begin, end}));
            }
        }
    }
}

TEST_CASE("chunk_pages unions page sets per column") {
    SUBCASE("aligned layout: one page per chunk") {
        const TableDef t = one_column_table(1000, 100, 100);
        const ColumnId cols[] = {0};
        CHECK(indexes(chunk_pages(t, {0, 2}, cols)) == std::vector<std::uint64_t>{2});
    }
    SUBCASE("page spanning adjacent chunks appears in both") {
        const TableDef t = one_column_table(600, 150, 100);
        const ColumnId cols[] = {0};
        // chunk 1 covers tuples [100, 200): pages 0 and 1 per the oracle
        CHECK(indexes(chunk_pages(t, {0, 1}, cols)) ==
              testing::pages_by_tuple_enumeration(150, {100, 200}));
        CHECK(indexes(chunk_pages(t, {0, 1}, cols)) == std::vector<std::uint64_t>{0, 1});
        const auto c0 = chunk_pages(t, {0, 0}, cols);
        const auto c1 = chunk_pages(t, {0, 1}, cols);
        CHECK(std::count(c0.begin(), c0.end(), PageId{0, 0, 0}) == 1);
        CHECK(std::count(c1.begin(), c1.end(), PageId{0, 0, 0}) == 1);
    }
    SUBCASE("two columns contribute independently") {
        TableDef t = one_column_table(200, 100, 100);
        t.columns.push_back(ColumnDef{1, 50, 65536});
        const ColumnId cols[] = {0, 1};
        // chunk 0 = tuples [0,100): 1 page in column 0, 2 pages in column 1
        CHECK(chunk_pages(t, {0, 0}, cols).size() == 3);
    }
    SUBCASE("unknown column rejected") {
        const TableDef t = one_column_table(1000, 100, 100);
        const ColumnId cols[] = {5};
        CHECK_THROWS_AS(chunk_pages(t, {0, 0}, cols), std::out_of_range);
    }
}

TEST_CASE("chunk_of_sid floors by chunk size") {
    const TableDef t = one_column_table(1000, 100, 100);
    CHECK(chunk_of_sid(t, 0) == 0);
    CHECK(chunk_of_sid(t, 199) == 1);
    CHECK(chunk_of_sid(t, 200) == 2);
    CHECK_THROWS_AS(chunk_of_sid(t, 1000), std::out_of_range);

    // monotone non-decreasing
    std::uint64_t prev = 0;
    for (std::uint64_t sid = 0; sid < 1000; ++sid) {
        const auto c = chunk_of_sid(t, sid);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("partitions of a column cover its pages with boundary-only overlap") {
    const TableDef t = one_column_table(1000, 150, 100);
    const std::vector<std::uint64_t> cuts = {0, 130, 131, 400, 777, 1000};
    std::vector<std::uint64_t> seen;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const auto part = indexes(pages_for_range(t, 0, {cuts[i], cuts[i + 1]}));
        if (!seen.empty() && !part.empty() && seen.back() == part.front())
            seen.pop_back();  // adjacent ranges may share the boundary page
        seen.insert(seen.end(), part.begin(), part.end());
    }
    CHECK(seen == indexes(pages_for_range(t, 0, {0, 1000})));
}

TEST_CASE("only adjacent chunks share pages when pages fit in a chunk") {
    const TableDef t = one_column_table(2000, 64, 100);
    const ColumnId cols[] = {0};
    for (std::uint64_t c = 0; c + 2 < t.num_chunks(); ++c) {
        const auto a = chunk_pages(t, {0, c}, cols);
        const auto b = chunk_pages(t, {0, c + 2}, cols);
        std::vector<PageId> overlap;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::back_inserter(overlap));
        CHECK(overlap.empty());
    }
}

TEST_CASE("identity snapshot lists every page in order") {
    TableDef t = one_column_table(1000, 150, 100);
    t.columns.push_back(ColumnDef{1, 999, 65536});
    const Snapshot s = Snapshot::identity(t, 42);
    CHECK(s.table_version == t.table_version);
    CHECK(s.pages_per_column.size() == 2);
    CHECK(s.pages_per_column[0].size() == t.num_pages(0));
    CHECK(s.pages_per_column[1].size() == 2);
    CHECK(s.pages_per_column[0][3] == 3);
}

TEST_CASE("table validation rejects malformed definitions") {
    TableDef t = one_column_table(100, 10, 10);
    t.chunk_size = 0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = one_column_table(100, 10, 10);
    t.columns[0].tuples_per_page = 0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = one_column_table(100, 10, 10);
    t.columns.clear();
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("page_tuple_count handles the partial last page") {
    const TableDef t = one_column_table(1050, 100, 100);
    CHECK(t.num_pages(0) == 11);
    CHECK(t.page_tuple_count(0, 0) == 100);
    CHECK(t.page_tuple_count(0, 10) == 50);
}
