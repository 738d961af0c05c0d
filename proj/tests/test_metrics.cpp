#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "scanbench/metrics.hpp"

using namespace scanbench;

namespace {

std::vector<PageId> page_run(std::uint64_t first, std::uint64_t last, ColumnId col = 0) {
    std::vector<PageId> out;
    for (std::uint64_t p = first; p <= last; ++p) out.push_back(PageId{0, col, p});
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Metrics sample_metrics() {
    Metrics m;
    m.policy = "pbm";
    m.streams = 8;
    m.pool_frac = 0.4;
    m.bandwidth_bps = 72000000;
    m.seed = 7;
    m.io_pages_loaded = 1234;
    m.io_bytes = 1234ull * 65536;
    m.stream_times = {1'500'000'000, 2'000'000'000, 2'500'000'000};
    m.sharing = {{1000000, 5, 4, 3, 2}, {2000000, 6, 0, 0, 0}};
    return m;
}

}  // namespace

TEST_CASE("sharing histogram buckets pages by interested scan count") {
    SUBCASE("single scan mid-table: everything in bin 1") {
        const auto s = sharing_histogram(5, {page_run(10, 19)});
        CHECK(s.k1 == 10);
        CHECK(s.k2 + s.k3 + s.k4plus == 0);
        CHECK(s.total() == 10);
    }
    SUBCASE("two identical full scans: everything in bin 2") {
        const auto s = sharing_histogram(5, {page_run(0, 9), page_run(0, 9)});
        CHECK(s.k2 == 10);
        CHECK(s.k1 + s.k3 + s.k4plus == 0);
    }
    SUBCASE("four overlapping scans fill the 4-plus bin") {
        const std::vector<std::vector<PageId>> wanted = {
            page_run(0, 9), page_run(0, 9), page_run(5, 14), page_run(5, 14)};
        const auto s = sharing_histogram(5, wanted);
        // per-page oracle: 0..4 wanted by 2, 5..9 by 4, 10..14 by 2
        CHECK(s.k2 == 10);
        CHECK(s.k4plus == 5);
        CHECK(s.k1 == 0);
        CHECK(s.k3 == 0);
    }
}

TEST_CASE("csv round trip preserves every field") {
    const std::string path = "metrics_roundtrip.tmp.csv";
    const Metrics m = sample_metrics();
    write_csv(path, std::vector<Metrics>{m});

    const auto rows = read_csv(path);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].policy == "pbm");
    CHECK(rows[0].streams == 8);
    CHECK(rows[0].pool_frac == doctest::Approx(0.4));
    CHECK(rows[0].bandwidth_bps == 72000000);
    CHECK(rows[0].seed == 7);
    CHECK(rows[0].io_pages == 1234);
    CHECK(rows[0].io_bytes == 1234ull * 65536);
    CHECK(rows[0].avg_stream_ns == 2'000'000'000);
    CHECK(rows[0].max_stream_ns == 2'500'000'000);

    const std::string text = slurp(path);
    CHECK(text.rfind("policy,streams,pool_frac,bandwidth_bps,seed,io_pages,io_bytes,"
                     "avg_stream_s,max_stream_s\n",
                     0) == 0);
    CHECK(text.find("2.000000000") != std::string::npos);

    const std::string sharing = slurp(path + ".sharing.csv");
    CHECK(sharing.rfind("time_ns,k1,k2,k3,k4plus\n", 0) == 0);
    CHECK(sharing.find("1000000,5,4,3,2\n") != std::string::npos);

    std::remove(path.c_str());
    std::remove((path + ".sharing.csv").c_str());
}

TEST_CASE("csv output is byte-deterministic and header-only when empty") {
    const std::string a = "metrics_det_a.tmp.csv";
    const std::string b = "metrics_det_b.tmp.csv";
    write_csv(a, std::vector<Metrics>{sample_metrics(), sample_metrics()});
    write_csv(b, std::vector<Metrics>{sample_metrics(), sample_metrics()});
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a + ".sharing.csv") == slurp(b + ".sharing.csv"));

    write_csv(a, {});
    CHECK(slurp(a) ==
          "policy,streams,pool_frac,bandwidth_bps,seed,io_pages,io_bytes,"
          "avg_stream_s,max_stream_s\n");
    for (const std::string& p : {a, b, a + ".sharing.csv", b + ".sharing.csv"})
        std::remove(p.c_str());
}

TEST_CASE("summaries compare policies against the lru baseline") {
    MetricsRow lru{"lru", 8, 0.4, 1, 1, 1000, 0, 2'000'000'000, 0};
    MetricsRow pbm{"pbm", 8, 0.4, 1, 1, 600, 0, 1'000'000'000, 0};

    SUBCASE("single lru row is its own baseline") {
        const std::string text = summarize(std::vector<MetricsRow>{lru});
        CHECK(text.find("1.0000") != std::string::npos);
    }
    SUBCASE("ratios are policy over lru") {
        const std::string text = summarize(std::vector<MetricsRow>{lru, pbm});
        CHECK(text.find("0.6000") != std::string::npos);
        CHECK(text.find("0.5000") != std::string::npos);
    }
    SUBCASE("missing baseline is called out") {
        const std::string text = summarize(std::vector<MetricsRow>{pbm});
        CHECK(text.find("no lru baseline") != std::string::npos);
    }
}

TEST_CASE("seconds format uses full nanosecond precision") {
    CHECK(format_seconds(0) == "0.000000000");
    CHECK(format_seconds(1) == "0.000000001");
    CHECK(format_seconds(1'500'000'000) == "1.500000000");
    CHECK(format_seconds(23'000'000'001) == "23.000000001");
}

TEST_CASE("stream time aggregates") {
    const Metrics m = sample_metrics();
    CHECK(m.avg_stream_ns() == 2'000'000'000);
    CHECK(m.max_stream_ns() == 2'500'000'000);
    Metrics empty;
    CHECK(empty.avg_stream_ns() == 0);
    CHECK(empty.max_stream_ns() == 0);
}
