#pragma once

// Run measurements: total I/O volume, per-stream completion times and the
// sharing-potential time series, plus the CSV formats they are reported in.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scanbench/types.hpp"

namespace scanbench {

struct SharingSample {
    TimeNs time = 0;
    std::uint64_t k1 = 0;      // pages wanted by exactly one active scan
    std::uint64_t k2 = 0;
    std::uint64_t k3 = 0;
    std::uint64_t k4plus = 0;  // "4 or more scans"

    std::uint64_t total() const { return k1 + k2 + k3 + k4plus; }
    friend bool operator==(const SharingSample&, const SharingSample&) = default;
};

// Histogram of pages still ahead of at least one active scan, bucketed by how
// many scans will still consume them.
SharingSample sharing_histogram(TimeNs now,
                                const std::vector<std::vector<PageId>>& wanted_per_scan);

struct Metrics {
    std::string policy;
    int streams = 0;
    double pool_frac = 0.0;
    std::uint64_t bandwidth_bps = 0;
    std::uint64_t seed = 0;
    std::uint64_t io_pages_loaded = 0;
    std::uint64_t io_bytes = 0;
    std::vector<TimeNs> stream_times;
    std::vector<SharingSample> sharing;

    TimeNs avg_stream_ns() const;
    TimeNs max_stream_ns() const;
};

struct MetricsRow {
    std::string policy;
    int streams = 0;
    double pool_frac = 0.0;
    std::uint64_t bandwidth_bps = 0;
    std::uint64_t seed = 0;
    std::uint64_t io_pages = 0;
    std::uint64_t io_bytes = 0;
    TimeNs avg_stream_ns = 0;
    TimeNs max_stream_ns = 0;
};

MetricsRow to_row(const Metrics& m);

// Main file: `policy,streams,pool_frac,bandwidth_bps,seed,io_pages,io_bytes,
// avg_stream_s,max_stream_s`, one row per run. Sharing series go to the
// sibling `<path>.sharing.csv` as `time_ns,k1,k2,k3,k4plus`.
void write_csv(const std::string& path, std::span<const Metrics> runs);
std::vector<MetricsRow> read_csv(const std::string& path);

// Per-policy comparison with ratios against the LRU baseline.
std::string summarize(std::span<const MetricsRow> rows);

// Nanoseconds rendered as seconds with full precision, e.g. "1.250000000".
std::string format_seconds(TimeNs t);

}  // namespace scanbench
