#pragma once

// Deterministic discrete-event engine: simulated clock, bandwidth-limited
// FIFO I/O channel, scan operators consuming tuples at a CPU rate, query
// streams, and the microbenchmark generator. A whole run is a pure function
// of its configuration; repeated runs produce identical results.

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "scanbench/metrics.hpp"
#include "scanbench/opt.hpp"
#include "scanbench/policy_cscans.hpp"
#include "scanbench/policy_pbm.hpp"
#include "scanbench/storage.hpp"

namespace scanbench {

enum class PolicyKind { Lru, Pbm, CScans };

const char* policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(const std::string& name);

struct WorkloadSpec {
    std::vector<TableDef> tables;
    int streams = 8;
    int queries_per_stream = 16;
    std::vector<double> fractions = {0.5};  // drawn from {1%, 10%, 50%, 100%}
    std::uint64_t seed = 1;
    double cpu_rate = 1'000'000.0;  // tuples/s per scan thread
    int parallelism = 1;            // threads per query, static range split

    void validate() const;
};

struct QuerySpec {
    std::size_t table_index = 0;
    std::vector<ColumnId> columns;
    TupleRange rid_range;
    bool in_order = false;
    int stream = 0;
};

// Equal split of [a,b) into n pieces with floor boundaries; concatenating the
// pieces reproduces the range and lengths differ by at most one.
std::vector<TupleRange> split_range(TupleRange range, int n);

// Seeded query lists, one per stream; column sets alternate between a wide
// and a narrow subset of the fact table.
std::vector<std::vector<QuerySpec>> gen_microbenchmark(const WorkloadSpec& spec);

// Distinct pages referenced by the workload (pool sizing baseline).
std::uint64_t workload_footprint_pages(const WorkloadSpec& spec);
std::uint64_t footprint_pages(const std::vector<TableDef>& tables,
                              const std::vector<std::vector<QuerySpec>>& streams);

struct IoModel {
    std::uint64_t bandwidth_bps = 72'000'000;
};

struct RunConfig {
    WorkloadSpec workload;
    PolicyKind policy = PolicyKind::Lru;
    double pool_frac = 0.4;  // of touched data
    std::optional<std::size_t> capacity_frames;  // overrides pool_frac when set
    IoModel io;
    std::size_t group_size = 16;
    PbmConfig pbm;
    AbmConfig abm;
    int prefetch_depth = 1;  // pages held ahead per column; 1 = no lookahead
    TimeNs sharing_sample_period = 1'000'000'000;
    bool capture_trace = true;
    bool validate = false;  // structural sweeps during the run
};

struct RunResult {
    Metrics metrics;
    Trace trace;
    std::size_t capacity_frames = 0;
    std::uint64_t footprint_pages = 0;
    std::optional<BucketOpCounters> pbm_counters;
};

// Event loop to completion of all streams; throws SimError on deadlock or
// invariant violation.
RunResult run(const RunConfig& config);

// Same engine over explicit per-stream query lists instead of the generator.
RunResult run_queries(const RunConfig& config,
                      const std::vector<std::vector<QuerySpec>>& streams);

}  // namespace scanbench
