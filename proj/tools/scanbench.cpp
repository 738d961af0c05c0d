// Experiment runner: one simulated run or a sweep over pool size, stream
// count, bandwidth and seed, reporting I/O volume and stream times as CSV.
// `--policy all` runs lru, pbm and cscans on identical seeds and then replays
// the PBM page-reference trace through OPT at the same frame capacity.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "scanbench/config.hpp"
#include "scanbench/metrics.hpp"
#include "scanbench/opt.hpp"
#include "scanbench/sim.hpp"

namespace {

using namespace scanbench;

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

SweepAxis parse_sweep(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos)
        throw CLI::ValidationError("--sweep expects key=v1,v2,...");
    SweepAxis axis;
    axis.key = arg.substr(0, eq);
    std::string rest = arg.substr(eq + 1);
    std::size_t pos = 0;
    while (pos != std::string::npos) {
        const auto comma = rest.find(',', pos);
        axis.values.push_back(rest.substr(pos, comma - pos));
        pos = comma == std::string::npos ? comma : comma + 1;
    }
    if (axis.values.empty()) throw CLI::ValidationError("--sweep has no values");
    return axis;
}

void apply_axis(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "pool-frac")
        apply_config_entry(cfg, "pool_frac", value);
    else if (key == "streams")
        apply_config_entry(cfg, "streams", value);
    else if (key == "bandwidth")
        apply_config_entry(cfg, "bandwidth_bps", value);
    else if (key == "seed")
        apply_config_entry(cfg, "seed", value);
    else
        throw CLI::ValidationError("unknown sweep key: " + key +
                                   " (pool-frac, streams, bandwidth, seed)");
}

Metrics opt_row_from_pbm(const RunResult& pbm_run, const RunConfig& cfg) {
    const auto bytes_of = [&](const PageId& p) -> std::uint64_t {
        for (const TableDef& t : cfg.workload.tables)
            if (t.table_version == p.table_version)
                return t.columns[p.column_id].page_size_bytes;
        return 0;
    };
    const ReplayVolume vol =
        opt_replay_volume(pbm_run.trace, pbm_run.capacity_frames, bytes_of);
    Metrics m;
    m.policy = "opt";
    m.streams = pbm_run.metrics.streams;
    m.pool_frac = pbm_run.metrics.pool_frac;
    m.bandwidth_bps = pbm_run.metrics.bandwidth_bps;
    m.seed = pbm_run.metrics.seed;
    m.io_pages_loaded = vol.misses;
    m.io_bytes = vol.bytes;
    return m;
}

int run_main(int argc, char** argv) {
    CLI::App app{"buffer-management policy simulator for concurrent scans"};
    app.get_formatter()->column_width(34);

    std::string config_path, policy = "lru", csv_path, trace_out, trace_in;
    std::uint64_t capacity = 0;
    std::vector<std::string> sweep_args;
    std::map<std::string, std::string> overrides;

    app.add_option("--config", config_path, "workload config file (key = value lines)");
    app.add_option("--policy", policy, "lru|pbm|cscans|opt-replay|all")
        ->default_str("lru");
    auto add_override = [&](const char* flag, const char* key, const char* help) {
        app.add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
    };
    add_override("--streams", "streams", "concurrent query streams");
    add_override("--pool-frac", "pool_frac", "buffer pool as a fraction of touched data");
    add_override("--bandwidth", "bandwidth_bps", "I/O bandwidth in bytes/s");
    add_override("--seed", "seed", "workload RNG seed");
    app.add_option("--csv", csv_path, "write per-run CSV rows here");
    app.add_option("--trace-out", trace_out, "write the page-reference trace here");
    app.add_option("--trace", trace_in, "trace file to replay (opt-replay mode)");
    app.add_option("--capacity", capacity, "frame capacity for opt-replay");
    app.add_option("--sweep", sweep_args,
                   "sweep axis key=v1,v2,... (repeatable; cross product)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (policy == "opt-replay") {
        if (trace_in.empty() || capacity == 0) {
            std::cerr << "opt-replay needs --trace and --capacity\n";
            return 2;
        }
        const Trace trace = read_trace(trace_in);
        std::cout << opt_replay(trace, capacity) << "\n";
        return 0;
    }

    RunConfig base;
    try {
        base = config_path.empty() ? default_run_config() : parse_config_file(config_path);
        for (const auto& [key, value] : overrides) apply_config_entry(base, key, value);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::vector<std::string> policies;
    if (policy == "all") {
        policies = {"lru", "pbm", "cscans"};
    } else if (parse_policy(policy)) {
        policies = {policy};
    } else {
        std::cerr << "unknown policy: " << policy << "\n";
        return 2;
    }

    std::vector<SweepAxis> axes;
    try {
        for (const std::string& arg : sweep_args) axes.push_back(parse_sweep(arg));
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    // cross product of sweep axes over the base config
    std::vector<RunConfig> points{base};
    for (const SweepAxis& axis : axes) {
        std::vector<RunConfig> expanded;
        for (const RunConfig& cfg : points) {
            for (const std::string& value : axis.values) {
                RunConfig next = cfg;
                try {
                    apply_axis(next, axis.key, value);
                } catch (const std::exception& e) {
                    std::cerr << e.what() << "\n";
                    return 2;
                }
                expanded.push_back(std::move(next));
            }
        }
        points = std::move(expanded);
    }

    if (!trace_out.empty() && points.size() > 1) {
        std::cerr << "--trace-out needs a single sweep point\n";
        return 2;
    }

    std::vector<Metrics> results;
    try {
        for (const RunConfig& point : points) {
            std::optional<RunResult> pbm_run;
            for (const std::string& name : policies) {
                RunConfig cfg = point;
                cfg.policy = *parse_policy(name);
                RunResult r = run(cfg);
                if (cfg.policy == PolicyKind::Pbm) pbm_run = r;
                if (!trace_out.empty() &&
                    (policies.size() == 1 || cfg.policy == PolicyKind::Pbm))
                    write_trace(trace_out, r.trace);
                results.push_back(std::move(r.metrics));
            }
            if (policy == "all" && pbm_run)
                results.push_back(opt_row_from_pbm(*pbm_run, point));
        }
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 1;
    }

    if (!csv_path.empty()) write_csv(csv_path, results);
    std::vector<MetricsRow> rows;
    rows.reserve(results.size());
    for (const Metrics& m : results) rows.push_back(to_row(m));
    std::cout << summarize(rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    return run_main(argc, argv);
}
