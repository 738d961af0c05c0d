#include "scanbench/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scanbench {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        return std::stoull(value);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for " + key + ": " + value);
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for " + key + ": " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("bad value for " + key + ": " + value);
}

}  // namespace

RunConfig default_run_config() {
    RunConfig cfg;
    TableDef table;
    table.table_id = 0;
    table.table_version = 0;
    table.tuple_count = 1'048'576;  // 256 chunks of 4096 tuples
    table.chunk_size = 4096;
    table.columns = {ColumnDef{0, 512, 65536}, ColumnDef{1, 2048, 65536}};
    cfg.workload.tables = {table};
    return cfg;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    TableDef& table = cfg.workload.tables.at(0);
    if (key == "tuples") {
        table.tuple_count = parse_u64(key, value);
    } else if (key == "chunk_size") {
        table.chunk_size = parse_u64(key, value);
    } else if (key == "page_size_bytes") {
        const auto bytes = parse_u64(key, value);
        for (ColumnDef& c : table.columns) c.page_size_bytes = bytes;
    } else if (key == "columns") {
        // comma list of tuples_per_page, one entry per column
        std::vector<ColumnDef> cols;
        for (const std::string& item : split(value, ',')) {
            if (item.empty()) continue;
            const auto page_bytes =
                table.columns.empty() ? 65536 : table.columns[0].page_size_bytes;
            cols.push_back(
                ColumnDef{ColumnId(cols.size()), parse_u64(key, item), page_bytes});
        }
        if (cols.empty()) throw std::invalid_argument("columns list is empty");
        table.columns = std::move(cols);
    } else if (key == "streams") {
        cfg.workload.streams = int(parse_u64(key, value));
    } else if (key == "queries_per_stream") {
        cfg.workload.queries_per_stream = int(parse_u64(key, value));
    } else if (key == "fractions") {
        std::vector<double> fr;
        for (const std::string& item : split(value, ','))
            if (!item.empty()) fr.push_back(parse_double(key, item) / 100.0);
        if (fr.empty()) throw std::invalid_argument("fractions list is empty");
        cfg.workload.fractions = std::move(fr);
    } else if (key == "seed") {
        cfg.workload.seed = parse_u64(key, value);
    } else if (key == "cpu_rate") {
        cfg.workload.cpu_rate = parse_double(key, value);
    } else if (key == "parallelism") {
        cfg.workload.parallelism = int(parse_u64(key, value));
    } else if (key == "policy") {
        const auto kind = parse_policy(value);
        if (!kind) throw std::invalid_argument("unknown policy: " + value);
        cfg.policy = *kind;
    } else if (key == "pool_frac") {
        cfg.pool_frac = parse_double(key, value);
    } else if (key == "capacity_frames") {
        cfg.capacity_frames = parse_u64(key, value);
    } else if (key == "bandwidth_bps") {
        cfg.io.bandwidth_bps = parse_u64(key, value);
    } else if (key == "group_size") {
        cfg.group_size = parse_u64(key, value);
    } else if (key == "time_slice_ms") {
        cfg.pbm.time_slice = TimeNs(parse_u64(key, value)) * 1'000'000;
    } else if (key == "pbm_groups") {
        cfg.pbm.n_groups = int(parse_u64(key, value));
    } else if (key == "pbm_buckets_per_group") {
        cfg.pbm.buckets_per_group = int(parse_u64(key, value));
    } else if (key == "pbm_alpha") {
        cfg.pbm.ema_alpha = parse_double(key, value);
    } else if (key == "shared_bonus") {
        cfg.abm.shared_bonus = parse_double(key, value);
    } else if (key == "prefetch_depth") {
        cfg.prefetch_depth = int(parse_u64(key, value));
    } else if (key == "sharing_sample_ms") {
        cfg.sharing_sample_period = TimeNs(parse_u64(key, value)) * 1'000'000;
    } else if (key == "validate") {
        cfg.validate = parse_bool(key, value);
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": expected key = value");
        apply_config_entry(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), default_run_config());
}

}  // namespace scanbench
