#include "scanbench/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace scanbench {

SharingSample sharing_histogram(TimeNs now,
                                const std::vector<std::vector<PageId>>& wanted_per_scan) {
    std::map<PageId, std::uint32_t> counts;
    for (const auto& pages : wanted_per_scan)
        for (const PageId& p : pages) ++counts[p];
    SharingSample s;
    s.time = now;
    for (const auto& [page, n] : counts) {
        if (n == 1)
            ++s.k1;
        else if (n == 2)
            ++s.k2;
        else if (n == 3)
            ++s.k3;
        else
            ++s.k4plus;
    }
    return s;
}

TimeNs Metrics::avg_stream_ns() const {
    if (stream_times.empty()) return 0;
    __int128 sum = 0;
    for (TimeNs t : stream_times) sum += t;
    return static_cast<TimeNs>(sum / static_cast<__int128>(stream_times.size()));
}

TimeNs Metrics::max_stream_ns() const {
    if (stream_times.empty()) return 0;
    return *std::max_element(stream_times.begin(), stream_times.end());
}

MetricsRow to_row(const Metrics& m) {
    return {m.policy,  m.streams,  m.pool_frac,       m.bandwidth_bps, m.seed,
            m.io_pages_loaded, m.io_bytes, m.avg_stream_ns(), m.max_stream_ns()};
}

std::string format_seconds(TimeNs t) {
    const bool neg = t < 0;
    const std::uint64_t abs = neg ? std::uint64_t(-t) : std::uint64_t(t);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%llu.%09llu", neg ? "-" : "",
                  static_cast<unsigned long long>(abs / kNsPerSecond),
                  static_cast<unsigned long long>(abs % kNsPerSecond));
    return buf;
}

namespace {

std::string format_frac(double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", f);
    return buf;
}

TimeNs parse_seconds(const std::string& s) {
    const auto dot = s.find('.');
    if (dot == std::string::npos || s.size() - dot - 1 != 9)
        throw std::runtime_error("malformed seconds field: " + s);
    const std::int64_t whole = std::stoll(s.substr(0, dot));
    const std::int64_t frac = std::stoll(s.substr(dot + 1));
    return whole * kNsPerSecond + (whole < 0 ? -frac : frac);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

void write_csv(const std::string& path, std::span<const Metrics> runs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open csv for writing: " + path);
    out << "policy,streams,pool_frac,bandwidth_bps,seed,io_pages,io_bytes,"
           "avg_stream_s,max_stream_s\n";
    for (const Metrics& m : runs) {
        const MetricsRow r = to_row(m);
        out << r.policy << ',' << r.streams << ',' << format_frac(r.pool_frac) << ','
            << r.bandwidth_bps << ',' << r.seed << ',' << r.io_pages << ',' << r.io_bytes
            << ',' << format_seconds(r.avg_stream_ns) << ','
            << format_seconds(r.max_stream_ns) << '\n';
    }
    if (!out) throw std::runtime_error("csv write failed: " + path);

    std::ofstream sharing(path + ".sharing.csv", std::ios::binary);
    if (!sharing) throw std::runtime_error("cannot open sharing csv: " + path);
    sharing << "time_ns,k1,k2,k3,k4plus\n";
    for (const Metrics& m : runs)
        for (const SharingSample& s : m.sharing)
            sharing << s.time << ',' << s.k1 << ',' << s.k2 << ',' << s.k3 << ','
                    << s.k4plus << '\n';
    if (!sharing) throw std::runtime_error("sharing csv write failed: " + path);
}

std::vector<MetricsRow> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 9) throw std::runtime_error("malformed csv row: " + line);
        MetricsRow r;
        r.policy = f[0];
        r.streams = std::stoi(f[1]);
        r.pool_frac = std::stod(f[2]);
        r.bandwidth_bps = std::stoull(f[3]);
        r.seed = std::stoull(f[4]);
        r.io_pages = std::stoull(f[5]);
        r.io_bytes = std::stoull(f[6]);
        r.avg_stream_ns = parse_seconds(f[7]);
        r.max_stream_ns = parse_seconds(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string summarize(std::span<const MetricsRow> rows) {
    struct Agg {
        double io = 0, time = 0;
        int n = 0;
    };
    std::map<std::string, Agg> by_policy;
    for (const MetricsRow& r : rows) {
        Agg& a = by_policy[r.policy];
        a.io += double(r.io_pages);
        a.time += double(r.avg_stream_ns) / double(kNsPerSecond);
        ++a.n;
    }
    const bool have_lru = by_policy.count("lru") > 0;
    double lru_io = 0, lru_time = 0;
    if (have_lru) {
        lru_io = by_policy["lru"].io / by_policy["lru"].n;
        lru_time = by_policy["lru"].time / by_policy["lru"].n;
    }
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-10s %12s %14s %10s %10s\n", "policy", "io_pages",
                  "avg_stream_s", "io/lru", "time/lru");
    out << buf;
    for (const auto& [policy, a] : by_policy) {
        const double io = a.io / a.n;
        const double time = a.time / a.n;
        if (have_lru && lru_io > 0 && lru_time > 0) {
            std::snprintf(buf, sizeof(buf), "%-10s %12.1f %14.6f %10.4f %10.4f\n",
                          policy.c_str(), io, time, io / lru_io, time / lru_time);
        } else {
            std::snprintf(buf, sizeof(buf), "%-10s %12.1f %14.6f %10s %10s\n",
                          policy.c_str(), io, time, "-", "-");
        }
        out << buf;
    }
    if (!have_lru) out << "(no lru baseline in this set; ratios omitted)\n";
    return out.str();
}

}  // namespace scanbench
