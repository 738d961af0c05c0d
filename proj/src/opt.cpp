#include "scanbench/opt.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <list>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace scanbench {

namespace {
constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
}

ReplayVolume opt_replay_volume(
    const Trace& trace, std::size_t capacity,
    const std::function<std::uint64_t(const PageId&)>& page_bytes) {
    if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
    // next[i]: position of the next reference to trace[i].page after i.
    std::vector<std::uint64_t> next(trace.size(), kNever);
    std::unordered_map<PageId, std::uint64_t, PageIdHash> upcoming;
    for (std::size_t i = trace.size(); i-- > 0;) {
        auto it = upcoming.find(trace[i].page);
        if (it != upcoming.end()) next[i] = it->second;
        upcoming[trace[i].page] = i;
    }

    ReplayVolume volume;
    // Resident set keyed by next reference; (kNever, page) orders the
    // never-again pages so the largest PageId is evicted first.
    std::set<std::pair<std::uint64_t, PageId>> by_next;
    std::unordered_map<PageId, std::uint64_t, PageIdHash> resident;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const PageId& page = trace[i].page;
        auto it = resident.find(page);
        if (it != resident.end()) {
            by_next.erase({it->second, page});
        } else {
            ++volume.misses;
            if (page_bytes) volume.bytes += page_bytes(page);
            if (resident.size() == capacity) {
                auto victim = std::prev(by_next.end());
                resident.erase(victim->second);
                by_next.erase(victim);
            }
        }
        resident[page] = next[i];
        by_next.insert({next[i], page});
    }
    return volume;
}

std::uint64_t opt_replay(const Trace& trace, std::size_t capacity) {
    return opt_replay_volume(trace, capacity, nullptr).misses;
}

std::uint64_t lru_replay(const Trace& trace, std::size_t capacity) {
    if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
    std::uint64_t misses = 0;
    std::list<PageId> recency;  // front = most recent
    std::unordered_map<PageId, std::list<PageId>::iterator, PageIdHash> index;
    for (const auto& ev : trace) {
        auto it = index.find(ev.page);
        if (it != index.end()) {
            recency.splice(recency.begin(), recency, it->second);
            continue;
        }
        ++misses;
        if (index.size() == capacity) {
            index.erase(recency.back());
            recency.pop_back();
        }
        recency.push_front(ev.page);
        index[ev.page] = recency.begin();
    }
    return misses;
}

namespace {

struct BruteForce {
    std::vector<std::uint32_t> refs;  // trace remapped to dense page numbers
    std::size_t capacity;
    std::map<std::pair<std::size_t, std::uint64_t>, std::uint32_t> memo;

    static std::uint64_t encode(const std::vector<std::uint32_t>& cache) {
        std::uint64_t key = 0;
        for (auto p : cache) key = (key << 6) | (p + 1);
        return key;
    }

    std::uint32_t solve(std::size_t pos, std::vector<std::uint32_t> cache) {
        if (pos == refs.size()) return 0;
        std::sort(cache.begin(), cache.end());
        const auto key = std::make_pair(pos, encode(cache));
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        const std::uint32_t page = refs[pos];
        std::uint32_t best;
        if (std::find(cache.begin(), cache.end(), page) != cache.end()) {
            best = solve(pos + 1, cache);
        } else if (cache.size() < capacity) {
            cache.push_back(page);
            best = 1 + solve(pos + 1, std::move(cache));
        } else {
            best = std::numeric_limits<std::uint32_t>::max();
            for (std::size_t v = 0; v < cache.size(); ++v) {
                auto branch = cache;
                branch[v] = page;
                best = std::min(best, 1 + solve(pos + 1, std::move(branch)));
            }
        }
        memo.emplace(key, best);
        return best;
    }
};

}  // namespace

std::uint64_t brute_force_min_misses(const Trace& trace, std::size_t capacity) {
    if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
    if (trace.size() > 20 || capacity > 4)
        throw std::invalid_argument("instance too large for exhaustive search");
    // dense renumbering keeps the cache encodable in a few bits per slot
    std::vector<PageId> pages;
    std::vector<std::uint32_t> refs;
    refs.reserve(trace.size());
    for (const auto& ev : trace) {
        auto it = std::find(pages.begin(), pages.end(), ev.page);
        if (it == pages.end()) {
            pages.push_back(ev.page);
            it = std::prev(pages.end());
        }
        refs.push_back(static_cast<std::uint32_t>(it - pages.begin()));
    }
    BruteForce bf{std::move(refs), capacity, {}};
    return bf.solve(0, {});
}

void write_trace(const std::string& path, const Trace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    for (const auto& ev : trace) {
        out << ev.time << ' ' << ev.page.table_version << ' ' << ev.page.column_id << ' '
            << ev.page.page_index << '\n';
    }
    if (!out) throw std::runtime_error("trace write failed: " + path);
}

Trace read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    Trace trace;
    TimeNs t;
    std::uint32_t version, column;
    std::uint64_t page_index;
    while (in >> t >> version >> column >> page_index)
        trace.push_back({t, PageId{version, column, page_index}});
    if (!in.eof()) throw std::runtime_error("malformed trace file: " + path);
    return trace;
}

}  // namespace scanbench
