#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pcap/op_record.hpp"
#include "pcap/time.hpp"

namespace pcap {

struct MetricReport {
    double p_ic = 0.0;
    double p_ua = 0.0;
    std::size_t n_reads = 0;
    Duration t_c = 0;
    Duration t_a = 0;
};

// Per-key index of write start times, sorted by (start, op_id). The virtual
// DEFAULT write at time 0 is implicit. Writes may be appended in start-time
// order (the simulator issues them that way); build() sorts otherwise.
class WriteIndex {
public:
    struct Entry {
        TimePoint start;
        std::int64_t op_id;
        bool operator<(const Entry& o) const {
            return start != o.start ? start < o.start : op_id < o.op_id;
        }
    };

    void add_write(std::int32_t key, std::int64_t op_id, TimePoint start) {
        auto& v = per_key_[key];
        Entry e{start, op_id};
        if (!v.empty() && e < v.back()) sorted_ = false;
        v.push_back(e);
        start_by_id_[op_id] = start;
    }

    void build(std::span<const OpRecord> log) {
        for (const OpRecord& op : log) {
            if (op.kind == OpKind::Write) add_write(op.key, op.op_id, op.start);
        }
        ensure_sorted();
    }

    void ensure_sorted() {
        if (sorted_) return;
        for (auto& [key, v] : per_key_) std::sort(v.begin(), v.end());
        sorted_ = true;
    }

    std::span<const Entry> writes_for(std::int32_t key) const {
        auto it = per_key_.find(key);
        if (it == per_key_.end()) return {};
        return it->second;
    }

    // Start time of the write a read returned; DEFAULT is the virtual write
    // at time 0.
    TimePoint start_of(std::int64_t write_id) const {
        if (write_id == kDefaultWriteId) return 0;
        return start_by_id_.at(write_id);
    }

    bool has_write(std::int64_t write_id) const {
        return write_id == kDefaultWriteId || start_by_id_.contains(write_id);
    }

private:
    std::unordered_map<std::int32_t, std::vector<Entry>> per_key_;
    std::unordered_map<std::int64_t, TimePoint> start_by_id_;
    bool sorted_ = true;
};

// The freshness cutoff of a read. Interval membership is closed on both
// ends and clamps at 0; the virtual DEFAULT write never counts as "a write
// starting in the interval" because it is not a real operation.
inline TimePoint tau_fresh(const OpRecord& read, Duration t,
                           std::span<const WriteIndex::Entry> writes) {
    const TimePoint lo = read.start - t < 0 ? 0 : read.start - t;
    // First real write with start >= lo.
    auto it = std::lower_bound(writes.begin(), writes.end(),
                               WriteIndex::Entry{lo, std::numeric_limits<std::int64_t>::min()});
    if (it != writes.end() && it->start <= read.start) {
        return lo; // case 1: some write starts inside [lo, start]
    }
    if (it == writes.begin()) {
        return 0; // case 2a: no write starts before the read
    }
    return std::prev(it)->start; // case 2b: last write starting strictly before lo
}

inline bool is_t_fresh(const OpRecord& read, Duration t, const WriteIndex& index) {
    TimePoint tau = tau_fresh(read, t, index.writes_for(read.key));
    return index.start_of(read.write_id) >= tau;
}

// p_ua: fraction of reads with finish - start > t_a (completing within t_a,
// inclusive, is timely). p_ic: fraction of reads that are not t_c-fresh.
// Writes are sorted once per key, each read costs one binary search.
inline std::optional<MetricReport> compute_metrics(std::span<const OpRecord> reads,
                                                   const WriteIndex& index,
                                                   Duration t_c, Duration t_a) {
    MetricReport r;
    r.t_c = t_c;
    r.t_a = t_a;
    std::size_t stale = 0;
    std::size_t late = 0;
    for (const OpRecord& op : reads) {
        if (op.kind != OpKind::Read) continue;
        ++r.n_reads;
        if (op.finish - op.start > t_a) ++late;
        if (!is_t_fresh(op, t_c, index)) ++stale;
    }
    if (r.n_reads == 0) return std::nullopt; // NoReads: caller skips the window
    r.p_ic = static_cast<double>(stale) / static_cast<double>(r.n_reads);
    r.p_ua = static_cast<double>(late) / static_cast<double>(r.n_reads);
    return r;
}

inline std::optional<MetricReport> compute_metrics(std::span<const OpRecord> log,
                                                   Duration t_c, Duration t_a) {
    WriteIndex index;
    index.build(log);
    return compute_metrics(log, index, t_c, t_a);
}

// Staleness under the end-time-based metric used for the comparison runs.
// A read returning W is fresh when W is at least as new (by start time) as
// the most recent write that finished t or more before the read started, or
// when W was in flight during the read. In-flight writes are always fresh.
inline std::optional<double> compute_t_visibility(std::span<const OpRecord> log, Duration t) {
    struct FinEntry {
        TimePoint finish;
        TimePoint start;
        std::int64_t op_id;
    };
    std::unordered_map<std::int32_t, std::vector<FinEntry>> prefix_max;
    std::unordered_map<std::int64_t, const OpRecord*> write_by_id;
    for (const OpRecord& op : log) {
        if (op.kind == OpKind::Write) {
            prefix_max[op.key].push_back({op.finish, op.start, op.op_id});
            write_by_id[op.op_id] = &op;
        }
    }
    // Sort by finish and keep a running max of start: cutoff lookups become a
    // binary search plus a prefix maximum.
    for (auto& [key, v] : prefix_max) {
        std::sort(v.begin(), v.end(), [](const FinEntry& a, const FinEntry& b) {
            return a.finish != b.finish ? a.finish < b.finish
                 : (a.start != b.start ? a.start < b.start : a.op_id < b.op_id);
        });
        TimePoint run = 0; // the DEFAULT write's start
        for (FinEntry& e : v) {
            run = std::max(run, e.start);
            e.start = run;
        }
    }

    std::size_t n_reads = 0;
    std::size_t stale = 0;
    for (const OpRecord& op : log) {
        if (op.kind != OpKind::Read) continue;
        ++n_reads;
        const TimePoint cutoff = op.start - t;
        if (cutoff < 0) continue; // nothing finished that early, all values fresh

        TimePoint ret_start = 0;
        TimePoint ret_finish = 0;
        if (op.write_id != kDefaultWriteId) {
            const OpRecord& w = *write_by_id.at(op.write_id);
            ret_start = w.start;
            ret_finish = w.finish;
        }
        // In-flight (overlapping) writes are always fresh.
        if (ret_start <= op.finish && ret_finish >= op.start) continue;

        TimePoint newest_settled = 0; // DEFAULT finished at 0 <= cutoff
        auto it = prefix_max.find(op.key);
        if (it != prefix_max.end()) {
            const auto& v = it->second;
            auto pos = std::upper_bound(v.begin(), v.end(), cutoff,
                                        [](TimePoint c, const FinEntry& e) { return c < e.finish; });
            if (pos != v.begin()) newest_settled = std::prev(pos)->start;
        }
        if (ret_start < newest_settled) ++stale;
    }
    if (n_reads == 0) return std::nullopt;
    return static_cast<double>(stale) / static_cast<double>(n_reads);
}

} // namespace pcap
