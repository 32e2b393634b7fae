#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pcap/delay_model.hpp"
#include "pcap/knobs.hpp"
#include "pcap/metrics.hpp"
#include "pcap/op_record.hpp"
#include "pcap/rng.hpp"
#include "pcap/time.hpp"

namespace pcap {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ClusterConfig {
    int n_servers = 9;
    int replication_factor = 3;
    ConsistencyLevel consistency_level = ConsistencyLevel::One;
    double throughput_ops_per_s = 1000.0;
    double read_fraction = 0.80;
    int n_keys = 1000;
    int value_size_bytes = 2048; // recorded config only; latency-inert here
    DelayModel delay_model = DelayModel::constant(ms(10));
    std::uint64_t rng_seed = 1;

    // Extra per-message delay standing in for stack and queueing time that a
    // bare propagation model cannot express. Zero disables it.
    double jitter_mean_ms = 0.0;
    double jitter_sd_ms = 0.0;

    bool zipfian_keys = false;
    double zipf_exponent = 0.99;

    Duration repair_drain_interval = ms(10);
    std::size_t repair_buffer_cap = 1024;
    Duration max_read_delay = kDefaultMaxReadDelay;

    struct FailureToggle {
        TimePoint at;
        int server;
        bool failed;
    };
    std::vector<FailureToggle> failures;

    void check() const {
        if (n_servers < 1) throw ConfigError("n_servers must be positive");
        if (replication_factor < 1 || replication_factor > n_servers) {
            throw ConfigError("replication_factor must be in [1, n_servers]");
        }
        if (read_fraction < 0.0 || read_fraction > 1.0) {
            throw ConfigError("read_fraction outside [0,1]");
        }
        if (throughput_ops_per_s <= 0.0) throw ConfigError("throughput must be positive");
        if (n_keys < 1) throw ConfigError("n_keys must be positive");
        if (max_read_delay < 0) throw ConfigError("max_read_delay negative");
    }
};

struct WorkloadOp {
    TimePoint at;
    OpKind kind;
    std::int32_t key;
    std::int32_t client;
};

namespace detail {

inline std::vector<double> zipf_cdf(int n_keys, double exponent) {
    std::vector<double> cdf(static_cast<std::size_t>(n_keys));
    double acc = 0.0;
    for (int k = 0; k < n_keys; ++k) {
        acc += 1.0 / std::pow(static_cast<double>(k + 1), exponent);
        cdf[static_cast<std::size_t>(k)] = acc;
    }
    for (double& c : cdf) c /= acc;
    return cdf;
}

// Draws for workload op number `i`. Slot 0: arrival gap, 1: kind, 2: key,
// 3: client. `stream` separates background workload from injected ops.
struct WorkloadDraw {
    double gap_us;
    OpKind kind;
    std::int32_t key;
    std::int32_t client;
};

inline WorkloadDraw workload_draw(const ClusterConfig& config, std::uint64_t stream,
                                  std::uint64_t i, const std::vector<double>* zipf) {
    WorkloadDraw d;
    double u = hash_uniform(config.rng_seed, stream, i, 0);
    if (u < 1e-300) u = 1e-300;
    d.gap_us = -(1e6 / config.throughput_ops_per_s) * std::log(u);
    d.kind = hash_uniform(config.rng_seed, stream, i, 1) < config.read_fraction ? OpKind::Read
                                                                                : OpKind::Write;
    double ku = hash_uniform(config.rng_seed, stream, i, 2);
    if (zipf != nullptr) {
        auto it = std::lower_bound(zipf->begin(), zipf->end(), ku);
        d.key = static_cast<std::int32_t>(it - zipf->begin());
    } else {
        d.key = static_cast<std::int32_t>(ku * config.n_keys);
        if (d.key >= config.n_keys) d.key = config.n_keys - 1;
    }
    d.client = static_cast<std::int32_t>(hash_uniform(config.rng_seed, stream, i, 3) *
                                         config.n_servers);
    if (d.client >= config.n_servers) d.client = config.n_servers - 1;
    return d;
}

} // namespace detail

// Poisson arrivals, Bernoulli kind, uniform or zipfian keys. Every draw is
// addressed by the op's sequence number, so the schedule is a pure function
// of (config, duration).
inline std::vector<WorkloadOp> generate_workload(const ClusterConfig& config, Duration duration) {
    config.check();
    std::vector<WorkloadOp> ops;
    std::vector<double> zipf;
    if (config.zipfian_keys) zipf = detail::zipf_cdf(config.n_keys, config.zipf_exponent);
    double t = 0.0;
    for (std::uint64_t i = 0;; ++i) {
        auto d = detail::workload_draw(config, streams::kWorkload, i,
                                       config.zipfian_keys ? &zipf : nullptr);
        t += d.gap_us;
        if (t >= static_cast<double>(duration)) break;
        ops.push_back(WorkloadOp{static_cast<TimePoint>(t), d.kind, d.key, d.client});
    }
    return ops;
}

struct TraceRow {
    TimePoint time;
    const char* event_type;
    int server;
    std::int64_t op_id;
};

// Deterministic discrete-event simulation of one data-center.
//
// Topology: star LAN, one client co-located with each server. The client's
// local server acts as coordinator (proxy): it resolves the key's replicas
// (key-hashed primary plus the next RF-1 ring successors), forwards the
// query, and relays responses. A message between machines a and b costs
// leg(a) + leg(b) plus optional jitter; the client-to-local-coordinator hop
// is in-machine and free.
//
// Read path: (1) the client hands the read to its coordinator, (2) after the
// read-delay knob elapses the coordinator queries all RF replicas, (3)
// replicas answer with their current value as of query arrival, (4) the
// coordinator returns the highest-timestamped value among the first CL
// responses, (5) with probability repair_rate a divergent read is queued and
// a background drain pushes the freshest value to the stale replicas.
//
// Event order is a total order on (time, sequence). All randomness is
// counter-based, so a knob change never shifts another message's delay:
// matched-seed runs stay comparable pointwise.
class SimStore {
public:
    explicit SimStore(ClusterConfig config) : config_(std::move(config)) {
        config_.check();
        knobs_.consistency_level = config_.consistency_level;
        knobs_.check(config_.max_read_delay);
        failed_.assign(static_cast<std::size_t>(config_.n_servers), false);
        replicas_.assign(static_cast<std::size_t>(config_.n_servers), {});
        if (config_.zipfian_keys) {
            zipf_cdf_ = detail::zipf_cdf(config_.n_keys, config_.zipf_exponent);
        }
        for (const auto& f : config_.failures) {
            push_event(f.at, EventKind::FailToggle, -1, f.server, f.failed ? 1 : 0);
        }
    }

    // --- workload ------------------------------------------------------------

    // Schedules the background workload over [0, duration) and keeps the
    // repair drain running until shortly after it.
    void schedule_workload(Duration duration) {
        workload_end_ = duration;
        set_horizon(duration + seconds(60));
        schedule_next_workload_arrival();
    }

    // Keeps background services (repair drain) alive until `t`.
    void set_horizon(TimePoint t) {
        if (t > repair_tick_end_) {
            bool was_idle = repair_tick_end_ == 0;
            repair_tick_end_ = t;
            if (was_idle) {
                push_event(now_ + config_.repair_drain_interval, EventKind::RepairTick, -1, -1, 0);
            }
        }
    }

    // Injects `count` measurement ops starting at the current simulated time,
    // interleaved at the workload rate. Returns their op ids.
    std::vector<std::int64_t> inject_ops(std::size_t count) {
        std::vector<std::int64_t> ids;
        ids.reserve(count);
        double t = static_cast<double>(now_);
        for (std::size_t k = 0; k < count; ++k) {
            auto d = detail::workload_draw(config_, streams::kInjected, injected_seq_++,
                                           config_.zipfian_keys ? &zipf_cdf_ : nullptr);
            t += d.gap_us;
            ids.push_back(schedule_op(static_cast<TimePoint>(t), d.kind, d.key, d.client));
        }
        return ids;
    }

    std::int64_t schedule_op(TimePoint at, OpKind kind, std::int32_t key, std::int32_t client) {
        const std::int64_t id = next_op_id_++;
        PendingOp op;
        op.rec.op_id = id;
        op.rec.kind = kind;
        op.rec.key = key;
        op.rec.write_id = kind == OpKind::Write ? id : kDefaultWriteId;
        op.rec.start = at;
        op.rec.origin_server = client;
        pending_.emplace(id, std::move(op));
        push_event(at, EventKind::OpArrive, id, client, 0);
        return id;
    }

    // --- knobs / failures ----------------------------------------------------

    // Effective for ops arriving after the call; in-flight ops are untouched.
    void set_knobs(const KnobState& knobs) {
        knobs.check(config_.max_read_delay);
        knobs_ = knobs;
    }
    const KnobState& knobs() const { return knobs_; }

    void set_server_failed(int server, bool failed) {
        failed_.at(static_cast<std::size_t>(server)) = failed;
    }

    // --- running -------------------------------------------------------------

    TimePoint now() const { return now_; }

    bool step() {
        if (events_.empty()) return false;
        Event ev = events_.top();
        events_.pop();
        now_ = ev.time;
        dispatch(ev);
        return true;
    }

    void run_until_idle() {
        while (step()) {}
    }

    void run_until(TimePoint t) {
        while (!events_.empty() && events_.top().time <= t) step();
        if (now_ < t) now_ = t;
    }

    // Runs until every listed op completed. Returns false when the horizon
    // passes or the event queue drains first (blocked ops never complete).
    bool run_until_completed(std::span<const std::int64_t> ids, TimePoint horizon) {
        std::unordered_set<std::int64_t> remaining;
        for (std::int64_t id : ids) {
            if (!completed_pos_.contains(id)) remaining.insert(id);
        }
        std::uint64_t seen = completions_;
        while (!remaining.empty()) {
            if (events_.empty() || events_.top().time > horizon) return false;
            step();
            if (completions_ != seen) {
                seen = completions_;
                if (last_completed_ != -1) remaining.erase(last_completed_);
            }
        }
        return true;
    }

    // --- results -------------------------------------------------------------

    const OpLog& log() const { return log_; }
    const WriteIndex& write_index() const { return write_index_; }

    const OpRecord* completed(std::int64_t op_id) const {
        auto it = completed_pos_.find(op_id);
        if (it == completed_pos_.end()) return nullptr;
        return &log_[it->second];
    }

    void enable_trace(bool on) { trace_enabled_ = on; }
    const std::vector<TraceRow>& trace() const { return trace_; }

    const ClusterConfig& config() const { return config_; }

private:
    enum class EventKind : std::uint8_t {
        OpArrive,
        ReadForward,
        WriteAtReplica,
        WriteAck,
        ReadAtReplica,
        ReadResponse,
        RepairTick,
        RepairAtReplica,
        FailToggle,
    };

    struct Event {
        TimePoint time;
        std::uint64_t seq;
        EventKind kind;
        std::int64_t op_id;
        int server;
        std::int64_t aux;

        bool operator>(const Event& o) const {
            return time != o.time ? time > o.time : seq > o.seq;
        }
    };

    struct Value {
        TimePoint ts = 0; // write start time; last-writer-wins
        std::int64_t write_id = kDefaultWriteId;

        bool newer_than(const Value& o) const {
            return ts != o.ts ? ts > o.ts : write_id > o.write_id;
        }
    };

    struct PendingOp {
        OpRecord rec;
        int cl_required = 1;       // captured when the op arrives
        double repair_rate = 0.0;  // captured when the op arrives
        int responses_counted = 0; // toward CL
        int responses_total = 0;
        bool completed = false;
        Value best;     // among first CL responses
        Value best_all; // among every response (repair)
        std::vector<std::pair<int, Value>> responded;
    };

    struct RepairEntry {
        std::int32_t key = 0;
        Value freshest;
        std::vector<int> stale_servers;
        int origin_server = 0;
        int pending_msgs = 0;
    };

    void push_event(TimePoint t, EventKind kind, std::int64_t op_id, int server, std::int64_t aux) {
        events_.push(Event{t, event_seq_++, kind, op_id, server, aux});
    }

    int primary_for(std::int32_t key) const {
        return static_cast<int>(splitmix64(0x517cc1b727220a95ULL ^ static_cast<std::uint64_t>(
                                                                       static_cast<std::uint32_t>(key))) %
                                static_cast<std::uint64_t>(config_.n_servers));
    }

    Duration jitter(std::uint64_t key, std::uint64_t slot) const {
        if (config_.jitter_mean_ms <= 0.0) return 0;
        auto p = LognormalMoments::from_mean_sd(config_.jitter_mean_ms, config_.jitter_sd_ms);
        double z = hash_normal(config_.rng_seed ^ 0x6a09e667f3bcc909ULL, streams::kDelay, key, slot);
        Duration d = from_ms(p.from_normal(z));
        return d < 0 ? 0 : d;
    }

    // One machine-to-machine message; slots keep every hop's draw distinct.
    Duration message_delay(int from, int to, std::uint64_t key, std::uint64_t slot_base) const {
        return config_.delay_model.leg(from, now_, key, slot_base) +
               config_.delay_model.leg(to, now_, key, slot_base + 1) + jitter(key, slot_base);
    }

    void add_trace(const char* type, int server, std::int64_t op_id) {
        if (trace_enabled_) trace_.push_back(TraceRow{now_, type, server, op_id});
    }

    void schedule_next_workload_arrival() {
        auto d = detail::workload_draw(config_, streams::kWorkload, workload_seq_,
                                       config_.zipfian_keys ? &zipf_cdf_ : nullptr);
        workload_clock_ += d.gap_us;
        if (workload_clock_ >= static_cast<double>(workload_end_)) {
            awaiting_workload_arrival_ = -1;
            return;
        }
        ++workload_seq_;
        awaiting_workload_arrival_ =
            schedule_op(static_cast<TimePoint>(workload_clock_), d.kind, d.key, d.client);
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
        case EventKind::OpArrive: on_op_arrive(ev); break;
        case EventKind::ReadForward: on_read_forward(ev); break;
        case EventKind::WriteAtReplica: on_write_at_replica(ev); break;
        case EventKind::WriteAck: on_write_ack(ev); break;
        case EventKind::ReadAtReplica: on_read_at_replica(ev); break;
        case EventKind::ReadResponse: on_read_response(ev); break;
        case EventKind::RepairTick: on_repair_tick(); break;
        case EventKind::RepairAtReplica: on_repair_at_replica(ev); break;
        case EventKind::FailToggle:
            failed_.at(static_cast<std::size_t>(ev.server)) = ev.aux != 0;
            add_trace("fail_toggle", ev.server, -1);
            break;
        }
    }

    void on_op_arrive(const Event& ev) {
        PendingOp& op = pending_.at(ev.op_id);
        op.cl_required = required_responses(knobs_.consistency_level, config_.replication_factor);
        op.repair_rate = knobs_.repair_rate;
        add_trace(op.rec.kind == OpKind::Read ? "read_arrive" : "write_arrive", ev.server, ev.op_id);
        if (op.rec.kind == OpKind::Write) {
            write_index_.add_write(op.rec.key, op.rec.op_id, op.rec.start);
            int p = primary_for(op.rec.key);
            for (int k = 0; k < config_.replication_factor; ++k) {
                int replica = (p + k) % config_.n_servers;
                Duration d = message_delay(ev.server, replica, static_cast<std::uint64_t>(ev.op_id),
                                           8 * static_cast<std::uint64_t>(k));
                push_event(now_ + d, EventKind::WriteAtReplica, ev.op_id, replica, k);
            }
        } else {
            push_event(now_ + knobs_.read_delay, EventKind::ReadForward, ev.op_id, ev.server, 0);
        }
        if (ev.op_id == awaiting_workload_arrival_) schedule_next_workload_arrival();
    }

    void on_read_forward(const Event& ev) {
        const PendingOp& op = pending_.at(ev.op_id);
        int p = primary_for(op.rec.key);
        for (int k = 0; k < config_.replication_factor; ++k) {
            int replica = (p + k) % config_.n_servers;
            Duration d = message_delay(ev.server, replica, static_cast<std::uint64_t>(ev.op_id),
                                       64 + 8 * static_cast<std::uint64_t>(k));
            push_event(now_ + d, EventKind::ReadAtReplica, ev.op_id, replica, k);
        }
    }

    void on_write_at_replica(const Event& ev) {
        if (failed_[static_cast<std::size_t>(ev.server)]) return;
        PendingOp& op = pending_.at(ev.op_id);
        apply_value(ev.server, op.rec.key, Value{op.rec.start, op.rec.op_id});
        add_trace("write_apply", ev.server, ev.op_id);
        Duration d = message_delay(ev.server, op.rec.origin_server,
                                   static_cast<std::uint64_t>(ev.op_id),
                                   8 * static_cast<std::uint64_t>(ev.aux) + 3);
        push_event(now_ + d, EventKind::WriteAck, ev.op_id, op.rec.origin_server, ev.aux);
    }

    void on_write_ack(const Event& ev) {
        PendingOp& op = pending_.at(ev.op_id);
        op.responses_counted++;
        op.responses_total++;
        if (!op.completed && op.responses_counted >= op.cl_required) complete(op);
        if (op.responses_total == config_.replication_factor) retire(ev.op_id);
    }

    void on_read_at_replica(const Event& ev) {
        if (failed_[static_cast<std::size_t>(ev.server)]) return;
        const PendingOp& op = pending_.at(ev.op_id);
        Value v = current_value(ev.server, op.rec.key);
        add_trace("read_serve", ev.server, ev.op_id);
        served_values_[served_key(ev.op_id, ev.server)] = v;
        Duration d = message_delay(ev.server, op.rec.origin_server,
                                   static_cast<std::uint64_t>(ev.op_id),
                                   64 + 8 * static_cast<std::uint64_t>(ev.aux) + 3);
        push_event(now_ + d, EventKind::ReadResponse, ev.op_id, ev.server, ev.aux);
    }

    void on_read_response(const Event& ev) {
        PendingOp& op = pending_.at(ev.op_id);
        auto served = served_values_.find(served_key(ev.op_id, ev.server));
        Value v = served->second;
        served_values_.erase(served);
        op.responses_total++;
        if (v.newer_than(op.best_all)) op.best_all = v;
        op.responded.emplace_back(ev.server, v);
        if (op.responses_counted < op.cl_required) {
            op.responses_counted++;
            if (v.newer_than(op.best) || op.responses_counted == 1) op.best = v;
            if (op.responses_counted == op.cl_required && !op.completed) {
                op.rec.write_id = op.best.write_id;
                complete(op);
            }
        }
        if (op.responses_total == config_.replication_factor) {
            maybe_queue_repair(op);
            retire(ev.op_id);
        }
    }

    void on_repair_tick() {
        if (!repair_buffer_.empty()) {
            const std::uint64_t seq = repair_seq_++;
            RepairEntry& entry =
                repair_inflight_.emplace(seq, std::move(repair_buffer_.front())).first->second;
            repair_buffer_.pop_front();
            entry.pending_msgs = static_cast<int>(entry.stale_servers.size());
            for (std::size_t k = 0; k < entry.stale_servers.size(); ++k) {
                Duration d = message_delay(entry.origin_server, entry.stale_servers[k],
                                           0x7000000000000000ULL ^ seq, 8 * k);
                push_event(now_ + d, EventKind::RepairAtReplica, static_cast<std::int64_t>(seq),
                           entry.stale_servers[k], 0);
            }
        }
        if (now_ + config_.repair_drain_interval <= repair_tick_end_) {
            push_event(now_ + config_.repair_drain_interval, EventKind::RepairTick, -1, -1, 0);
        }
    }

    void on_repair_at_replica(const Event& ev) {
        auto it = repair_inflight_.find(static_cast<std::uint64_t>(ev.op_id));
        if (!failed_[static_cast<std::size_t>(ev.server)]) {
            apply_value(ev.server, it->second.key, it->second.freshest);
            add_trace("repair_apply", ev.server, -1);
        }
        if (--it->second.pending_msgs == 0) repair_inflight_.erase(it);
    }

    void maybe_queue_repair(const PendingOp& op) {
        std::vector<int> stale;
        for (const auto& [server, value] : op.responded) {
            if (value.write_id != op.best_all.write_id) stale.push_back(server);
        }
        if (stale.empty()) return;
        double u = hash_uniform(config_.rng_seed, streams::kRepair,
                                static_cast<std::uint64_t>(op.rec.op_id), 0);
        if (u >= op.repair_rate) return;
        if (repair_buffer_.size() >= config_.repair_buffer_cap) return;
        repair_buffer_.push_back(
            RepairEntry{op.rec.key, op.best_all, std::move(stale), op.rec.origin_server, 0});
    }

    void complete(PendingOp& op) {
        op.completed = true;
        op.rec.finish = now_;
        completed_pos_[op.rec.op_id] = log_.size();
        log_.push_back(op.rec);
        ++completions_;
        last_completed_ = op.rec.op_id;
        add_trace("complete", op.rec.origin_server, op.rec.op_id);
    }

    // Drops per-op state once every replica message was accounted for.
    void retire(std::int64_t op_id) { pending_.erase(op_id); }

    void apply_value(int server, std::int32_t key, const Value& v) {
        Value& cur = replicas_[static_cast<std::size_t>(server)][key];
        if (v.newer_than(cur)) cur = v;
    }

    Value current_value(int server, std::int32_t key) const {
        const auto& m = replicas_[static_cast<std::size_t>(server)];
        auto it = m.find(key);
        return it == m.end() ? Value{} : it->second;
    }

    static std::uint64_t served_key(std::int64_t op_id, int server) {
        return (static_cast<std::uint64_t>(op_id) << 8) |
               static_cast<std::uint64_t>(server & 0xff);
    }

    ClusterConfig config_;
    KnobState knobs_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t event_seq_ = 0;
    TimePoint now_ = 0;

    std::vector<bool> failed_;
    std::vector<std::unordered_map<std::int32_t, Value>> replicas_;
    std::unordered_map<std::int64_t, PendingOp> pending_;
    std::unordered_map<std::uint64_t, Value> served_values_;

    std::deque<RepairEntry> repair_buffer_;
    std::unordered_map<std::uint64_t, RepairEntry> repair_inflight_;
    std::uint64_t repair_seq_ = 0;
    TimePoint repair_tick_end_ = 0;

    OpLog log_;
    std::unordered_map<std::int64_t, std::size_t> completed_pos_;
    WriteIndex write_index_;

    std::uint64_t completions_ = 0;
    std::int64_t last_completed_ = -1;

    std::int64_t next_op_id_ = 0;
    std::uint64_t workload_seq_ = 0;
    std::uint64_t injected_seq_ = 0;
    double workload_clock_ = 0.0;
    Duration workload_end_ = 0;
    std::int64_t awaiting_workload_arrival_ = -1;
    std::vector<double> zipf_cdf_;

    bool trace_enabled_ = false;
    std::vector<TraceRow> trace_;
};

// Fixed-knob convenience runner: schedules the workload, applies one knob
// state, and drains the simulation.
inline SimStore run_simulation(const ClusterConfig& config, const KnobState& knobs,
                               Duration duration, bool trace = false) {
    SimStore sim(config);
    sim.enable_trace(trace);
    sim.set_knobs(knobs);
    sim.schedule_workload(duration);
    sim.run_until_idle();
    return sim;
}

} // namespace pcap
