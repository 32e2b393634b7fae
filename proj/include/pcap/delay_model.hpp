#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pcap/rng.hpp"
#include "pcap/time.hpp"

namespace pcap {

// Stream ids for the counter-based RNG; keep them distinct across modules.
namespace streams {
inline constexpr std::uint64_t kDelay = 1;
inline constexpr std::uint64_t kWorkload = 2;
inline constexpr std::uint64_t kRepair = 3;
inline constexpr std::uint64_t kPassive = 4;
inline constexpr std::uint64_t kAlpha = 5;
inline constexpr std::uint64_t kGeo = 6;
inline constexpr std::uint64_t kInjected = 7;
} // namespace streams

// Time-varying one-way server-to-LAN delay generator. A message between two
// machines costs the sender leg plus the receiver leg; legs are constants
// (Constant, SharpJump) or per-leg lognormal samples (Lognormal). Lognormal
// entries give the mean and standard deviation of the delay itself in ms;
// the log-space parameters are derived from those moments.
struct DelayModel {
    enum class Kind { Constant, SharpJump, Lognormal };

    struct JumpEntry {
        TimePoint at = 0;
        std::vector<Duration> one_way; // per server
    };
    struct LognormalEntry {
        TimePoint at = 0;
        double mean_ms = 0.0;
        double sd_ms = 0.0;
    };

    Kind kind = Kind::Constant;
    Duration constant_one_way = 0;
    std::vector<JumpEntry> jump_schedule;
    std::vector<LognormalEntry> lognormal_schedule;
    std::uint64_t rng_seed = 0;

    static DelayModel constant(Duration one_way) {
        DelayModel m;
        m.kind = Kind::Constant;
        m.constant_one_way = one_way;
        return m;
    }

    static DelayModel sharp_jump(std::vector<JumpEntry> schedule) {
        DelayModel m;
        m.kind = Kind::SharpJump;
        m.jump_schedule = std::move(schedule);
        m.check_schedule();
        return m;
    }

    static DelayModel lognormal(std::vector<LognormalEntry> schedule, std::uint64_t seed) {
        DelayModel m;
        m.kind = Kind::Lognormal;
        m.lognormal_schedule = std::move(schedule);
        m.rng_seed = seed;
        m.check_schedule();
        return m;
    }

    void check_schedule() const {
        auto check = [](TimePoint first, auto begin, auto end) {
            if (begin == end) throw std::invalid_argument("empty delay schedule");
            if (first != 0) throw std::invalid_argument("delay schedule must start at time 0");
            for (auto it = std::next(begin); it != end; ++it) {
                if (it->at <= std::prev(it)->at) {
                    throw std::invalid_argument("delay schedule times must be strictly increasing");
                }
            }
        };
        if (kind == Kind::SharpJump) {
            check(jump_schedule.front().at, jump_schedule.begin(), jump_schedule.end());
        } else if (kind == Kind::Lognormal) {
            check(lognormal_schedule.front().at, lognormal_schedule.begin(), lognormal_schedule.end());
        }
    }

    bool stochastic() const { return kind == Kind::Lognormal; }

    // Constant-valued one-way delay of `server` at time `at`; only meaningful
    // for the deterministic variants.
    Duration one_way_at(int server, TimePoint at) const {
        switch (kind) {
        case Kind::Constant:
            return constant_one_way;
        case Kind::SharpJump: {
            const JumpEntry* active = &jump_schedule.front();
            for (const JumpEntry& e : jump_schedule) {
                if (e.at <= at) active = &e;
                else break;
            }
            if (server < 0 || static_cast<std::size_t>(server) >= active->one_way.size()) {
                throw std::out_of_range("server index outside delay map");
            }
            return active->one_way[static_cast<std::size_t>(server)];
        }
        case Kind::Lognormal:
            throw std::logic_error("one_way_at called on a stochastic delay model");
        }
        return 0;
    }

    const LognormalEntry& lognormal_at(TimePoint at) const {
        const LognormalEntry* active = &lognormal_schedule.front();
        for (const LognormalEntry& e : lognormal_schedule) {
            if (e.at <= at) active = &e;
            else break;
        }
        return *active;
    }

    // One leg of a message. `key`/`slot` address the draw so a given message
    // hop sees the same delay regardless of when the event loop asks for it.
    Duration leg(int server, TimePoint at, std::uint64_t key, std::uint64_t slot) const {
        if (kind != Kind::Lognormal) return one_way_at(server, at);
        const LognormalEntry& e = lognormal_at(at);
        auto p = LognormalMoments::from_mean_sd(e.mean_ms, e.sd_ms);
        double z = hash_normal(rng_seed, streams::kDelay, key, slot);
        double delay_ms = p.from_normal(z);
        Duration d = from_ms(delay_ms);
        return d < 0 ? 0 : d;
    }
};

} // namespace pcap
