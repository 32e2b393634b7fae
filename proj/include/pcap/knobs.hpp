#pragma once

#include <stdexcept>
#include <string>

#include "pcap/time.hpp"

namespace pcap {

enum class ConsistencyLevel { One, Two, Quorum, All };

inline int required_responses(ConsistencyLevel cl, int replication_factor) {
    switch (cl) {
    case ConsistencyLevel::One: return 1;
    case ConsistencyLevel::Two: return 2;
    case ConsistencyLevel::Quorum: return replication_factor / 2 + 1;
    case ConsistencyLevel::All: return replication_factor;
    }
    return 1;
}

inline std::string to_string(ConsistencyLevel cl) {
    switch (cl) {
    case ConsistencyLevel::One: return "ONE";
    case ConsistencyLevel::Two: return "TWO";
    case ConsistencyLevel::Quorum: return "QUORUM";
    case ConsistencyLevel::All: return "ALL";
    }
    return "ONE";
}

struct KnobOutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The three read-path control knobs.
struct KnobState {
    Duration read_delay = 0;         // coordinator-side delay before forwarding reads
    double repair_rate = 0.1;        // probability a divergent read is queued for repair
    ConsistencyLevel consistency_level = ConsistencyLevel::One;

    void check(Duration max_read_delay) const {
        if (read_delay < 0 || read_delay > max_read_delay) {
            throw KnobOutOfRange("read_delay outside [0, max_read_delay]");
        }
        if (repair_rate < 0.0 || repair_rate > 1.0) {
            throw KnobOutOfRange("repair_rate outside [0, 1]");
        }
    }
};

inline constexpr Duration kDefaultMaxReadDelay = ms(10);

} // namespace pcap
