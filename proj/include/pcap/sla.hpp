#pragma once

#include <stdexcept>

#include "pcap/time.hpp"

namespace pcap {

// Consistency SLA: keep the t_c-staleness fraction below p_ic_sla while
// minimizing the t_a-latency-miss fraction. epsilon is the laxity the
// controller subtracts from the bound so the metric converges strictly
// below it.
struct ConsistencySla {
    double p_ic_sla = 0.0;
    Duration t_c = 0;
    Duration t_a = 0;
    double epsilon = 0.05;
};

// Latency SLA: the mirror image, bounding the t_a-miss fraction.
struct LatencySla {
    double p_ua_sla = 0.0;
    Duration t_a = 0;
    Duration t_c = 0;
    double epsilon = 0.05;
};

// Soft partition: at least alpha of client-to-client paths exceed t_p.
struct PartitionModel {
    Duration t_p = 0;
    double alpha = 0.0;
};

inline void validate(const ConsistencySla& s) {
    if (s.p_ic_sla < 0.0 || s.p_ic_sla > 1.0) throw std::invalid_argument("p_ic_sla out of [0,1]");
    if (s.epsilon < 0.0 || s.p_ic_sla - s.epsilon < 0.0) throw std::invalid_argument("epsilon exceeds SLA bound");
    if (s.t_c < 0 || s.t_a < 0) throw std::invalid_argument("negative SLA duration");
}

inline void validate(const LatencySla& s) {
    if (s.p_ua_sla < 0.0 || s.p_ua_sla > 1.0) throw std::invalid_argument("p_ua_sla out of [0,1]");
    if (s.epsilon < 0.0 || s.p_ua_sla - s.epsilon < 0.0) throw std::invalid_argument("epsilon exceeds SLA bound");
    if (s.t_c < 0 || s.t_a < 0) throw std::invalid_argument("negative SLA duration");
}

inline void validate(const PartitionModel& p) {
    if (p.alpha < 0.0 || p.alpha > 1.0) throw std::invalid_argument("alpha out of [0,1]");
    if (p.t_p < 0) throw std::invalid_argument("negative t_p");
}

} // namespace pcap
