#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "pcap/delay_model.hpp"
#include "pcap/metrics.hpp"
#include "pcap/rng.hpp"
#include "pcap/time.hpp"

namespace pcap {

// Fraction of client-to-client paths whose propagation delay exceeds t_p, in
// a star LAN of n servers with one client co-located per server.
//
// Path convention: ordered pairs (i, j), i != j, routed
// client_i -> server_i -> server_j -> client_j. Every hop crosses the LAN
// switch, so a hop from machine a to machine b costs one_way(a) + one_way(b)
// and the whole path costs 3*(one_way(i) + one_way(j)). Deterministic models
// are enumerated exactly; lognormal models are estimated by sampling the six
// legs of n_samples random paths.
inline double compute_alpha(const DelayModel& model, int n_servers, Duration t_p,
                            TimePoint at, std::size_t n_samples = 100'000) {
    if (n_servers < 2) return 0.0;
    if (!model.stochastic()) {
        std::size_t over = 0;
        std::size_t total = 0;
        for (int i = 0; i < n_servers; ++i) {
            for (int j = 0; j < n_servers; ++j) {
                if (i == j) continue;
                Duration path = 3 * (model.one_way_at(i, at) + model.one_way_at(j, at));
                ++total;
                if (path > t_p) ++over;
            }
        }
        return static_cast<double>(over) / static_cast<double>(total);
    }
    const auto& entry = model.lognormal_at(at);
    auto params = LognormalMoments::from_mean_sd(entry.mean_ms, entry.sd_ms);
    Stream rng(splitmix64(model.rng_seed ^ streams::kAlpha) ^ static_cast<std::uint64_t>(at));
    std::size_t over = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        double path_ms = 0.0;
        for (int leg = 0; leg < 6; ++leg) {
            path_ms += params.from_normal(rng.normal());
        }
        if (from_ms(path_ms) > t_p) ++over;
    }
    return static_cast<double>(over) / static_cast<double>(n_samples);
}

// The optimal-achievable frontier: the best possible value of one metric
// given the other, under an (t_p, alpha)-partition with t_c + t_a = t_p.
inline double optimal_p_ic(double alpha, double p_ua) {
    return std::max(0.0, alpha - p_ua);
}

inline double optimal_p_ua(double alpha, double p_ic) {
    return std::max(0.0, alpha - p_ic);
}

enum class ImpossibilityVerdict { NotApplicable, Consistent, Violation };

// Checks a measured run against the impossibility bound: with t_c + t_a < t_p
// no run may achieve p_ua + p_ic < alpha. The tolerance absorbs sampling
// noise of the measured fractions (0.02 is ~4 sigma at 10^4 ops).
inline ImpossibilityVerdict check_impossibility(const MetricReport& measured, double alpha,
                                                Duration t_c, Duration t_a, Duration t_p,
                                                double tolerance = 0.02) {
    if (t_c + t_a >= t_p) return ImpossibilityVerdict::NotApplicable;
    if (measured.p_ua + measured.p_ic < alpha - tolerance) {
        return ImpossibilityVerdict::Violation;
    }
    return ImpossibilityVerdict::Consistent;
}

// (p_ua, p_ic_opt) polyline for plotting against run scatter data.
inline std::vector<std::pair<double, double>> envelope_polyline(double alpha,
                                                                std::size_t points = 101) {
    std::vector<std::pair<double, double>> line;
    line.reserve(points);
    for (std::size_t k = 0; k < points; ++k) {
        double p_ua = static_cast<double>(k) / static_cast<double>(points - 1);
        line.emplace_back(p_ua, optimal_p_ic(alpha, p_ua));
    }
    return line;
}

namespace detail {
inline double dist_point_segment(double px, double py, double ax, double ay,
                                 double bx, double by) {
    const double abx = bx - ax;
    const double aby = by - ay;
    const double len2 = abx * abx + aby * aby;
    double t = len2 > 0.0 ? ((px - ax) * abx + (py - ay) * aby) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * abx);
    const double dy = py - (ay + t * aby);
    return std::sqrt(dx * dx + dy * dy);
}
} // namespace detail

// Euclidean distance from a (p_ua, p_ic) point to the optimal frontier
// polyline {p_ic = max(0, alpha - p_ua), p_ua in [0, 1]}.
inline double distance_to_envelope(double p_ua, double p_ic, double alpha) {
    if (alpha <= 0.0) {
        return detail::dist_point_segment(p_ua, p_ic, 0.0, 0.0, 1.0, 0.0);
    }
    double d = detail::dist_point_segment(p_ua, p_ic, 0.0, alpha, alpha, 0.0);
    d = std::min(d, detail::dist_point_segment(p_ua, p_ic, alpha, 0.0, 1.0, 0.0));
    return d;
}

} // namespace pcap
