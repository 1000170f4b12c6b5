#pragma once

#include "crq/params.hpp"
#include "crq/stats.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace crq {

enum class ServiceMode { markovian, channel };
enum class PreemptionMode { resume, repeat };

/// Declaration order is the tie-break order for simultaneous events.
enum class EventKind : std::uint8_t { service_done, patience_expired, arrival1, arrival2 };

const char* to_string(EventKind k);

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::arrival1;
    std::uint64_t packet_id = 0;
    std::uint64_t epoch = 0;  // service generation, used to drop stale completions

    /// Strict weak order: time, then kind, then packet id.
    friend bool operator<(const Event& a, const Event& b) {
        if (a.time != b.time) {
            return a.time < b.time;
        }
        if (a.kind != b.kind) {
            return a.kind < b.kind;
        }
        return a.packet_id < b.packet_id;
    }
};

/// State snapshot after each processed event.
struct TraceRecord {
    double time = 0.0;
    EventKind kind = EventKind::arrival1;
    std::uint64_t packet_id = 0;
    int n1 = 0;             // class-1 packets in system
    int n2 = 0;             // class-2 packets in system
    int serving_class = 0;  // 0 idle, 1 or 2
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct SimConfig {
    SystemParams params;
    std::optional<ChannelParams> channel;  // required in channel mode
    /// Class-1 patience law; empty means patience exponential(gamma), or no
    /// abandonment at all when gamma == 0.
    std::optional<PatienceSpec> patience;
    ServiceMode service_mode = ServiceMode::markovian;
    PreemptionMode preemption_mode = PreemptionMode::resume;
    std::uint64_t horizon_events = 1'000'000;
    double warmup_fraction = 0.2;
    std::size_t batches = 32;
    std::uint64_t seed = 1;
    std::uint64_t run_index = 0;
    TraceSink trace;
};

/// Throws std::invalid_argument on an unusable configuration.
void validate(const SimConfig& cfg);

struct SimMetric {
    double mean = 0.0;
    double half_width = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool defined = false;  // false when fewer than ten batches carried data
    std::vector<double> batches;

    bool covers(double x) const { return defined && lo <= x && x <= hi; }
};

struct ClassCounts {
    std::uint64_t arrived = 0;
    std::uint64_t served = 0;
    std::uint64_t reneged = 0;           // patience abandonment plus outage
    std::uint64_t reneged_patience = 0;
    std::uint64_t outage = 0;            // failed transmission attempts (class 1)
    std::uint64_t overflowed = 0;
    std::uint64_t in_system_at_end = 0;

    bool conserved() const { return arrived == served + reneged + overflowed + in_system_at_end; }
};

/// Post-warm-up tallies used for proportion intervals.
struct ProportionTally {
    std::uint64_t arrivals1 = 0;
    std::uint64_t overflowed = 0;
    std::uint64_t reneged_patience = 0;
    std::uint64_t outage = 0;
};

struct SimResult {
    SimMetric wait1_queue;  // per class-1 arrival: time before service start or abandonment
    SimMetric sojourn1;     // served class-1 packets
    SimMetric wait2_queue;  // served class-2 packets: sojourn minus time in service
    SimMetric sojourn2;
    SimMetric empty_prob1;  // time fraction with no class-1 packet in system
    SimMetric reneged_frac;
    SimMetric overflow_frac;
    SimMetric outage_frac;
    std::array<ClassCounts, 2> counts{};
    ProportionTally tally;
    std::uint64_t events = 0;
    std::size_t replications = 1;
    double end_time = 0.0;
    double measured_time = 0.0;
};

SimResult run_sim(const SimConfig& cfg);

/// Pools the batch means of independent replications and recomputes every
/// interval; counts are summed.
SimResult aggregate(std::span<const SimResult> runs);

/// Time-average fraction of [window_start, last record] with n1 == 0.
/// Throws std::invalid_argument on an empty window.
double measure_empty_prob(std::span<const TraceRecord> trace, double window_start = 0.0);

}  // namespace crq
