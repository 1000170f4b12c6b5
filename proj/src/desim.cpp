#include "crq/desim.hpp"

#include "crq/channel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>
#include <stdexcept>

namespace crq {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::service_done:
            return "service_done";
        case EventKind::patience_expired:
            return "patience_expired";
        case EventKind::arrival1:
            return "arrival1";
        case EventKind::arrival2:
            return "arrival2";
    }
    return "unknown";
}

void validate(const SimConfig& cfg) {
    validate(cfg.params);
    if (cfg.patience) {
        validate(*cfg.patience);
    }
    if (cfg.service_mode == ServiceMode::channel) {
        if (!cfg.channel) {
            throw std::invalid_argument("channel service mode needs channel parameters");
        }
        validate(*cfg.channel);
    }
    if (cfg.batches < kMinBatches) {
        throw std::invalid_argument("need at least 10 batches");
    }
    if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0)) {
        throw std::invalid_argument("warmup_fraction must lie in [0, 1)");
    }
    const auto warm = static_cast<std::uint64_t>(cfg.warmup_fraction * static_cast<double>(cfg.horizon_events));
    if (cfg.horizon_events <= cfg.batches || cfg.horizon_events - warm < cfg.batches) {
        throw std::invalid_argument("horizon_events must exceed batches after warm-up");
    }
    if (cfg.params.lambda1 + cfg.params.lambda2 <= 0.0) {
        throw std::invalid_argument("at least one arrival rate must be > 0");
    }
}

namespace {

enum class PacketState : std::uint8_t { waiting, in_service, done };

struct Packet {
    int cls = 1;
    PacketState state = PacketState::waiting;
    bool measured = false;
    bool attempt_fails = false;  // channel mode: current attempt ends in outage
    double arrival = 0.0;
    double service_time_total = 0.0;
    double remaining = 0.0;  // residual of the current attempt when preempted
};

struct BatchAcc {
    double time = 0.0;
    double empty_time = 0.0;
    double w1_sum = 0.0;
    std::uint64_t w1_n = 0;
    double s1_sum = 0.0;
    std::uint64_t s1_n = 0;
    double w2_sum = 0.0;
    std::uint64_t w2_n = 0;
    double s2_sum = 0.0;
    std::uint64_t s2_n = 0;
    std::uint64_t arrivals1 = 0;
    std::uint64_t overflowed = 0;
    std::uint64_t reneged = 0;
    std::uint64_t outage = 0;
};

SimMetric finish_metric(std::vector<double> values) {
    SimMetric m;
    m.batches = std::move(values);
    if (m.batches.size() >= kMinBatches) {
        const Summary s = summarize(m.batches);
        m.mean = s.mean;
        m.half_width = s.half_width;
        m.lo = s.lo();
        m.hi = s.hi();
        m.defined = true;
    } else {
        m.mean = std::nan("");
        m.lo = m.hi = m.mean;
    }
    return m;
}

/// Batch-means interval widened by the Wilson interval of the pooled counts.
SimMetric finish_proportion(std::vector<double> values, std::uint64_t hits, std::uint64_t trials) {
    SimMetric m = finish_metric(std::move(values));
    if (m.defined && trials > 0) {
        const Interval w = wilson_interval(hits, trials);
        m.lo = std::min(m.lo, w.lo);
        m.hi = std::max(m.hi, w.hi);
    }
    return m;
}

class Simulator {
public:
    explicit Simulator(const SimConfig& cfg)
        : cfg_(cfg), p_(cfg.params) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(cfg.run_index),
                          static_cast<std::uint32_t>(cfg.run_index >> 32)};
        rng_.seed(seq);
        if (cfg.patience) {
            patience_ = cfg.patience;
        } else if (p_.gamma > 0.0) {
            patience_ = ExponentialPatience{p_.gamma};
        }
        if (cfg.service_mode == ServiceMode::channel) {
            law_ = ServiceTimeLaw::from(*cfg.channel);
            t_out_ = cfg.channel->t_out;
        }
        warmup_events_ = static_cast<std::uint64_t>(cfg.warmup_fraction * static_cast<double>(cfg.horizon_events));
        batch_events_ = (cfg.horizon_events - warmup_events_) / cfg.batches;
        batches_.resize(cfg.batches);
    }

    SimResult run() {
        if (p_.lambda1 > 0.0) {
            schedule(exp_draw(p_.lambda1), EventKind::arrival1, new_packet(1));
        }
        if (p_.lambda2 > 0.0) {
            schedule(exp_draw(p_.lambda2), EventKind::arrival2, new_packet(2));
        }

        while (processed_ < cfg_.horizon_events) {
            if (events_.empty()) {
                throw std::logic_error("event list exhausted");
            }
            const Event ev = events_.top();
            events_.pop();
            if (stale(ev)) {
                continue;
            }
            advance_clock(ev.time);
            ++processed_;
            if (processed_ == warmup_events_ + 1 && !measuring_) {
                measuring_ = true;
            }
            dispatch(ev);
            check_priority_invariant();
            if (cfg_.trace) {
                cfg_.trace({now_, ev.kind, ev.packet_id, n1_, n2_, serving_class()});
            }
        }
        return collect();
    }

private:
    // -- randomness ---------------------------------------------------------

    double uniform() {
        // 53-bit midpoint grid on (0, 1); never returns 0 or 1.
        return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    }
    double exp_draw(double rate) { return -std::log(uniform()) / rate; }

    // -- bookkeeping --------------------------------------------------------

    std::uint64_t new_packet(int cls) {
        packets_.push_back(Packet{});
        packets_.back().cls = cls;
        return packets_.size() - 1;
    }

    void schedule(double time, EventKind kind, std::uint64_t id, std::uint64_t epoch = 0) {
        events_.push(Event{time, kind, id, epoch});
    }

    bool stale(const Event& ev) const {
        switch (ev.kind) {
            case EventKind::service_done:
                return ev.epoch != service_epoch_ || !in_service_ || *in_service_ != ev.packet_id;
            case EventKind::patience_expired:
                return packets_[ev.packet_id].state != PacketState::waiting;
            default:
                return false;
        }
    }

    int serving_class() const { return in_service_ ? packets_[*in_service_].cls : 0; }

    BatchAcc* batch() {
        if (!measuring_) {
            return nullptr;
        }
        const std::uint64_t k = (processed_ - warmup_events_ - 1) / std::max<std::uint64_t>(batch_events_, 1);
        return &batches_[std::min<std::size_t>(k, batches_.size() - 1)];
    }

    void advance_clock(double t) {
        if (measuring_) {
            // The interval (now, t] is charged to the batch of the event ending it.
            const std::uint64_t k = (processed_ - warmup_events_) / std::max<std::uint64_t>(batch_events_, 1);
            BatchAcc& b = batches_[std::min<std::size_t>(k, batches_.size() - 1)];
            b.time += t - now_;
            if (n1_ == 0) {
                b.empty_time += t - now_;
            }
        }
        now_ = t;
    }

    void check_priority_invariant() const {
        if (serving_class() == 2 && n1_ > 0) {
            throw std::logic_error("class-2 packet in service while class-1 packets wait");
        }
    }

    // -- event handlers -----------------------------------------------------

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::arrival1:
                on_arrival1(ev.packet_id);
                break;
            case EventKind::arrival2:
                on_arrival2(ev.packet_id);
                break;
            case EventKind::service_done:
                on_service_done(ev.packet_id);
                break;
            case EventKind::patience_expired:
                on_patience(ev.packet_id);
                break;
        }
    }

    void on_arrival1(std::uint64_t id) {
        schedule(now_ + exp_draw(p_.lambda1), EventKind::arrival1, new_packet(1));
        Packet& pk = packets_[id];
        pk.arrival = now_;
        pk.measured = measuring_;
        ++counts_[0].arrived;
        BatchAcc* b = pk.measured ? batch() : nullptr;
        if (b) {
            ++b->arrivals1;
            ++tally_.arrivals1;
        }

        if (n1_ >= p_.n1_cap) {
            pk.state = PacketState::done;
            ++counts_[0].overflowed;
            if (b) {
                ++b->overflowed;
                ++tally_.overflowed;
                b->w1_sum += 0.0;
                ++b->w1_n;
            }
            return;
        }
        ++n1_;
        if (serving_class() == 2) {
            preempt();
        }
        if (!in_service_) {
            start_service(id);
            return;
        }
        queue1_.push_back(id);
        if (patience_) {
            schedule(now_ + sample_patience(*patience_, uniform()), EventKind::patience_expired, id);
        }
    }

    void on_arrival2(std::uint64_t id) {
        schedule(now_ + exp_draw(p_.lambda2), EventKind::arrival2, new_packet(2));
        Packet& pk = packets_[id];
        pk.arrival = now_;
        pk.measured = measuring_;
        ++counts_[1].arrived;
        ++n2_;
        if (!in_service_) {
            start_service(id);
        } else {
            queue2_.push_back(id);
        }
    }

    void preempt() {
        const std::uint64_t id = *in_service_;
        Packet& pk = packets_[id];
        const double elapsed = now_ - service_started_;
        pk.service_time_total += elapsed;
        if (cfg_.preemption_mode == PreemptionMode::resume) {
            pk.remaining = service_end_ - now_;
        } else {
            pk.remaining = 0.0;
        }
        pk.state = PacketState::waiting;
        queue2_.push_front(id);
        in_service_.reset();
        ++service_epoch_;
    }

    // Draws the length of a fresh transmission attempt.
    double fresh_attempt(Packet& pk) {
        if (cfg_.service_mode == ServiceMode::markovian) {
            pk.attempt_fails = false;
            return exp_draw(pk.cls == 1 ? p_.mu1 : p_.mu2);
        }
        const double t = sample_service_time(law_, uniform());
        pk.attempt_fails = t > t_out_;
        return pk.attempt_fails ? t_out_ : t;
    }

    void start_service(std::uint64_t id) {
        Packet& pk = packets_[id];
        if (pk.cls == 1 && pk.measured) {
            if (BatchAcc* b = batch()) {
                b->w1_sum += now_ - pk.arrival;
                ++b->w1_n;
            }
        }
        const double length = pk.remaining > 0.0 ? pk.remaining : fresh_attempt(pk);
        pk.remaining = 0.0;
        pk.state = PacketState::in_service;
        in_service_ = id;
        service_started_ = now_;
        service_end_ = now_ + length;
        ++service_epoch_;
        schedule(service_end_, EventKind::service_done, id, service_epoch_);
    }

    void on_service_done(std::uint64_t id) {
        Packet& pk = packets_[id];
        pk.service_time_total += now_ - service_started_;
        in_service_.reset();
        ++service_epoch_;

        if (pk.attempt_fails && pk.cls == 2) {
            // Class-2 packets never abandon: a failed attempt is retried at once.
            start_service(id);
            return;
        }

        pk.state = PacketState::done;
        BatchAcc* b = pk.measured ? batch() : nullptr;
        if (pk.cls == 1) {
            --n1_;
            if (pk.attempt_fails) {
                ++counts_[0].outage;
                ++counts_[0].reneged;
                if (b) {
                    ++b->outage;
                    ++tally_.outage;
                }
            } else {
                ++counts_[0].served;
                if (b) {
                    b->s1_sum += now_ - pk.arrival;
                    ++b->s1_n;
                }
            }
        } else {
            --n2_;
            ++counts_[1].served;
            if (b) {
                const double sojourn = now_ - pk.arrival;
                b->s2_sum += sojourn;
                ++b->s2_n;
                b->w2_sum += sojourn - pk.service_time_total;
                ++b->w2_n;
            }
        }
        start_next();
    }

    void on_patience(std::uint64_t id) {
        Packet& pk = packets_[id];
        pk.state = PacketState::done;
        --n1_;
        ++counts_[0].reneged;
        ++counts_[0].reneged_patience;
        // Removed lazily from queue1_ when it reaches the head.
        if (pk.measured) {
            if (BatchAcc* b = batch()) {
                b->w1_sum += now_ - pk.arrival;
                ++b->w1_n;
                ++b->reneged;
                ++tally_.reneged_patience;
            }
        }
    }

    void start_next() {
        while (!queue1_.empty()) {
            const std::uint64_t id = queue1_.front();
            queue1_.pop_front();
            if (packets_[id].state == PacketState::waiting) {
                start_service(id);
                return;
            }
        }
        if (!queue2_.empty()) {
            const std::uint64_t id = queue2_.front();
            queue2_.pop_front();
            start_service(id);
        }
    }

    // -- output -------------------------------------------------------------

    SimResult collect() {
        SimResult r;
        r.events = processed_;
        r.end_time = now_;
        counts_[0].in_system_at_end = static_cast<std::uint64_t>(n1_);
        counts_[1].in_system_at_end = static_cast<std::uint64_t>(n2_);
        r.counts = counts_;
        r.tally = tally_;

        std::vector<double> w1, s1, w2, s2, empty, ren, ovf, outg;
        for (const BatchAcc& b : batches_) {
            r.measured_time += b.time;
            if (b.time > 0.0) {
                empty.push_back(b.empty_time / b.time);
            }
            if (b.w1_n > 0) {
                w1.push_back(b.w1_sum / static_cast<double>(b.w1_n));
            }
            if (b.s1_n > 0) {
                s1.push_back(b.s1_sum / static_cast<double>(b.s1_n));
            }
            if (b.w2_n > 0) {
                w2.push_back(b.w2_sum / static_cast<double>(b.w2_n));
            }
            if (b.s2_n > 0) {
                s2.push_back(b.s2_sum / static_cast<double>(b.s2_n));
            }
            if (b.arrivals1 > 0) {
                const auto a = static_cast<double>(b.arrivals1);
                ren.push_back(static_cast<double>(b.reneged) / a);
                ovf.push_back(static_cast<double>(b.overflowed) / a);
                outg.push_back(static_cast<double>(b.outage) / a);
            }
        }
        r.wait1_queue = finish_metric(std::move(w1));
        r.sojourn1 = finish_metric(std::move(s1));
        r.wait2_queue = finish_metric(std::move(w2));
        r.sojourn2 = finish_metric(std::move(s2));
        r.empty_prob1 = finish_metric(std::move(empty));
        r.reneged_frac = finish_proportion(std::move(ren), tally_.reneged_patience, tally_.arrivals1);
        r.overflow_frac = finish_proportion(std::move(ovf), tally_.overflowed, tally_.arrivals1);
        r.outage_frac = finish_proportion(std::move(outg), tally_.outage, tally_.arrivals1);
        return r;
    }

    const SimConfig& cfg_;
    SystemParams p_;
    std::optional<PatienceSpec> patience_;
    ServiceTimeLaw law_;
    double t_out_ = 0.0;
    std::mt19937_64 rng_;

    struct Later {
        bool operator()(const Event& a, const Event& b) const { return b < a; }
    };
    std::priority_queue<Event, std::vector<Event>, Later> events_;
    std::vector<Packet> packets_;
    std::deque<std::uint64_t> queue1_;
    std::deque<std::uint64_t> queue2_;
    std::optional<std::uint64_t> in_service_;
    std::uint64_t service_epoch_ = 0;
    double service_started_ = 0.0;
    double service_end_ = 0.0;
    double now_ = 0.0;
    int n1_ = 0;
    int n2_ = 0;

    std::uint64_t processed_ = 0;
    std::uint64_t warmup_events_ = 0;
    std::uint64_t batch_events_ = 0;
    bool measuring_ = false;
    std::vector<BatchAcc> batches_;
    std::array<ClassCounts, 2> counts_{};
    ProportionTally tally_;
};

}  // namespace

SimResult run_sim(const SimConfig& cfg) {
    validate(cfg);
    return Simulator(cfg).run();
}

SimResult aggregate(std::span<const SimResult> runs) {
    if (runs.empty()) {
        throw std::invalid_argument("aggregate: no runs");
    }
    if (runs.size() == 1) {
        return runs.front();
    }
    SimResult out;
    out.replications = runs.size();
    std::vector<double> w1, s1, w2, s2, empty, ren, ovf, outg;
    auto append = [](std::vector<double>& dst, const SimMetric& m) {
        dst.insert(dst.end(), m.batches.begin(), m.batches.end());
    };
    for (const SimResult& r : runs) {
        append(w1, r.wait1_queue);
        append(s1, r.sojourn1);
        append(w2, r.wait2_queue);
        append(s2, r.sojourn2);
        append(empty, r.empty_prob1);
        append(ren, r.reneged_frac);
        append(ovf, r.overflow_frac);
        append(outg, r.outage_frac);
        for (std::size_t c = 0; c < 2; ++c) {
            ClassCounts& dst = out.counts[c];
            const ClassCounts& src = r.counts[c];
            dst.arrived += src.arrived;
            dst.served += src.served;
            dst.reneged += src.reneged;
            dst.reneged_patience += src.reneged_patience;
            dst.outage += src.outage;
            dst.overflowed += src.overflowed;
            dst.in_system_at_end += src.in_system_at_end;
        }
        out.tally.arrivals1 += r.tally.arrivals1;
        out.tally.overflowed += r.tally.overflowed;
        out.tally.reneged_patience += r.tally.reneged_patience;
        out.tally.outage += r.tally.outage;
        out.events += r.events;
        out.end_time = std::max(out.end_time, r.end_time);
        out.measured_time += r.measured_time;
    }
    out.wait1_queue = finish_metric(std::move(w1));
    out.sojourn1 = finish_metric(std::move(s1));
    out.wait2_queue = finish_metric(std::move(w2));
    out.sojourn2 = finish_metric(std::move(s2));
    out.empty_prob1 = finish_metric(std::move(empty));
    out.reneged_frac = finish_proportion(std::move(ren), out.tally.reneged_patience, out.tally.arrivals1);
    out.overflow_frac = finish_proportion(std::move(ovf), out.tally.overflowed, out.tally.arrivals1);
    out.outage_frac = finish_proportion(std::move(outg), out.tally.outage, out.tally.arrivals1);
    return out;
}

double measure_empty_prob(std::span<const TraceRecord> trace, double window_start) {
    double total = 0.0;
    double empty = 0.0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        const double a = std::max(trace[k - 1].time, window_start);
        const double b = trace[k].time;
        if (b <= a) {
            continue;
        }
        total += b - a;
        if (trace[k - 1].n1 == 0) {
            empty += b - a;
        }
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("measure_empty_prob: zero-length measurement window");
    }
    return empty / total;
}

}  // namespace crq
