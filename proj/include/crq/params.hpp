#pragma once

#include <cstdint>
#include <variant>

namespace crq {

/// Traffic and queue parameters of the two-class preemptive-priority link.
/// Rates are in packets/s (patience rate in 1/s), times in seconds.
struct SystemParams {
    double lambda1 = 0.0;  // class-1 arrival rate
    double lambda2 = 0.0;  // class-2 arrival rate
    double mu1 = 1.0;      // class-1 service rate
    double mu2 = 1.0;      // class-2 service rate
    double gamma = 0.0;    // per-waiting-packet patience rate (class 1)
    int n1_cap = 1;        // class-1 capacity, in-service packet included
    double epsilon = 0.0;  // class-2 mean-wait QoS bound
    double omega = 0.0;    // maximal class-1 waiting time (class-2 approximation)

    double rho1() const { return lambda1 / mu1; }
    double rho2() const { return lambda2 / mu2; }
};

/// Throws std::invalid_argument when a field is negative, non-finite, a
/// service rate is zero, or the capacity is below one.
void validate(const SystemParams& p);

/// Underlay channel parameters. Only the ratio q_lin / n0 enters the
/// transmission-time law.
struct ChannelParams {
    double q_lin = 1.0;          // interference threshold at PU_RX
    double n0 = 1.0;             // AWGN noise power
    double bandwidth = 1.0e6;    // Hz
    double packet_size = 1.0;    // bits
    double t_out = 1.0;          // ACK / impatience deadline, s
    double g_ss = 1.0;           // SU_TX -> SU_RX power gain
    double g_sp = 1.0;           // SU_TX -> PU_RX power gain

    double q_over_n0() const { return q_lin / n0; }
    /// Bandwidth-normalized entropy S*ln2/B, in seconds.
    double b_bar() const;
};

void validate(const ChannelParams& c);

struct ExponentialPatience {
    double rate = 1.0;
};
struct DeterministicPatience {
    double deadline = 1.0;
};
struct UniformPatience {
    double lo = 0.0;
    double hi = 1.0;
};

using PatienceSpec = std::variant<ExponentialPatience, DeterministicPatience, UniformPatience>;

void validate(const PatienceSpec& spec);

/// Inverse-CDF draw of a patience time from a uniform variate in (0,1).
double sample_patience(const PatienceSpec& spec, double u);

struct StabilityReport {
    bool stable = false;
    double rho1 = 0.0;
    double rho2 = 0.0;
};

/// Report-only check of lambda1 + lambda2 < mu. With unequal service rates
/// the per-class work condition rho1 + rho2 < 1 is used, which reduces to
/// the same test when mu1 == mu2.
StabilityReport validate_stability(const SystemParams& p);

double db_to_linear(double x_db);
double linear_to_db(double x);

/// True iff the class-2 mean wait is strictly below the QoS bound.
bool check_qos(double mean_wait2, const SystemParams& p);

}  // namespace crq
