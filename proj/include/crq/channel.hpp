#pragma once

#include "crq/params.hpp"

namespace crq {

/// Law of the channel-limited transmission time T of one packet when the
/// secondary transmitter runs at the largest power the interference
/// threshold allows. F(t) = r / (exp(b/t) + r - 1) with r = Q/N0, b = b_bar.
struct ServiceTimeLaw {
    double b_bar = 1.0;
    double q_over_n0 = 1.0;

    static ServiceTimeLaw from(const ChannelParams& c);
};

void validate(const ServiceTimeLaw& law);

/// Largest transmit power meeting the interference constraint P_s <= Q/g_sp.
double max_transmit_power(double q_lin, double g_sp);

/// Deterministic transmission time for fixed gains at maximum power.
double transmission_time(const ServiceTimeLaw& law, double g_ss, double g_sp);

double service_time_cdf(const ServiceTimeLaw& law, double t);
double service_time_pdf(const ServiceTimeLaw& law, double t);

/// Pr{T > t_out}.
double outage_probability(const ServiceTimeLaw& law, double t_out);

/// Inverse-CDF draw; u must lie in the open interval (0, 1).
double sample_service_time(const ServiceTimeLaw& law, double u);

struct ExpectedTimeReport {
    double closed_form_integral = 0.0;  // r * integral over u in [exp(b/t_out), inf)
    double closed_form_tail = 0.0;      // r * t_out * (1/r - 1/(1 - exp(b/t_out)))
    double closed_form_value = 0.0;     // sum of the two terms above
    double truncated_mean = 0.0;        // E[min(T, t_out)]
    double relative_gap = 0.0;          // (closed_form_value - truncated_mean) / truncated_mean
};

/// Evaluates the two-term closed form for the mean transmission time next to
/// the oracle E[min(T, t_out)]; the oracle is the value used to calibrate
/// mu = 1/E[T]. Throws std::runtime_error if a quadrature fails to converge.
ExpectedTimeReport expected_transmission_time(const ServiceTimeLaw& law, double t_out);

/// E[min(T, t_out)] alone, by quadrature of t*pdf(t) on (0, t_out] plus t_out*P_out.
double truncated_mean_transmission_time(const ServiceTimeLaw& law, double t_out);

struct UntruncatedMean {
    bool converges = false;
    double value = 0.0;        // +inf when divergent
    double tail_constant = 0.0;  // lim t^2 pdf(t); t*pdf ~ tail_constant / t
};

/// E[T] without the deadline. The pdf tail decays like b/(r t^2), so the
/// mean always diverges logarithmically; reported rather than assumed.
UntruncatedMean untruncated_mean(const ServiceTimeLaw& law);

}  // namespace crq
