#pragma once

#include "crq/params.hpp"

#include <vector>

namespace crq {

/// Total reneging rate out of class-1 level n: every waiting packet (all but
/// the one in service) abandons at rate gamma.
double renege_rate(int n, double gamma);

/// Stationary law of the class-1 birth-death chain on 0..n1_cap with birth
/// rate lambda1 and death rate mu1 + (n-1)*gamma.
struct SteadyState {
    std::vector<double> probs;  // P_0..P_{n1}, sums to one
    double overflow = 0.0;      // P_{n1+1}: the recursion carried one step past capacity

    double empty() const { return probs.front(); }
    /// Textbook blocking probability P_{n1} (arrival finds the buffer full).
    double blocking() const { return probs.back(); }
};

/// Products are accumulated in log space. Throws std::overflow_error when a
/// probability comes out non-finite.
SteadyState class1_steady_state(const SystemParams& p);

struct Class1Metrics {
    double empty_prob = 0.0;
    double mean_len = 0.0;         // sum n P_n, in-service packet included
    double mean_wait = 0.0;        // mean_len / lambda1
    double mean_queue_len = 0.0;   // sum (n-1)+ P_n, waiting packets only
    double mean_queue_wait = 0.0;  // mean_queue_len / lambda1
    double overflow_prob = 0.0;    // P_{n1+1}
    double blocking_prob = 0.0;    // P_{n1}
    double abandon_prob = 0.0;     // gamma * mean_queue_len / lambda1
    double reneging_prob = 0.0;    // overflow_prob + p_out
    double total_wait = 0.0;       // e_t + mean_wait
    bool lambda_zero = false;      // waits defined as 0
};

Class1Metrics class1_metrics(const SystemParams& p, const SteadyState& ss, double e_t,
                             double p_out);

struct Class2Metrics {
    double d = 0.0;
    double denominator = 0.0;  // (1 - rho1) - rho2 (1 - d)
    double mean_num = 0.0;
    double mean_wait = 0.0;
    double p0 = 0.0;           // class-1 empty probability used in the wait
    bool feasible = true;      // false when denominator <= 0 or mean_wait < 0
    bool wait_defined = true;  // false when lambda2 == 0
};

/// Heavy-traffic style approximation of the class-2 backlog and its mean
/// wait E[n2]/lambda2 - 1/(mu2 P_0). Out-of-range outputs are flagged,
/// never clamped.
Class2Metrics class2_approx(const SystemParams& p);

}  // namespace crq
