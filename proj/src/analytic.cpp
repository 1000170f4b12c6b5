#include "crq/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crq {

double renege_rate(int n, double gamma) {
    if (n < 0) {
        throw std::invalid_argument("renege_rate: n must be >= 0");
    }
    return n == 0 ? 0.0 : (n - 1) * gamma;
}

SteadyState class1_steady_state(const SystemParams& p) {
    validate(p);
    const int cap = p.n1_cap;
    SteadyState ss;
    ss.probs.assign(static_cast<std::size_t>(cap) + 1, 0.0);
    if (p.lambda1 == 0.0) {
        ss.probs[0] = 1.0;
        return ss;
    }

    // log of the unnormalized weight lambda1^n / prod_{i=1..n}(mu1 + (i-1) gamma)
    std::vector<double> log_w(static_cast<std::size_t>(cap) + 2, 0.0);
    const double log_lambda = std::log(p.lambda1);
    for (int n = 1; n <= cap + 1; ++n) {
        log_w[n] = log_w[n - 1] + log_lambda - std::log(p.mu1 + (n - 1) * p.gamma);
    }
    const double peak = *std::max_element(log_w.begin(), log_w.begin() + cap + 1);
    double norm = 0.0;
    for (int n = 0; n <= cap; ++n) {
        norm += std::exp(log_w[n] - peak);
    }
    const double log_norm = peak + std::log(norm);
    for (int n = 0; n <= cap; ++n) {
        ss.probs[n] = std::exp(log_w[n] - log_norm);
    }
    ss.overflow = std::exp(log_w[cap + 1] - log_norm);

    for (double v : ss.probs) {
        if (!std::isfinite(v)) {
            throw std::overflow_error("class1_steady_state: non-finite probability");
        }
    }
    if (!std::isfinite(ss.overflow)) {
        throw std::overflow_error("class1_steady_state: non-finite overflow probability");
    }
    return ss;
}

Class1Metrics class1_metrics(const SystemParams& p, const SteadyState& ss, double e_t,
                             double p_out) {
    Class1Metrics m;
    m.empty_prob = ss.empty();
    for (std::size_t n = 1; n < ss.probs.size(); ++n) {
        m.mean_len += static_cast<double>(n) * ss.probs[n];
        m.mean_queue_len += static_cast<double>(n - 1) * ss.probs[n];
    }
    m.overflow_prob = ss.overflow;
    m.blocking_prob = ss.blocking();
    m.reneging_prob = m.overflow_prob + p_out;
    if (p.lambda1 > 0.0) {
        m.mean_wait = m.mean_len / p.lambda1;
        m.mean_queue_wait = m.mean_queue_len / p.lambda1;
        m.abandon_prob = p.gamma * m.mean_queue_len / p.lambda1;
    } else {
        m.lambda_zero = true;
    }
    m.total_wait = e_t + m.mean_wait;
    return m;
}

Class2Metrics class2_approx(const SystemParams& p) {
    validate(p);
    if (!(p.omega > 0.0)) {
        throw std::invalid_argument("class2_approx: omega must be > 0");
    }
    const double r1 = p.rho1();
    const double r2 = p.rho2();
    const double mu1w = p.mu1 * p.omega;

    Class2Metrics m;
    m.d = r1 * r1 * std::exp((r1 - 1.0) / mu1w);
    m.denominator = (1.0 - r1) - r2 * (1.0 - m.d);
    const double first_num = p.mu2 * r2 * (r1 - (1.0 - r1) * ((1.0 + r1) * mu1w + 3.0) * m.d - m.d * m.d);
    const double first_den = p.mu1 * (1.0 - r1) * m.denominator * (1.0 - m.d);
    const double first = r2 == 0.0 ? 0.0 : first_num / first_den;
    const double second = r2 == 0.0 ? 0.0 : r2 * (1.0 - m.d) / m.denominator;
    m.mean_num = first + second;
    m.p0 = class1_steady_state(p).empty();
    m.feasible = m.denominator > 0.0 && std::isfinite(m.mean_num);

    if (p.lambda2 > 0.0) {
        m.mean_wait = m.mean_num / p.lambda2 - 1.0 / (p.mu2 * m.p0);
        if (!(m.mean_wait >= 0.0)) {
            m.feasible = false;
        }
    } else {
        m.wait_defined = false;
        m.mean_wait = std::numeric_limits<double>::quiet_NaN();
    }
    return m;
}

}  // namespace crq
