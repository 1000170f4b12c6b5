#include "crq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crq {

Summary summarize(std::span<const double> batch_means) {
    if (batch_means.size() < kMinBatches) {
        throw std::invalid_argument("summarize: need at least 10 batches");
    }
    Summary s;
    s.batches = batch_means.size();
    const auto k = static_cast<double>(s.batches);
    double sum = 0.0;
    for (double v : batch_means) {
        sum += v;
    }
    s.mean = sum / k;
    double ss = 0.0;
    for (double v : batch_means) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.std_dev = std::sqrt(ss / (k - 1.0));
    s.half_width = kZ95 * s.std_dev / std::sqrt(k);
    return s;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0 || successes > trials) {
        throw std::invalid_argument("wilson_interval: need 0 <= successes <= trials, trials > 0");
    }
    const auto n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace crq
