#pragma once

#include <cstdint>
#include <span>

namespace crq {

/// Batch-means summary: mean of the batch means and a normal-theory 95%
/// interval mean +- 1.96 s / sqrt(k).
struct Summary {
    double mean = 0.0;
    double std_dev = 0.0;  // sample standard deviation of the batch means
    double half_width = 0.0;
    std::size_t batches = 0;

    double lo() const { return mean - half_width; }
    double hi() const { return mean + half_width; }
};

inline constexpr std::size_t kMinBatches = 10;
inline constexpr double kZ95 = 1.96;

/// Throws std::invalid_argument with fewer than kMinBatches values.
Summary summarize(std::span<const double> batch_means);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Wilson score interval for a binomial proportion; well defined at zero
/// and full counts, where batch means collapse to a zero-width interval.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95);

}  // namespace crq
