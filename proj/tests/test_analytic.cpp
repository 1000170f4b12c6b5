#include "crq/analytic.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

using namespace crq;

namespace {

SystemParams class1(double l1, double m1, double g, int n1) {
    SystemParams p;
    p.lambda1 = l1;
    p.mu1 = m1;
    p.gamma = g;
    p.n1_cap = n1;
    return p;
}

SystemParams fig8(double l1, double l2) {
    SystemParams p = class1(l1, 500.0, 100.0, 100);
    p.lambda2 = l2;
    p.mu2 = 100.0;
    p.omega = 0.01;
    return p;
}

}  // namespace

TEST_CASE("renege rate") {
    CHECK(renege_rate(0, 5.0) == 0.0);
    CHECK(renege_rate(1, 5.0) == 0.0);
    CHECK(renege_rate(3, 2.0) == 4.0);
    CHECK_THROWS_AS(renege_rate(-1, 1.0), std::invalid_argument);
}

TEST_CASE("steady state: hand-computed cases") {
    SteadyState idle = class1_steady_state(class1(0.0, 1.0, 1.0, 5));
    CHECK(idle.empty() == 1.0);
    for (std::size_t n = 1; n < idle.probs.size(); ++n) {
        CHECK(idle.probs[n] == 0.0);
    }

    SteadyState flat = class1_steady_state(class1(3.0, 3.0, 0.0, 4));
    REQUIRE(flat.probs.size() == 5);
    for (double v : flat.probs) {
        CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
    }

    SteadyState small = class1_steady_state(class1(1.0, 1.0, 1.0, 2));
    CHECK(small.probs[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(small.probs[1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(small.probs[2] == doctest::Approx(0.2).epsilon(1e-15));
    // one more step of the product: P3 = P2 * 1/(1+2)
    CHECK(small.overflow == doctest::Approx(0.2 / 3.0).epsilon(1e-14));
    CHECK(small.blocking() == small.probs.back());
}

TEST_CASE("metrics from the (0.4, 0.4, 0.2) state") {
    const SystemParams p = class1(1.0, 1.0, 1.0, 2);
    const Class1Metrics m = class1_metrics(p, class1_steady_state(p), 0.0, 0.0);
    CHECK(m.mean_len == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(m.mean_wait == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(m.mean_queue_len == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(m.abandon_prob == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(m.reneging_prob == m.overflow_prob);

    const Class1Metrics withp = class1_metrics(p, class1_steady_state(p), 0.5, 0.125);
    CHECK(withp.reneging_prob == m.overflow_prob + 0.125);
    CHECK(withp.total_wait == doctest::Approx(1.3));

    const SystemParams idle = class1(0.0, 1.0, 1.0, 3);
    const Class1Metrics z = class1_metrics(idle, class1_steady_state(idle), 0.25, 0.0);
    CHECK(z.lambda_zero);
    CHECK(z.mean_len == 0.0);
    CHECK(z.mean_wait == 0.0);
    CHECK(z.total_wait == 0.25);
}

TEST_CASE("normalization and detailed balance") {
    for (const SystemParams& p : {class1(1, 2, 1, 10), class1(50, 160, 100, 100), class1(0.5, 1, 0, 20),
                                  class1(5, 2, 3, 15), class1(100, 160, 100, 50), class1(8000, 10, 100, 100)}) {
        const SteadyState ss = class1_steady_state(p);
        const double sum = std::accumulate(ss.probs.begin(), ss.probs.end(), 0.0);
        CHECK(std::abs(sum - 1.0) < 1e-12);
        for (int n = 1; n <= p.n1_cap; ++n) {
            const double lhs = p.lambda1 * ss.probs[n - 1];
            const double rhs = (p.mu1 + (n - 1) * p.gamma) * ss.probs[n];
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs));
            CHECK(ss.probs[n] >= 0.0);
            CHECK(ss.probs[n] <= 1.0);
        }
        const Class1Metrics m = class1_metrics(p, ss, 0.0, 0.0);
        CHECK(m.mean_len >= 0.0);
        CHECK(m.mean_len <= p.n1_cap);
        CHECK(m.mean_wait == doctest::Approx(m.mean_len / p.lambda1).epsilon(1e-15));
    }
}

TEST_CASE("log-space products survive heavy load") {
    const SteadyState ss = class1_steady_state(class1(1e6, 1.0, 0.01, 100));
    CHECK(std::isfinite(ss.overflow));
    CHECK(ss.empty() >= 0.0);
    CHECK(ss.probs.back() > 0.5);
}

TEST_CASE("M/M/1 limit") {
    const SteadyState ss = class1_steady_state(class1(1.0, 2.0, 0.0, 200));
    CHECK(std::abs(ss.empty() - 0.5) < 1e-9);
}

TEST_CASE("P0 is monotone in every rate") {
    double prev = 1.0;
    for (double l1 = 5; l1 <= 200; l1 += 5) {
        const double p0 = class1_steady_state(class1(l1, 100, 50, 40)).empty();
        CHECK(p0 < prev);
        prev = p0;
    }
    prev = 0.0;
    for (double m1 = 10; m1 <= 300; m1 += 10) {
        const double p0 = class1_steady_state(class1(100, m1, 50, 40)).empty();
        CHECK(p0 > prev);
        prev = p0;
    }
    prev = 0.0;
    for (double g = 1; g <= 200; g += 7) {
        const double p0 = class1_steady_state(class1(100, 60, g, 40)).empty();
        CHECK(p0 > prev);
        prev = p0;
    }
}

TEST_CASE("overflow decreases with capacity") {
    double prev = INFINITY;
    for (int n1 = 1; n1 <= 120; ++n1) {
        const double ov = class1_steady_state(class1(8000, 100, 100, n1)).overflow;
        CHECK(ov < prev);
        prev = ov;
    }
    // The one-step extension is not a probability under heavy load with a tiny buffer.
    CHECK(class1_steady_state(class1(8000, 100, 100, 1)).overflow > 1.0);
}

TEST_CASE("class-2 approximation: golden values at the fig8 scenario setup") {
    const Class2Metrics a = class2_approx(fig8(50, 10));
    CHECK(a.d == doctest::Approx(0.01 * std::exp(-0.18)).epsilon(1e-14));
    CHECK(a.d == doctest::Approx(0.0083527021141127202).epsilon(1e-14));
    CHECK(a.mean_num == doctest::Approx(0.12483489479714273).epsilon(1e-12));
    CHECK(a.mean_wait == doctest::Approx(0.0013938099912221887).epsilon(1e-12));
    CHECK(a.p0 == doctest::Approx(0.90173931630550192).epsilon(1e-13));
    CHECK(a.feasible);
    CHECK(a.wait_defined);

    const Class2Metrics b = class2_approx(fig8(100, 30));
    CHECK(b.d == doctest::Approx(0.034085751558648454).epsilon(1e-14));
    CHECK(b.mean_num == doctest::Approx(0.56084501000393884).epsilon(1e-12));
    CHECK(b.mean_wait == doctest::Approx(0.0063071948366271047).epsilon(1e-12));
    CHECK(b.p0 == doctest::Approx(0.80725634134927996).epsilon(1e-13));

    CHECK(class2_approx(fig8(50, 30)).mean_wait == doctest::Approx(0.0055030545469599832).epsilon(1e-12));
    CHECK(class2_approx(fig8(100, 10)).mean_wait == doctest::Approx(0.0011728797745737503).epsilon(1e-12));
}

TEST_CASE("class-2 wait grows with class-1 load") {
    CHECK(class2_approx(fig8(50, 10)).mean_wait < class2_approx(fig8(100, 30)).mean_wait);
    for (double l2 : {30.0, 40.0, 50.0}) {
        double prev = 0.0;
        for (double l1 = 10; l1 <= 100; l1 += 5) {
            const Class2Metrics m = class2_approx(fig8(l1, l2));
            CHECK(m.feasible);
            CHECK(m.mean_wait > prev);
            prev = m.mean_wait;
        }
    }
}

TEST_CASE("class-2 wait at light class-2 load is not monotone in lambda1") {
    // At lambda2 = 10 the subtracted 1/(mu2 P0) term outgrows E[n2]/lambda2.
    const double w60 = class2_approx(fig8(60, 10)).mean_wait;
    CHECK(class2_approx(fig8(10, 10)).mean_wait < w60);
    CHECK(class2_approx(fig8(100, 10)).mean_wait < w60);
}

TEST_CASE("class-2 edge cases are flagged, never clamped") {
    const Class2Metrics none = class2_approx(fig8(50, 0));
    CHECK(none.mean_num == 0.0);
    CHECK_FALSE(none.wait_defined);
    CHECK(std::isnan(none.mean_wait));

    SystemParams sat = fig8(400, 90);
    const Class2Metrics s = class2_approx(sat);
    CHECK(s.denominator <= 0.0);
    CHECK_FALSE(s.feasible);

    SystemParams bad = fig8(50, 10);
    bad.omega = 0.0;
    CHECK_THROWS_AS(class2_approx(bad), std::invalid_argument);
}
