#include "crq/analytic.hpp"
#include "crq/ctmc.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

using namespace crq;

namespace {

SystemParams point(double l1, double m1, double g, int n1, double l2 = 0.0, double m2 = 1.0) {
    SystemParams p;
    p.lambda1 = l1;
    p.mu1 = m1;
    p.gamma = g;
    p.n1_cap = n1;
    p.lambda2 = l2;
    p.mu2 = m2;
    return p;
}

}  // namespace

TEST_CASE("generator pattern") {
    const SystemParams p = point(1.5, 2.0, 0.5, 4, 0.7, 3.0);
    const CtmcModel m = build_ctmc(p, 6);
    CHECK(m.size() == 5u * 7u);
    CHECK(m.outflow(0, 0) == doctest::Approx(1.5 + 0.7));
    CHECK(m.rate(1, 0, 0, 0) == 2.0);
    CHECK(m.rate(0, 1, 0, 0) == 3.0);
    CHECK(m.rate(3, 2, 2, 2) == doctest::Approx(2.0 + 2 * 0.5));
    CHECK(m.rate(2, 3, 2, 2) == 0.0);
    CHECK(m.rate(4, 0, 5, 0) == 0.0);
    CHECK(m.rate(0, 6, 0, 7) == 0.0);
    CHECK(m.rate(1, 1, 1, 2) == 0.7);

    const auto& q = m.generator();
    for (int k = 0; k < q.outerSize(); ++k) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(q, k); it; ++it) {
            if (it.col() != k) {
                CHECK(it.value() >= 0.0);
            }
            sum += it.value();
        }
        CHECK(std::abs(sum) < 1e-12);
    }
    CHECK_THROWS_AS(build_ctmc(p, 0), std::invalid_argument);
}

TEST_CASE("state cap") {
    CtmcOptions o;
    o.max_states = 1000;
    CHECK_THROWS_AS(build_ctmc(point(1, 2, 1, 100, 0.5, 1), 64, o), std::length_error);
}

TEST_CASE("without class-2 traffic the class-1 marginal is the birth-death law") {
    for (const SystemParams& p : {point(1, 2, 1, 10), point(50, 160, 100, 100), point(0.5, 1, 0, 20),
                                  point(5, 2, 3, 15), point(100, 160, 100, 50)}) {
        const AdaptiveSolve s = solve_truncated(p);
        CHECK(s.reached_tolerance);
        CHECK(s.dist.residual < 1e-10);
        const auto m = marginal_class1(s.dist);
        CHECK(std::abs(std::accumulate(m.begin(), m.end(), 0.0) - 1.0) < 1e-12);
        const SteadyState ss = class1_steady_state(p);
        for (std::size_t i = 0; i < m.size(); ++i) {
            CHECK(std::abs(m[i] - ss.probs[i]) < 1e-10);
        }
        const CtmcMetrics cm = ctmc_metrics(s.dist, p);
        CHECK(cm.mean_n2 == 0.0);
        CHECK(cm.mean_n1 == doctest::Approx(class1_metrics(p, ss, 0, 0).mean_len).epsilon(1e-10));
    }
}

TEST_CASE("without class-1 traffic class 2 is a truncated M/M/1") {
    const SystemParams p = point(0.0, 1.0, 1.0, 3, 0.4, 1.0);
    const CtmcModel m = build_ctmc(p, 30);
    const StationaryDist d = solve_stationary(m);
    const auto mj = marginal_class2(d);
    const double rho = 0.4;
    const double norm = (1 - std::pow(rho, 31)) / (1 - rho);
    for (int j = 0; j <= 30; ++j) {
        CHECK(std::abs(mj[j] - std::pow(rho, j) / norm) < 1e-13);
    }
}

TEST_CASE("class-2 traffic leaves the class-1 marginal unchanged") {
    const SystemParams base = point(1, 2, 1, 10, 0.0, 2.0);
    SystemParams loaded = base;
    loaded.lambda2 = 1.0;
    const AdaptiveSolve a = solve_truncated(base);
    const AdaptiveSolve b = solve_truncated(loaded);
    const auto ma = marginal_class1(a.dist);
    const auto mb = marginal_class1(b.dist);
    for (std::size_t i = 0; i < ma.size(); ++i) {
        CHECK(std::abs(ma[i] - mb[i]) < 1e-8 + b.dist.boundary_mass);
    }
}

TEST_CASE("balance residuals") {
    const SystemParams p = point(1, 1, 0, 2, 1, 1);
    const CtmcModel m = build_ctmc(p, 2);
    const std::vector<double> uniform(9, 1.0 / 9.0);
    CHECK(balance_residual(uniform, m).max_abs > 0.0);

    const SystemParams q = point(2, 3, 0.5, 8, 0.5, 2);
    const CtmcModel mq = build_ctmc(q, 40);
    const StationaryDist d = solve_stationary(mq);
    const BalanceResidual r = balance_residual(d, mq);
    CHECK(r.max_abs < 1e-10);
    std::vector<double> bumped = d.pij;
    bumped[mq.index(2, 3)] += 1e-3;
    const double rb = balance_residual(bumped, mq).max_abs;
    CHECK(rb > 1e-4);
    CHECK(rb < 1e-1);
}

TEST_CASE("truncation doubling converges") {
    const SystemParams p = point(1, 2, 1, 10, 0.9, 2.0);
    const AdaptiveSolve s = solve_truncated(p, 1e-9, 8);
    CHECK(s.reached_tolerance);
    CHECK(s.j_max > 8);
    CHECK(s.dist.boundary_mass < 1e-9);
    const StationaryDist twice = solve_stationary(build_ctmc(p, 2 * s.j_max));
    const CtmcMetrics a = ctmc_metrics(s.dist, p);
    const CtmcMetrics b = ctmc_metrics(twice, p);
    const double bound = 10 * s.dist.boundary_mass + 1e-12;
    CHECK(std::abs(a.mean_n1 - b.mean_n1) < bound);
    CHECK(std::abs(a.empty_all - b.empty_all) < bound);
    CHECK(std::abs(a.mean_n2 - b.mean_n2) < 10 * s.dist.boundary_mass * 2 * s.j_max + 1e-10);
}

TEST_CASE("power iteration agrees with the direct solve") {
    const SystemParams p = point(1, 2, 1, 6, 0.5, 2.0);
    const CtmcModel m = build_ctmc(p, 30);
    const StationaryDist direct = solve_stationary(m);
    CtmcOptions o;
    o.direct_limit = 10;
    const StationaryDist power = solve_stationary(m, o);
    CHECK(direct.direct);
    CHECK_FALSE(power.direct);
    CHECK(power.iterations > 0);
    for (std::size_t k = 0; k < direct.pij.size(); ++k) {
        CHECK(std::abs(direct.pij[k] - power.pij[k]) < 1e-10);
    }
}

TEST_CASE("overloaded class 2 stops the doubling early") {
    // mu2 * P(n1 = 0) is about 1.16 here, below lambda2
    const SystemParams p = point(1, 2, 1, 10, 1.5, 2.0);
    const AdaptiveSolve s = solve_truncated(p);
    CHECK_FALSE(s.reached_tolerance);
    CHECK(s.j_max <= 256);
    CHECK(s.dist.boundary_mass > 0.1);
    CHECK_FALSE(ctmc_metrics(s.dist, p).trusted);
}

TEST_CASE("untrusted when the frontier keeps mass") {
    const SystemParams p = point(1, 2, 1, 5, 1.9, 2.0);
    const StationaryDist d = solve_stationary(build_ctmc(p, 4));
    CHECK(d.boundary_mass > 1e-9);
    CHECK_FALSE(ctmc_metrics(d, p).trusted);
}

TEST_CASE("closed-form balance families audit") {
    const SystemParams plain = point(1, 2, 0, 6, 0.0, 2.0);
    const ClosedFormBalanceAudit ok = audit_closed_form_balance(solve_truncated(plain).dist, plain);
    CHECK(ok.satisfied[0]);
    CHECK(ok.satisfied[1]);
    CHECK(ok.satisfied[2]);
    CHECK(ok.satisfied[3]);

    const SystemParams reneging = point(1, 2, 1, 6, 0.0, 2.0);
    const ClosedFormBalanceAudit r = audit_closed_form_balance(solve_truncated(reneging).dist, reneging);
    CHECK(r.satisfied[0]);
    CHECK_FALSE(r.satisfied[2]);

    const SystemParams both = point(1, 2, 0, 6, 0.5, 2.0);
    const ClosedFormBalanceAudit b = audit_closed_form_balance(solve_truncated(both).dist, both);
    CHECK_FALSE(b.satisfied[3]);
    CHECK(b.states[3] > 0);

    const SystemParams full = point(1, 2, 1, 6, 0.5, 2.0);
    const ClosedFormBalanceAudit c = audit_closed_form_balance(solve_truncated(full).dist, full);
    for (int f = 0; f < 4; ++f) {
        CHECK(c.corrected_satisfied[f]);
    }
    CHECK_FALSE(c.satisfied[2]);
    CHECK_FALSE(c.satisfied[3]);
}

TEST_CASE("distribution dump") {
    const SystemParams p = point(1, 2, 1, 2, 0.5, 2.0);
    const StationaryDist d = solve_stationary(build_ctmc(p, 3));
    std::ostringstream os;
    write_distribution_csv(os, d);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "i,j,prob");
    int rows = 0;
    double sum = 0.0;
    while (std::getline(in, line)) {
        ++rows;
        sum += std::stod(line.substr(line.rfind(',') + 1));
    }
    CHECK(rows == 12);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
}
