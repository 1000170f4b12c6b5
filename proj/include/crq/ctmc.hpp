#pragma once

#include "crq/params.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace crq {

struct CtmcOptions {
    std::size_t max_states = 1'000'000;
    std::size_t direct_limit = 200'000;  // above this, power iteration
    int max_iterations = 2'000'000;
    double iteration_tol = 1e-15;
};

/// Generator of the joint (class-1, class-2) occupancy chain, truncated at
/// i = n1_cap (the real class-1 capacity) and j = j_max (arrivals into the
/// frontier are dropped so the generator stays conservative).
class CtmcModel {
public:
    CtmcModel(const SystemParams& p, int j_max, const CtmcOptions& opts = {});

    int i_max() const { return i_max_; }
    int j_max() const { return j_max_; }
    std::size_t size() const { return static_cast<std::size_t>(i_max_ + 1) * (j_max_ + 1); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * (j_max_ + 1) + static_cast<std::size_t>(j);
    }
    /// Off-diagonal rate from (i,j) to (k,l); zero when no transition exists.
    double rate(int i, int j, int k, int l) const;
    double outflow(int i, int j) const;

    const SystemParams& params() const { return params_; }
    /// Row-major generator: rows sum to zero.
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& generator() const { return q_; }

private:
    SystemParams params_;
    int i_max_;
    int j_max_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> q_;
};

CtmcModel build_ctmc(const SystemParams& p, int j_max, const CtmcOptions& opts = {});

struct StationaryDist {
    int i_max = 0;
    int j_max = 0;
    std::vector<double> pij;  // row-major over (i, j)
    double boundary_mass = 0.0;  // probability on j == j_max
    double residual = 0.0;       // max |(pi Q)_k|
    double clamped_mass = 0.0;   // total negative mass zeroed after the solve
    bool direct = true;
    int iterations = 0;

    double at(int i, int j) const {
        return pij[static_cast<std::size_t>(i) * (j_max + 1) + static_cast<std::size_t>(j)];
    }
};

/// Solves pi Q = 0, sum pi = 1. Sparse LU for small chains, power iteration
/// on the uniformized chain otherwise. Throws std::runtime_error on a
/// singular system or non-convergence.
StationaryDist solve_stationary(const CtmcModel& m, const CtmcOptions& opts = {});

struct AdaptiveSolve {
    StationaryDist dist;
    int j_max = 0;
    bool reached_tolerance = false;
};

/// Starts at j_max = start and doubles until the frontier mass drops below
/// boundary_tol, the state cap would be exceeded, or a doubling leaves the
/// frontier mass above 90% of its previous value (class 2 overloaded).
AdaptiveSolve solve_truncated(const SystemParams& p, double boundary_tol = 1e-9, int start = 64,
                              const CtmcOptions& opts = {});

std::vector<double> marginal_class1(const StationaryDist& d);
std::vector<double> marginal_class2(const StationaryDist& d);

struct CtmcMetrics {
    double mean_n1 = 0.0;
    double mean_n2 = 0.0;
    double mean_queue1 = 0.0;  // waiting class-1 packets, E[(n1-1)+]
    double mean_queue2 = 0.0;  // class-2 packets not in service
    double empty1 = 0.0;       // P(n1 = 0)
    double empty_all = 0.0;    // P(0, 0)
    double blocking1 = 0.0;    // P(n1 = n1_cap)
    double wait1 = 0.0;        // mean_n1 / lambda1
    double queue_wait1 = 0.0;  // mean_queue1 / lambda1
    double sojourn1 = 0.0;     // mean_n1 over admitted class-1 rate
    double throughput1 = 0.0;  // served class-1 rate: admitted minus abandoned
    double wait2 = 0.0;        // mean_n2 over admitted class-2 rate
    double queue_wait2 = 0.0;  // mean_queue2 over admitted class-2 rate
    bool trusted = true;       // false when boundary mass exceeds the tolerance
};

CtmcMetrics ctmc_metrics(const StationaryDist& d, const SystemParams& p, double boundary_tol = 1e-9);

/// Global-balance residuals grouped by the four state families
/// (0,0), (0,j>0), (i>0,0), (i>0,j>0).
struct BalanceResidual {
    double max_abs = 0.0;
    std::array<double, 4> family{};
};

BalanceResidual balance_residual(const std::vector<double>& pi, const CtmcModel& m);
inline BalanceResidual balance_residual(const StationaryDist& d, const CtmcModel& m) {
    return balance_residual(d.pij, m);
}

/// The four balance-equation families in their closed textbook form, with
/// class-1 departure rate mu1 + (i-1) gamma on the (i+1) inflow and the
/// interior departure inflow taken from (i, j+1) with no mu2 term, evaluated on interior states (i < i_max, j < j_max) where every
/// referenced neighbour exists.
struct ClosedFormBalanceAudit {
    std::array<double, 4> max_abs{};  // families (0,0), (0,j), (i,0), (i,j)
    std::array<int, 4> states{};
    std::array<bool, 4> satisfied{};
    // Same families with the departure inflow read from (i+1, j) at rate
    // mu1 + i gamma, the reading implied by the transition structure.
    std::array<double, 4> corrected_max_abs{};
    std::array<bool, 4> corrected_satisfied{};
};

ClosedFormBalanceAudit audit_closed_form_balance(const StationaryDist& d, const SystemParams& p,
                                                 double tol = 1e-10);

/// (i, j, prob) rows with a header line.
void write_distribution_csv(std::ostream& os, const StationaryDist& d);

}  // namespace crq
