#include "crq/ctmc.hpp"

#include "crq/analytic.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace crq {

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using ColMatrix = Eigen::SparseMatrix<double>;

int family_of(int i, int j) { return (i > 0 ? 2 : 0) + (j > 0 ? 1 : 0); }

}  // namespace

CtmcModel::CtmcModel(const SystemParams& p, int j_max, const CtmcOptions& opts)
    : params_(p), i_max_(p.n1_cap), j_max_(j_max) {
    validate(p);
    if (j_max < 1) {
        throw std::invalid_argument("build_ctmc: j_max must be >= 1");
    }
    if (size() > opts.max_states) {
        throw std::length_error("build_ctmc: state space of " + std::to_string(size()) +
                                " exceeds cap " + std::to_string(opts.max_states));
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(size() * 5);
    for (int i = 0; i <= i_max_; ++i) {
        for (int j = 0; j <= j_max_; ++j) {
            const auto from = static_cast<Eigen::Index>(index(i, j));
            double out = 0.0;
            auto add = [&](int k, int l, double r) {
                if (r > 0.0) {
                    triplets.emplace_back(from, static_cast<Eigen::Index>(index(k, l)), r);
                    out += r;
                }
            };
            if (i < i_max_) {
                add(i + 1, j, p.lambda1);
            }
            if (j < j_max_) {
                add(i, j + 1, p.lambda2);
            }
            if (i >= 1) {
                add(i - 1, j, p.mu1 + renege_rate(i, p.gamma));
            }
            if (i == 0 && j >= 1) {
                add(i, j - 1, p.mu2);
            }
            triplets.emplace_back(from, from, -out);
        }
    }
    q_.resize(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
    q_.setFromTriplets(triplets.begin(), triplets.end());
    q_.makeCompressed();
}

double CtmcModel::rate(int i, int j, int k, int l) const {
    if (i == k && j == l) {
        return 0.0;
    }
    return q_.coeff(static_cast<Eigen::Index>(index(i, j)), static_cast<Eigen::Index>(index(k, l)));
}

double CtmcModel::outflow(int i, int j) const {
    const auto k = static_cast<Eigen::Index>(index(i, j));
    return -q_.coeff(k, k);
}

CtmcModel build_ctmc(const SystemParams& p, int j_max, const CtmcOptions& opts) {
    return CtmcModel(p, j_max, opts);
}

namespace {

std::vector<double> solve_direct(const CtmcModel& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    // A = Q^T with the equation of state (0,0) replaced by pi(0,0) = 1;
    // the caller normalizes. A dense sum row would wreck the LU fill.
    ColMatrix qt = ColMatrix(m.generator().transpose());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(qt.nonZeros()) + 1);
    for (Eigen::Index col = 0; col < qt.outerSize(); ++col) {
        for (ColMatrix::InnerIterator it(qt, col); it; ++it) {
            if (it.row() != 0) {
                triplets.emplace_back(it.row(), it.col(), it.value());
            }
        }
    }
    triplets.emplace_back(0, 0, 1.0);
    ColMatrix a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();

    Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error("solve_stationary: singular system (" + lu.lastErrorMessage() + ")");
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw std::runtime_error("solve_stationary: sparse solve failed");
    }
    return {x.data(), x.data() + n};
}

std::vector<double> solve_power(const CtmcModel& m, const CtmcOptions& opts, int& iterations) {
    const RowMatrix& q = m.generator();
    const auto n = static_cast<Eigen::Index>(m.size());
    double lambda = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        lambda = std::max(lambda, -q.coeff(k, k));
    }
    if (!(lambda > 0.0)) {
        throw std::runtime_error("solve_stationary: generator has no transitions");
    }
    // pi <- pi (I + Q / Lambda)
    const ColMatrix qt = ColMatrix(q.transpose()) / lambda;
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
    pi(0) = 1.0;
    for (iterations = 1; iterations <= opts.max_iterations; ++iterations) {
        Eigen::VectorXd next = pi + qt * pi;
        next /= next.sum();
        const double delta = (next - pi).lpNorm<1>();
        pi.swap(next);
        if (delta < opts.iteration_tol) {
            return {pi.data(), pi.data() + n};
        }
    }
    throw std::runtime_error("solve_stationary: power iteration did not converge");
}

}  // namespace

StationaryDist solve_stationary(const CtmcModel& m, const CtmcOptions& opts) {
    StationaryDist d;
    d.i_max = m.i_max();
    d.j_max = m.j_max();
    if (m.size() <= opts.direct_limit) {
        d.pij = solve_direct(m);
        d.direct = true;
    } else {
        d.pij = solve_power(m, opts, d.iterations);
        d.direct = false;
    }

    double total = 0.0;
    for (double& v : d.pij) {
        if (v < 0.0) {
            d.clamped_mass += -v;
            v = 0.0;
        }
        total += v;
    }
    for (double& v : d.pij) {
        v /= total;
    }
    for (int i = 0; i <= d.i_max; ++i) {
        d.boundary_mass += d.at(i, d.j_max);
    }
    d.residual = balance_residual(d.pij, m).max_abs;
    return d;
}

AdaptiveSolve solve_truncated(const SystemParams& p, double boundary_tol, int start,
                              const CtmcOptions& opts) {
    AdaptiveSolve out;
    int j_max = std::max(1, start);
    double previous_mass = -1.0;
    while (true) {
        const CtmcModel model(p, j_max, opts);
        out.dist = solve_stationary(model, opts);
        out.j_max = j_max;
        if (out.dist.boundary_mass < boundary_tol) {
            out.reached_tolerance = true;
            return out;
        }
        const std::size_t next = static_cast<std::size_t>(p.n1_cap + 1) * (2 * j_max + 1);
        if (next > opts.max_states) {
            return out;
        }
        // A frontier that keeps its mass after doubling means the class-2
        // backlog does not decay (overloaded class 2); more states will not help.
        if (previous_mass >= 0.0 && out.dist.boundary_mass > 0.9 * previous_mass) {
            return out;
        }
        previous_mass = out.dist.boundary_mass;
        j_max *= 2;
    }
}

std::vector<double> marginal_class1(const StationaryDist& d) {
    std::vector<double> out(static_cast<std::size_t>(d.i_max) + 1, 0.0);
    for (int i = 0; i <= d.i_max; ++i) {
        for (int j = 0; j <= d.j_max; ++j) {
            out[i] += d.at(i, j);
        }
    }
    return out;
}

std::vector<double> marginal_class2(const StationaryDist& d) {
    std::vector<double> out(static_cast<std::size_t>(d.j_max) + 1, 0.0);
    for (int i = 0; i <= d.i_max; ++i) {
        for (int j = 0; j <= d.j_max; ++j) {
            out[j] += d.at(i, j);
        }
    }
    return out;
}

CtmcMetrics ctmc_metrics(const StationaryDist& d, const SystemParams& p, double boundary_tol) {
    CtmcMetrics m;
    double frontier2 = 0.0;
    for (int i = 0; i <= d.i_max; ++i) {
        for (int j = 0; j <= d.j_max; ++j) {
            const double pr = d.at(i, j);
            m.mean_n1 += i * pr;
            m.mean_n2 += j * pr;
            m.mean_queue1 += std::max(i - 1, 0) * pr;
            m.mean_queue2 += (i == 0 && j > 0 ? j - 1 : j) * pr;
            if (i == 0) {
                m.empty1 += pr;
            }
            if (i == d.i_max) {
                m.blocking1 += pr;
            }
            if (j == d.j_max) {
                frontier2 += pr;
            }
        }
    }
    m.empty_all = d.at(0, 0);
    if (p.lambda1 > 0.0) {
        const double admitted = p.lambda1 * (1.0 - m.blocking1);
        m.wait1 = m.mean_n1 / p.lambda1;
        m.queue_wait1 = m.mean_queue1 / p.lambda1;
        m.sojourn1 = admitted > 0.0 ? m.mean_n1 / admitted : 0.0;
        m.throughput1 = admitted - p.gamma * m.mean_queue1;
    }
    if (p.lambda2 > 0.0) {
        const double admitted = p.lambda2 * (1.0 - frontier2);
        m.wait2 = m.mean_n2 / admitted;
        m.queue_wait2 = m.mean_queue2 / admitted;
    }
    m.trusted = d.boundary_mass <= boundary_tol;
    return m;
}

BalanceResidual balance_residual(const std::vector<double>& pi, const CtmcModel& m) {
    if (pi.size() != m.size()) {
        throw std::invalid_argument("balance_residual: size mismatch");
    }
    const auto& q = m.generator();
    std::vector<double> flow(pi.size(), 0.0);
    for (Eigen::Index row = 0; row < q.outerSize(); ++row) {
        for (RowMatrix::InnerIterator it(q, row); it; ++it) {
            flow[static_cast<std::size_t>(it.col())] += pi[static_cast<std::size_t>(row)] * it.value();
        }
    }
    BalanceResidual r;
    for (int i = 0; i <= m.i_max(); ++i) {
        for (int j = 0; j <= m.j_max(); ++j) {
            const double v = std::abs(flow[m.index(i, j)]);
            auto& fam = r.family[static_cast<std::size_t>(family_of(i, j))];
            fam = std::max(fam, v);
            r.max_abs = std::max(r.max_abs, v);
        }
    }
    return r;
}

ClosedFormBalanceAudit audit_closed_form_balance(const StationaryDist& d, const SystemParams& p,
                                                 double tol) {
    ClosedFormBalanceAudit a;
    const double l1 = p.lambda1;
    const double l2 = p.lambda2;
    const double m1 = p.mu1;
    const double m2 = p.mu2;
    auto record = [&a](int fam, double lhs, double rhs) {
        a.max_abs[fam] = std::max(a.max_abs[fam], std::abs(lhs - rhs));
        ++a.states[fam];
    };
    auto record_corrected = [&a](int fam, double lhs, double rhs) {
        a.corrected_max_abs[fam] = std::max(a.corrected_max_abs[fam], std::abs(lhs - rhs));
    };
    for (int i = 0; i < d.i_max; ++i) {
        for (int j = 0; j < d.j_max; ++j) {
            const double dep = m1 + (i - 1) * p.gamma;
            const double up = m1 + i * p.gamma;
            if (i == 0 && j == 0) {
                const double lhs = (l1 + l2) * d.at(0, 0);
                const double rhs = m1 * d.at(1, 0) + m2 * d.at(0, 1);
                record(0, lhs, rhs);
                record_corrected(0, lhs, rhs);
            } else if (i == 0) {
                const double lhs = d.at(0, j) * (l1 + l2 + m2);
                const double rhs = l2 * d.at(0, j - 1) + m2 * d.at(0, j + 1) + m1 * d.at(1, j);
                record(1, lhs, rhs);
                record_corrected(1, lhs, rhs);
            } else if (j == 0) {
                const double lhs = d.at(i, 0) * (l2 + l1 + dep);
                record(2, lhs, l1 * d.at(i - 1, 0) + dep * d.at(i + 1, 0));
                record_corrected(2, lhs, l1 * d.at(i - 1, 0) + up * d.at(i + 1, 0));
            } else {
                const double lhs = d.at(i, j) * (dep + l1 + l2);
                record(3, lhs, l2 * d.at(i, j - 1) + l1 * d.at(i - 1, j) + dep * d.at(i, j + 1));
                record_corrected(3, lhs, l2 * d.at(i, j - 1) + l1 * d.at(i - 1, j) + up * d.at(i + 1, j));
            }
        }
    }
    for (std::size_t f = 0; f < 4; ++f) {
        a.satisfied[f] = a.max_abs[f] <= tol;
        a.corrected_satisfied[f] = a.corrected_max_abs[f] <= tol;
    }
    return a;
}

void write_distribution_csv(std::ostream& os, const StationaryDist& d) {
    os << "i,j,prob\n";
    char buf[64];
    for (int i = 0; i <= d.i_max; ++i) {
        for (int j = 0; j <= d.j_max; ++j) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.12g\n", i, j, d.at(i, j));
            os << buf;
        }
    }
}

}  // namespace crq
