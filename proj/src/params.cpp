#include "crq/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace crq {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }
bool finite_pos(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const SystemParams& p) {
    require(finite_nonneg(p.lambda1), "lambda1 must be finite and >= 0");
    require(finite_nonneg(p.lambda2), "lambda2 must be finite and >= 0");
    require(finite_pos(p.mu1), "mu1 must be finite and > 0");
    require(finite_pos(p.mu2), "mu2 must be finite and > 0");
    require(finite_nonneg(p.gamma), "gamma must be finite and >= 0");
    require(p.n1_cap >= 1, "n1 must be >= 1");
    require(finite_nonneg(p.epsilon), "epsilon must be finite and >= 0");
    require(finite_nonneg(p.omega), "omega must be finite and >= 0");
}

double ChannelParams::b_bar() const { return packet_size * std::numbers::ln2 / bandwidth; }

void validate(const ChannelParams& c) {
    require(finite_pos(c.q_lin), "q_lin must be > 0");
    require(finite_pos(c.n0), "n0 must be > 0");
    require(finite_pos(c.bandwidth), "bandwidth must be > 0");
    require(finite_pos(c.packet_size), "packet_size must be > 0");
    require(finite_pos(c.t_out), "t_out must be > 0");
    require(finite_pos(c.g_ss), "g_ss must be > 0");
    require(finite_pos(c.g_sp), "g_sp must be > 0");
}

void validate(const PatienceSpec& spec) {
    struct Visitor {
        void operator()(const ExponentialPatience& e) const {
            require(finite_pos(e.rate), "exponential patience rate must be > 0");
        }
        void operator()(const DeterministicPatience& d) const {
            require(finite_pos(d.deadline), "patience deadline must be > 0");
        }
        void operator()(const UniformPatience& u) const {
            require(finite_pos(u.lo) && std::isfinite(u.hi) && u.lo <= u.hi,
                    "uniform patience needs 0 < lo <= hi");
        }
    };
    std::visit(Visitor{}, spec);
}

double sample_patience(const PatienceSpec& spec, double u) {
    struct Visitor {
        double u;
        double operator()(const ExponentialPatience& e) const { return -std::log1p(-u) / e.rate; }
        double operator()(const DeterministicPatience& d) const { return d.deadline; }
        double operator()(const UniformPatience& p) const { return p.lo + (p.hi - p.lo) * u; }
    };
    return std::visit(Visitor{u}, spec);
}

StabilityReport validate_stability(const SystemParams& p) {
    StabilityReport r;
    r.rho1 = p.rho1();
    r.rho2 = p.rho2();
    if (p.mu1 == p.mu2) {
        r.stable = p.lambda1 + p.lambda2 < p.mu1;
    } else {
        r.stable = r.rho1 + r.rho2 < 1.0;
    }
    return r;
}

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

double linear_to_db(double x) { return 10.0 * std::log10(x); }

bool check_qos(double mean_wait2, const SystemParams& p) { return mean_wait2 < p.epsilon; }

}  // namespace crq
