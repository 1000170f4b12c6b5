#include "crq/channel.hpp"

#include "crq/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crq {

namespace {

void require_positive_time(double t, const char* what) {
    if (!(t > 0.0) || std::isnan(t)) {
        throw std::invalid_argument(what);
    }
}

constexpr double kQuadTol = 1e-10;

}  // namespace

ServiceTimeLaw ServiceTimeLaw::from(const ChannelParams& c) {
    ServiceTimeLaw law;
    law.b_bar = c.b_bar();
    law.q_over_n0 = c.q_over_n0();
    return law;
}

void validate(const ServiceTimeLaw& law) {
    if (!(law.b_bar > 0.0) || !std::isfinite(law.b_bar)) {
        throw std::invalid_argument("b_bar must be finite and > 0");
    }
    if (!(law.q_over_n0 > 0.0) || !std::isfinite(law.q_over_n0)) {
        throw std::invalid_argument("q_over_n0 must be finite and > 0");
    }
}

double max_transmit_power(double q_lin, double g_sp) {
    if (!(g_sp > 0.0)) {
        throw std::invalid_argument("max_transmit_power: g_sp must be > 0");
    }
    if (!(q_lin > 0.0)) {
        throw std::invalid_argument("max_transmit_power: q_lin must be > 0");
    }
    return q_lin / g_sp;
}

double transmission_time(const ServiceTimeLaw& law, double g_ss, double g_sp) {
    if (!(g_ss > 0.0) || !(g_sp > 0.0)) {
        throw std::invalid_argument("transmission_time: gains must be > 0");
    }
    const double snr = (g_ss / g_sp) * law.q_over_n0;
    if (!(snr > 0.0)) {
        throw std::invalid_argument("transmission_time: SNR must be > 0");
    }
    return law.b_bar / std::log1p(snr);
}

// Written in terms of e = exp(-b/t) so that small t underflows to 0 instead
// of overflowing exp(b/t).
double service_time_cdf(const ServiceTimeLaw& law, double t) {
    require_positive_time(t, "service_time_cdf: t must be > 0");
    if (std::isinf(t)) {
        return 1.0;
    }
    const double e = std::exp(-law.b_bar / t);
    const double r = law.q_over_n0;
    return r * e / (1.0 + (r - 1.0) * e);
}

double service_time_pdf(const ServiceTimeLaw& law, double t) {
    require_positive_time(t, "service_time_pdf: t must be > 0");
    if (std::isinf(t)) {
        return 0.0;
    }
    const double e = std::exp(-law.b_bar / t);
    if (e == 0.0) {
        return 0.0;  // b/t^2 may overflow here
    }
    const double r = law.q_over_n0;
    const double denom = 1.0 + (r - 1.0) * e;
    return (law.b_bar * r / t) * (e / t) / (denom * denom);
}

double outage_probability(const ServiceTimeLaw& law, double t_out) {
    require_positive_time(t_out, "outage_probability: t_out must be > 0");
    return 1.0 - service_time_cdf(law, t_out);
}

double sample_service_time(const ServiceTimeLaw& law, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("sample_service_time: u must lie in (0, 1)");
    }
    return law.b_bar / std::log1p(law.q_over_n0 * (1.0 - u) / u);
}

double truncated_mean_transmission_time(const ServiceTimeLaw& law, double t_out) {
    require_positive_time(t_out, "expected_transmission_time: t_out must be > 0");
    auto t_pdf = [&law](double t) { return t > 0.0 ? t * service_time_pdf(law, t) : 0.0; };
    const QuadResult body = integrate(t_pdf, 0.0, t_out, {kQuadTol, 0.0, 4000});
    if (!body.converged) {
        throw std::runtime_error("expected_transmission_time: quadrature did not converge");
    }
    return body.value + t_out * outage_probability(law, t_out);
}

ExpectedTimeReport expected_transmission_time(const ServiceTimeLaw& law, double t_out) {
    validate(law);
    require_positive_time(t_out, "expected_transmission_time: t_out must be > 0");
    const double r = law.q_over_n0;
    const double b = law.b_bar;
    const double x_out = b / t_out;

    // Integrand b / ((r - 1 + u)^2 ln u) on [exp(x_out), inf), mapped by u = 1/v
    // onto (0, exp(-x_out)]: b / ((1 + (r - 1) v)^2 (-ln v)).
    auto mapped = [r, b](double v) {
        if (v <= 0.0) {
            return 0.0;
        }
        const double s = 1.0 + (r - 1.0) * v;
        return b / (s * s * -std::log(v));
    };
    const double upper = std::exp(-x_out);
    const QuadResult tail = integrate(mapped, 0.0, upper, {kQuadTol, 0.0, 4000});
    if (!tail.converged) {
        throw std::runtime_error("expected_transmission_time: integral did not converge");
    }

    ExpectedTimeReport rep;
    rep.closed_form_integral = r * tail.value;
    rep.closed_form_tail = r * t_out * (1.0 / r + 1.0 / std::expm1(x_out));
    rep.closed_form_value = rep.closed_form_integral + rep.closed_form_tail;
    rep.truncated_mean = truncated_mean_transmission_time(law, t_out);
    rep.relative_gap = (rep.closed_form_value - rep.truncated_mean) / rep.truncated_mean;
    return rep;
}

UntruncatedMean untruncated_mean(const ServiceTimeLaw& law) {
    validate(law);
    UntruncatedMean out;
    // t^2 pdf(t) -> b r / r^2 as t -> inf.
    out.tail_constant = law.b_bar / law.q_over_n0;
    out.converges = !(out.tail_constant > 0.0);
    out.value = out.converges ? 0.0 : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace crq
