#include "crq/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace crq {

namespace {

// Nodes on [0,1] of the 15-point Kronrod rule; odd indices are the 7 Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int k = 0; k < 7; ++k) {
        const double dx = half * kNodes[k];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[k] * sum;
        if (k % 2 == 1) {
            gauss += kGaussWeights[k / 2] * sum;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts) {
    if (!(std::isfinite(a) && std::isfinite(b))) {
        throw std::invalid_argument("integrate: limits must be finite");
    }
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<Segment> heap;
    Segment first = gauss_kronrod(f, a, b);
    double total = first.value;
    double error = first.error;
    heap.push(first);

    while (true) {
        const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
        if (error <= target) {
            out.converged = true;
            break;
        }
        if (static_cast<int>(heap.size()) >= opts.max_intervals) {
            break;
        }
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            break;  // interval exhausted at machine precision
        }
        heap.pop();
        Segment left = gauss_kronrod(f, worst.a, mid);
        Segment right = gauss_kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    error = 0.0;
    out.intervals = static_cast<int>(heap.size());
    while (!heap.empty()) {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.abs_error = error;
    return out;
}

QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 const QuadOptions& opts) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("integrate_to_infinity: lower limit must be finite and > 0");
    }
    auto mapped = [&f](double v) {
        if (v <= 0.0) {
            return 0.0;
        }
        return f(1.0 / v) / (v * v);
    };
    return integrate(mapped, 0.0, 1.0 / a, opts);
}

}  // namespace crq
