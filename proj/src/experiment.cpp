#include "crq/experiment.hpp"

#include "crq/analytic.hpp"
#include "crq/ctmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

namespace crq {

std::optional<double> ResultRow::get(const std::string& column) const {
    const auto it = metrics.find(column);
    if (it == metrics.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> columns = {
        "scenario", "engine", "series_var", "series_value", "sweep_var", "sweep_value", "status", "error",
        "lambda1", "lambda2", "mu1", "mu2", "gamma", "n1", "rho1", "rho2", "stable",
        "e_t", "e_t_closed_form", "p_out",
        "p0", "p0_lo", "p0_hi",
        "mean_len1", "mean_wait1",
        "mean_queue_len1", "mean_queue_wait1", "mean_queue_wait1_lo", "mean_queue_wait1_hi",
        "sojourn1", "sojourn1_lo", "sojourn1_hi",
        "overflow_prob", "blocking_prob", "blocking_prob_lo", "blocking_prob_hi",
        "abandon_prob", "abandon_prob_lo", "abandon_prob_hi",
        "outage_frac", "outage_frac_lo", "outage_frac_hi",
        "reneging_prob", "total_wait1",
        "d", "mean_num2", "mean_wait2", "mean_wait2_lo", "mean_wait2_hi", "class2_feasible", "qos_ok",
        "ctmc_j_max", "ctmc_boundary_mass", "ctmc_residual", "p00", "closed_form_i0_residual",
        "closed_form_ij_residual",
        "sim_events", "sim_reps", "arrived1", "served1", "reneged1", "overflowed1", "in_system1",
        "arrived2", "served2", "in_system2", "conserved"};
    return columns;
}

namespace {

constexpr std::size_t kIdentityColumns = 8;

void put(ResultRow& row, const char* key, double v) {
    if (!std::isnan(v)) {
        row.metrics[key] = v;
    }
}

void put_metric(ResultRow& row, const std::string& key, const SimMetric& m) {
    if (!m.defined) {
        return;
    }
    row.metrics[key] = m.mean;
    row.metrics[key + "_lo"] = m.lo;
    row.metrics[key + "_hi"] = m.hi;
}

void put_inputs(ResultRow& row, const PointInputs& in) {
    const auto& p = in.params;
    put(row, "lambda1", p.lambda1);
    put(row, "lambda2", p.lambda2);
    put(row, "mu1", p.mu1);
    put(row, "mu2", p.mu2);
    put(row, "gamma", p.gamma);
    put(row, "n1", p.n1_cap);
    const StabilityReport st = validate_stability(p);
    put(row, "rho1", st.rho1);
    put(row, "rho2", st.rho2);
    put(row, "stable", st.stable ? 1.0 : 0.0);
}

void run_analytic(ResultRow& row, const PointInputs& in) {
    const auto& p = in.params;
    put(row, "e_t", in.e_t);
    if (in.channel) {
        put(row, "e_t_closed_form", in.e_t_closed_form);
    }
    put(row, "p_out", in.p_out);
    const SteadyState ss = class1_steady_state(p);
    const Class1Metrics c1 = class1_metrics(p, ss, in.e_t, in.p_out);
    put(row, "p0", c1.empty_prob);
    put(row, "mean_len1", c1.mean_len);
    put(row, "mean_wait1", c1.mean_wait);
    put(row, "mean_queue_len1", c1.mean_queue_len);
    put(row, "mean_queue_wait1", c1.mean_queue_wait);
    put(row, "overflow_prob", c1.overflow_prob);
    put(row, "blocking_prob", c1.blocking_prob);
    put(row, "abandon_prob", c1.abandon_prob);
    put(row, "reneging_prob", c1.reneging_prob);
    put(row, "total_wait1", c1.total_wait);
    if (p.omega > 0.0) {
        const Class2Metrics c2 = class2_approx(p);
        put(row, "d", c2.d);
        put(row, "mean_num2", c2.mean_num);
        put(row, "class2_feasible", c2.feasible ? 1.0 : 0.0);
        if (c2.wait_defined) {
            put(row, "mean_wait2", c2.mean_wait);
            if (p.epsilon > 0.0) {
                put(row, "qos_ok", check_qos(c2.mean_wait, p) ? 1.0 : 0.0);
            }
        }
    }
}

void run_ctmc(ResultRow& row, const PointInputs& in, double boundary_tol) {
    const auto& p = in.params;
    const AdaptiveSolve solve = solve_truncated(p, boundary_tol);
    const StationaryDist& d = solve.dist;
    const CtmcMetrics m = ctmc_metrics(d, p, boundary_tol);
    const ClosedFormBalanceAudit audit = audit_closed_form_balance(d, p);
    put(row, "p0", m.empty1);
    put(row, "mean_len1", m.mean_n1);
    put(row, "mean_queue_len1", m.mean_queue1);
    if (p.lambda1 > 0.0) {
        put(row, "mean_wait1", m.wait1);
        put(row, "mean_queue_wait1", m.queue_wait1);
        put(row, "sojourn1", m.sojourn1);
        put(row, "abandon_prob", p.gamma * m.mean_queue1 / p.lambda1);
    }
    put(row, "blocking_prob", m.blocking1);
    if (p.lambda2 > 0.0) {
        put(row, "mean_num2", m.mean_n2);
        put(row, "mean_wait2", m.queue_wait2);
    }
    put(row, "ctmc_j_max", solve.j_max);
    put(row, "ctmc_boundary_mass", d.boundary_mass);
    put(row, "ctmc_residual", d.residual);
    put(row, "p00", m.empty_all);
    put(row, "closed_form_i0_residual", audit.max_abs[2]);
    put(row, "closed_form_ij_residual", audit.max_abs[3]);
    if (!m.trusted) {
        row.ok = false;
        row.error = "untrusted: boundary mass above tolerance";
    }
}

void run_simulation(ResultRow& row, const Scenario& s, const PointInputs& in, std::size_t point,
                    const RunOptions& opts) {
    const std::size_t reps = opts.reps.value_or(s.reps);
    std::vector<SimResult> runs;
    runs.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        SimConfig cfg;
        cfg.params = in.params;
        cfg.channel = in.channel;
        cfg.patience = in.patience;
        cfg.service_mode = s.service_mode;
        cfg.preemption_mode = s.preemption_mode;
        cfg.horizon_events = opts.events.value_or(s.events);
        cfg.warmup_fraction = s.warmup;
        cfg.batches = s.batches;
        cfg.seed = opts.seed.value_or(s.seed);
        cfg.run_index = point * reps + r;
        cfg.trace = opts.trace;
        runs.push_back(run_sim(cfg));
    }
    const SimResult res = aggregate(runs);
    put_metric(row, "p0", res.empty_prob1);
    put_metric(row, "mean_queue_wait1", res.wait1_queue);
    put_metric(row, "sojourn1", res.sojourn1);
    put_metric(row, "blocking_prob", res.overflow_frac);
    put_metric(row, "abandon_prob", res.reneged_frac);
    put_metric(row, "outage_frac", res.outage_frac);
    put_metric(row, "mean_wait2", res.wait2_queue);
    const ClassCounts& c1 = res.counts[0];
    const ClassCounts& c2 = res.counts[1];
    if (c1.arrived > 0) {
        put(row, "reneging_prob",
            static_cast<double>(c1.reneged + c1.overflowed) / static_cast<double>(c1.arrived));
    }
    put(row, "sim_events", static_cast<double>(res.events));
    put(row, "sim_reps", static_cast<double>(res.replications));
    put(row, "arrived1", static_cast<double>(c1.arrived));
    put(row, "served1", static_cast<double>(c1.served));
    put(row, "reneged1", static_cast<double>(c1.reneged));
    put(row, "overflowed1", static_cast<double>(c1.overflowed));
    put(row, "in_system1", static_cast<double>(c1.in_system_at_end));
    put(row, "arrived2", static_cast<double>(c2.arrived));
    put(row, "served2", static_cast<double>(c2.served));
    put(row, "in_system2", static_cast<double>(c2.in_system_at_end));
    put(row, "conserved", c1.conserved() && c2.conserved() ? 1.0 : 0.0);
}

struct Point {
    std::optional<double> series;
    std::optional<double> sweep;
};

std::vector<Point> enumerate_points(const Scenario& s) {
    std::vector<std::optional<double>> outer{std::nullopt};
    std::vector<std::optional<double>> inner{std::nullopt};
    if (s.series) {
        outer.assign(s.series->values.begin(), s.series->values.end());
    }
    if (s.sweep) {
        inner.assign(s.sweep->values.begin(), s.sweep->values.end());
    }
    std::vector<Point> points;
    for (const auto& o : outer) {
        for (const auto& i : inner) {
            points.push_back({o, i});
        }
    }
    return points;
}

std::vector<ResultRow> run_point(const Scenario& base, const Point& pt, std::size_t index,
                                 const RunOptions& opts) {
    std::vector<ResultRow> rows;
    Scenario s = base;
    std::optional<PointInputs> inputs;
    std::string setup_error;
    try {
        if (pt.series) {
            set_parameter(s, s.series->key, *pt.series);
        }
        if (pt.sweep) {
            set_parameter(s, s.sweep->key, *pt.sweep);
        }
        inputs = resolve_point(s);
    } catch (const std::exception& e) {
        setup_error = e.what();
    }

    for (Engine engine : s.engines) {
        ResultRow row;
        row.scenario = s.name;
        row.engine = to_string(engine);
        row.point_index = index;
        if (s.series) {
            row.series_var = s.series->key;
            row.series_value = pt.series;
        }
        if (s.sweep) {
            row.sweep_var = s.sweep->key;
            row.sweep_value = pt.sweep;
        }
        if (!inputs) {
            row.ok = false;
            row.error = setup_error;
            rows.push_back(std::move(row));
            continue;
        }
        put_inputs(row, *inputs);
        try {
            switch (engine) {
                case Engine::analytic:
                    run_analytic(row, *inputs);
                    break;
                case Engine::ctmc:
                    run_ctmc(row, *inputs, s.boundary_tol);
                    break;
                case Engine::sim:
                    run_simulation(row, s, *inputs, index, opts);
                    break;
            }
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<ResultRow> run_scenario(const Scenario& s, const RunOptions& opts) {
    const std::vector<Point> points = enumerate_points(s);
    std::vector<std::vector<ResultRow>> per_point(points.size());
    unsigned jobs = opts.trace ? 1u : std::max(1u, opts.jobs);
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(points.size()));

    if (jobs <= 1) {
        for (std::size_t k = 0; k < points.size(); ++k) {
            per_point[k] = run_point(s, points[k], k, opts);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t k = next++; k < points.size(); k = next++) {
                    per_point[k] = run_point(s, points[k], k, opts);
                }
            });
        }
    }

    std::vector<ResultRow> rows;
    for (auto& v : per_point) {
        std::move(v.begin(), v.end(), std::back_inserter(rows));
    }
    return rows;
}

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    const auto& cols = result_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) {
        os << (k ? "," : "") << cols[k];
    }
    os << "\r\n";
    for (const ResultRow& row : rows) {
        os << csv_escape(row.scenario) << ',' << csv_escape(row.engine) << ',' << csv_escape(row.series_var)
           << ',' << (row.series_value ? format_number(*row.series_value) : "") << ','
           << csv_escape(row.sweep_var) << ',' << (row.sweep_value ? format_number(*row.sweep_value) : "")
           << ',' << (row.ok ? "ok" : "error") << ',' << csv_escape(row.error);
        for (std::size_t k = kIdentityColumns; k < cols.size(); ++k) {
            os << ',';
            if (auto v = row.get(cols[k])) {
                os << format_number(*v);
            }
        }
        os << "\r\n";
    }
}

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

ValidationReport cross_validate(const std::vector<ResultRow>& rows, const Tolerances& tol) {
    ValidationReport rep;
    rep.min_coverage = tol.min_coverage;

    std::map<std::size_t, std::map<std::string, const ResultRow*>> by_point;
    for (const ResultRow& r : rows) {
        by_point[r.point_index][r.engine] = &r;
    }

    static const char* const kExact[] = {"p0", "mean_len1", "mean_wait1", "mean_queue_wait1", "blocking_prob"};
    static const char* const kCoverage[] = {"p0", "mean_queue_wait1", "blocking_prob"};

    for (const auto& [point, engines] : by_point) {
        auto find = [&engines](const char* name) -> const ResultRow* {
            const auto it = engines.find(name);
            return it == engines.end() || !it->second->ok ? nullptr : it->second;
        };
        const ResultRow* analytic = find("analytic");
        const ResultRow* ctmc = find("ctmc");
        const ResultRow* sim = find("sim");

        for (const auto& [name, row] : engines) {
            if (!row->ok) {
                rep.checks.push_back({point, name + " engine error: " + row->error, 0, 0, 0, 0, 0, false, false});
                ++rep.exact_checks;
                ++rep.exact_failures;
            }
        }

        if (analytic && ctmc) {
            const double slack = tol.exact + ctmc->get("ctmc_boundary_mass").value_or(0.0);
            for (const char* metric : kExact) {
                const auto a = analytic->get(metric);
                const auto c = ctmc->get(metric);
                if (!a || !c) {
                    continue;
                }
                ValidationCheck chk{point, std::string("analytic-ctmc ") + metric, *a, *c, std::abs(*a - *c)};
                chk.pass = chk.delta <= slack;
                ++rep.exact_checks;
                rep.exact_failures += chk.pass ? 0 : 1;
                rep.checks.push_back(chk);
            }
            const auto a2 = analytic->get("mean_wait2");
            const auto c2 = ctmc->get("mean_wait2");
            if (a2 && c2) {
                ValidationCheck chk{point, "class2-approx-vs-ctmc mean_wait2", *c2, *a2, *a2 - *c2};
                chk.report_only = true;
                rep.checks.push_back(chk);
            }
        }

        const ResultRow* reference = analytic ? analytic : ctmc;
        if (sim && reference) {
            for (const char* metric : kCoverage) {
                const auto ref = reference->get(metric);
                const auto mean = sim->get(metric);
                const auto lo = sim->get(std::string(metric) + "_lo");
                const auto hi = sim->get(std::string(metric) + "_hi");
                if (!ref || !mean || !lo || !hi) {
                    continue;
                }
                ValidationCheck chk{point, std::string("sim-") + reference->engine + " " + metric, *ref, *mean,
                                    *mean - *ref, *lo, *hi};
                chk.pass = *lo <= *ref && *ref <= *hi;
                ++rep.coverage_checks;
                rep.coverage_hits += chk.pass ? 1 : 0;
                rep.checks.push_back(chk);
            }
        }
    }

    const bool coverage_ok =
        rep.coverage_checks == 0 ||
        static_cast<double>(rep.coverage_hits) >= tol.min_coverage * static_cast<double>(rep.coverage_checks);
    rep.pass = rep.exact_failures == 0 && coverage_ok;
    return rep;
}

ValidationReport cross_validate(const Scenario& s, const Tolerances& tol, const RunOptions& opts) {
    return cross_validate(run_scenario(s, opts), tol);
}

void write_report(std::ostream& os, const ValidationReport& r) {
    os << "point,check,reference,observed,delta,lo,hi,result\n";
    for (const ValidationCheck& c : r.checks) {
        const bool coverage = c.lo != 0.0 || c.hi != 0.0;
        os << c.point_index << ',' << csv_escape(c.description) << ',' << format_number(c.reference) << ','
           << format_number(c.observed) << ',' << format_number(c.delta) << ','
           << (coverage ? format_number(c.lo) : "") << ',' << (coverage ? format_number(c.hi) : "") << ','
           << (c.report_only ? "report" : (c.pass ? "pass" : "FAIL")) << '\n';
    }
    os << "# exact: " << (r.exact_checks - r.exact_failures) << '/' << r.exact_checks << " within tolerance\n";
    os << "# coverage: " << r.coverage_hits << '/' << r.coverage_checks << " (required fraction "
       << format_number(r.min_coverage) << ")\n";
    os << "# overall: " << (r.pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace crq
