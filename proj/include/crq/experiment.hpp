#pragma once

#include "crq/desim.hpp"
#include "crq/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crq {

/// One CSV row: one engine at one (series, sweep) point. Metrics an engine
/// does not produce stay absent and print as empty cells.
struct ResultRow {
    std::string scenario;
    std::string engine;
    std::string series_var;
    std::optional<double> series_value;
    std::string sweep_var;
    std::optional<double> sweep_value;
    std::size_t point_index = 0;
    bool ok = true;
    std::string error;
    std::map<std::string, double> metrics;

    std::optional<double> get(const std::string& column) const;
};

/// Header-stable column list, identity columns first.
const std::vector<std::string>& result_columns();

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> events;
    std::optional<std::size_t> reps;
    unsigned jobs = 1;  // worker threads over sweep points
    TraceSink trace;    // forwarded to every simulation (forces jobs = 1)
};

/// Runs every engine at every point; series values form the outer loop.
/// Rows come back in (series, sweep, engine) order regardless of jobs.
std::vector<ResultRow> run_scenario(const Scenario& s, const RunOptions& opts = {});

/// RFC-4180 CSV with a header line, '.' decimals and 12 significant digits.
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<ResultRow>& rows);

std::string format_number(double v);
std::string csv_escape(const std::string& field);

struct ValidationCheck {
    std::size_t point_index = 0;
    std::string description;  // e.g. "analytic-ctmc p0"
    double reference = 0.0;
    double observed = 0.0;
    double delta = 0.0;
    double lo = 0.0;  // sim interval, coverage checks only
    double hi = 0.0;
    bool pass = true;
    bool report_only = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    std::size_t exact_checks = 0;
    std::size_t exact_failures = 0;
    std::size_t coverage_checks = 0;
    std::size_t coverage_hits = 0;
    double min_coverage = 0.0;
    bool pass = false;
};

struct Tolerances {
    double exact = 1e-8;        // analytic vs ctmc, plus the boundary mass
    double min_coverage = 0.9;  // fraction of sim intervals covering the reference
};

/// Triangulates the engines of a scenario: analytic vs ctmc on absolute
/// deltas, sim vs the exact engines on interval coverage, and the class-2
/// approximation vs the ctmc class-2 wait as a report-only gap.
ValidationReport cross_validate(const Scenario& s, const Tolerances& tol, const RunOptions& opts = {});
ValidationReport cross_validate(const std::vector<ResultRow>& rows, const Tolerances& tol);

void write_report(std::ostream& os, const ValidationReport& r);

}  // namespace crq
