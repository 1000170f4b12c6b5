#pragma once

#include "crq/desim.hpp"
#include "crq/params.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crq {

enum class Engine { analytic, ctmc, sim };

const char* to_string(Engine e);

struct SweepSpec {
    std::string key;
    std::vector<double> values;
};

/// One experiment description. Text format: `key = value` lines, `#`
/// comments, several assignments per line separated by `;`. A sweep is
/// `sweep = <key>; values = a:b:step` (inclusive range) or a comma list;
/// `series = <key>; series_values = ...` adds an outer loop.
struct Scenario {
    std::string name = "scenario";
    std::vector<Engine> engines{Engine::analytic};

    SystemParams params;
    bool mu1_auto = false;  // mu1 = 1 / E[min(T, t_out)] from the channel law
    bool mu2_auto = false;
    bool mu2_set = false;   // otherwise mu2 follows mu1

    ChannelParams channel;
    bool channel_enabled = false;  // any channel key present
    double q_over_n0_db = 0.0;

    std::optional<PatienceSpec> patience;

    ServiceMode service_mode = ServiceMode::markovian;
    PreemptionMode preemption_mode = PreemptionMode::resume;
    std::uint64_t events = 1'000'000;
    double warmup = 0.2;
    std::size_t batches = 32;
    std::size_t reps = 1;
    std::uint64_t seed = 1;

    double boundary_tol = 1e-9;
    double tol_exact = 1e-8;
    double min_coverage = 0.9;

    std::optional<SweepSpec> sweep;
    std::optional<SweepSpec> series;
};

struct ParseError {
    int line = 0;
    std::string message;
};

class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(std::vector<ParseError> errors);
    const std::vector<ParseError>& errors() const { return errors_; }

private:
    std::vector<ParseError> errors_;
};

/// Throws ScenarioError listing every line-anchored problem found.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Keys accepted as sweep/series variables.
bool is_sweepable(std::string_view key);

/// Expands `a:b:step` (inclusive) or `v1,v2,...`. Throws std::invalid_argument.
std::vector<double> parse_value_list(std::string_view text);

/// Applies one assignment of a numeric parameter (the sweepable keys).
void set_parameter(Scenario& s, std::string_view key, double value);

/// Fully resolved inputs of one sweep point.
struct PointInputs {
    SystemParams params;
    std::optional<ChannelParams> channel;
    std::optional<PatienceSpec> patience;
    double e_t = 0.0;          // mean transmission time used by E[W1]
    double e_t_closed_form = 0.0;  // two-term closed form, channel only
    double p_out = 0.0;
};

PointInputs resolve_point(const Scenario& s);

}  // namespace crq
