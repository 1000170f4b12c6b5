#include "crq/scenario.hpp"

#include "crq/channel.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace crq {

const char* to_string(Engine e) {
    switch (e) {
        case Engine::analytic:
            return "analytic";
        case Engine::ctmc:
            return "ctmc";
        case Engine::sim:
            return "sim";
    }
    return "unknown";
}

namespace {

std::string join_errors(const std::vector<ParseError>& errors) {
    std::string out = "scenario parse failed";
    for (const auto& e : errors) {
        out += "\n  line " + std::to_string(e.line) + ": " + e.message;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double parse_double(std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
        throw std::invalid_argument("expected a finite number, got '" + std::string(text) + "'");
    }
    return v;
}

std::uint64_t parse_u64(std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw std::invalid_argument("expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
}

constexpr std::array<std::string_view, 19> kSweepable = {
    "lambda1",   "lambda2",     "mu1",      "mu2",          "gamma",         "n1",          "epsilon",
    "omega",     "q_over_n0_db", "n0",      "bandwidth",    "packet_size",   "t_out",       "g_ss",
    "g_sp",      "patience_rate", "patience_deadline", "patience_lo", "patience_hi"};

bool is_channel_key(std::string_view key) {
    return key == "q_over_n0_db" || key == "n0" || key == "bandwidth" || key == "packet_size" ||
           key == "t_out" || key == "g_ss" || key == "g_sp";
}

}  // namespace

ScenarioError::ScenarioError(std::vector<ParseError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

bool is_sweepable(std::string_view key) {
    return std::find(kSweepable.begin(), kSweepable.end(), key) != kSweepable.end();
}

std::vector<double> parse_value_list(std::string_view text) {
    text = trim(text);
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) {
            throw std::invalid_argument("range must be a:b:step");
        }
        const double a = parse_double(parts[0]);
        const double b = parse_double(parts[1]);
        const double step = parse_double(parts[2]);
        if (!(step > 0.0) || b < a) {
            throw std::invalid_argument("range needs step > 0 and b >= a");
        }
        const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        if (count > 1'000'000) {
            throw std::invalid_argument("range expands to too many points");
        }
        for (std::size_t k = 0; k < count; ++k) {
            out.push_back(a + static_cast<double>(k) * step);
        }
    } else {
        for (auto part : split(text, ',')) {
            out.push_back(parse_double(part));
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("value list is empty");
    }
    return out;
}

void set_parameter(Scenario& s, std::string_view key, double v) {
    auto& p = s.params;
    auto& c = s.channel;
    if (key == "lambda1") {
        p.lambda1 = v;
    } else if (key == "lambda2") {
        p.lambda2 = v;
    } else if (key == "mu1") {
        p.mu1 = v;
        s.mu1_auto = false;
    } else if (key == "mu2") {
        p.mu2 = v;
        s.mu2_auto = false;
        s.mu2_set = true;
    } else if (key == "gamma") {
        p.gamma = v;
    } else if (key == "n1") {
        if (v < 1.0 || v != std::floor(v) || v > 1e7) {
            throw std::invalid_argument("n1 must be a positive integer");
        }
        p.n1_cap = static_cast<int>(v);
    } else if (key == "epsilon") {
        p.epsilon = v;
    } else if (key == "omega") {
        p.omega = v;
    } else if (key == "q_over_n0_db") {
        s.q_over_n0_db = v;
    } else if (key == "n0") {
        c.n0 = v;
    } else if (key == "bandwidth") {
        c.bandwidth = v;
    } else if (key == "packet_size") {
        c.packet_size = v;
    } else if (key == "t_out") {
        c.t_out = v;
    } else if (key == "g_ss") {
        c.g_ss = v;
    } else if (key == "g_sp") {
        c.g_sp = v;
    } else if (key == "patience_rate") {
        s.patience = ExponentialPatience{v};
    } else if (key == "patience_deadline") {
        s.patience = DeterministicPatience{v};
    } else if (key == "patience_lo" || key == "patience_hi") {
        UniformPatience u;
        if (s.patience && std::holds_alternative<UniformPatience>(*s.patience)) {
            u = std::get<UniformPatience>(*s.patience);
        }
        (key == "patience_lo" ? u.lo : u.hi) = v;
        s.patience = u;
    } else {
        throw std::invalid_argument("unknown parameter '" + std::string(key) + "'");
    }
    if (is_channel_key(key)) {
        s.channel_enabled = true;
    }
    c.q_lin = c.n0 * db_to_linear(s.q_over_n0_db);
}

Scenario parse_scenario(std::string_view text) {
    Scenario s;
    std::vector<ParseError> errors;
    bool seen_lambda1 = false;
    bool seen_mu1 = false;
    bool seen_n1 = false;
    std::optional<std::pair<int, std::string>> sweep_key;
    std::optional<std::pair<int, std::string>> series_key;
    std::optional<std::pair<int, std::vector<double>>> sweep_values;
    std::optional<std::pair<int, std::vector<double>>> series_values;
    std::string patience_kind;
    int patience_line = 0;

    int line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string_view line = trim(raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        for (auto stmt : split(line, ';')) {
            stmt = trim(stmt);
            if (stmt.empty()) {
                continue;
            }
            const auto eq = stmt.find('=');
            if (eq == std::string_view::npos) {
                errors.push_back({line_no, "expected 'key = value', got '" + std::string(stmt) + "'"});
                continue;
            }
            const std::string key(trim(stmt.substr(0, eq)));
            const std::string_view value = trim(stmt.substr(eq + 1));
            try {
                if (key == "name") {
                    if (value.empty()) {
                        throw std::invalid_argument("name must not be empty");
                    }
                    s.name = std::string(value);
                } else if (key == "engines") {
                    s.engines.clear();
                    for (auto e : split(value, ',')) {
                        e = trim(e);
                        Engine eng;
                        if (e == "analytic") {
                            eng = Engine::analytic;
                        } else if (e == "ctmc") {
                            eng = Engine::ctmc;
                        } else if (e == "sim") {
                            eng = Engine::sim;
                        } else {
                            throw std::invalid_argument("unknown engine '" + std::string(e) + "'");
                        }
                        if (std::find(s.engines.begin(), s.engines.end(), eng) == s.engines.end()) {
                            s.engines.push_back(eng);
                        }
                    }
                    std::sort(s.engines.begin(), s.engines.end());
                } else if (key == "mu1" && value == "auto_channel") {
                    s.mu1_auto = true;
                    s.channel_enabled = true;
                    seen_mu1 = true;
                } else if (key == "mu2" && value == "auto_channel") {
                    s.mu2_auto = true;
                    s.mu2_set = true;
                    s.channel_enabled = true;
                } else if (key == "patience") {
                    if (value != "exponential" && value != "deterministic" && value != "uniform" &&
                        value != "none") {
                        throw std::invalid_argument("patience must be exponential, deterministic, uniform or none");
                    }
                    patience_kind = std::string(value);
                    patience_line = line_no;
                } else if (key == "service_mode") {
                    if (value == "markovian") {
                        s.service_mode = ServiceMode::markovian;
                    } else if (value == "channel") {
                        s.service_mode = ServiceMode::channel;
                        s.channel_enabled = true;
                    } else {
                        throw std::invalid_argument("service_mode must be markovian or channel");
                    }
                } else if (key == "preemption") {
                    if (value == "resume") {
                        s.preemption_mode = PreemptionMode::resume;
                    } else if (value == "repeat") {
                        s.preemption_mode = PreemptionMode::repeat;
                    } else {
                        throw std::invalid_argument("preemption must be resume or repeat");
                    }
                } else if (key == "events") {
                    s.events = parse_u64(value);
                } else if (key == "warmup") {
                    s.warmup = parse_double(value);
                    if (!(s.warmup >= 0.0 && s.warmup < 1.0)) {
                        throw std::invalid_argument("warmup must lie in [0, 1)");
                    }
                } else if (key == "batches") {
                    s.batches = parse_u64(value);
                    if (s.batches < kMinBatches) {
                        throw std::invalid_argument("batches must be >= 10");
                    }
                } else if (key == "reps") {
                    s.reps = parse_u64(value);
                    if (s.reps < 1) {
                        throw std::invalid_argument("reps must be >= 1");
                    }
                } else if (key == "seed") {
                    s.seed = parse_u64(value);
                } else if (key == "boundary_tol") {
                    s.boundary_tol = parse_double(value);
                } else if (key == "tol_exact") {
                    s.tol_exact = parse_double(value);
                } else if (key == "min_coverage") {
                    s.min_coverage = parse_double(value);
                } else if (key == "sweep" || key == "series") {
                    if (!is_sweepable(value)) {
                        throw std::invalid_argument("'" + std::string(value) + "' is not a sweepable parameter");
                    }
                    (key == "sweep" ? sweep_key : series_key) = std::pair{line_no, std::string(value)};
                } else if (key == "values" || key == "series_values") {
                    (key == "values" ? sweep_values : series_values) = std::pair{line_no, parse_value_list(value)};
                } else if (is_sweepable(key)) {
                    set_parameter(s, key, parse_double(value));
                    seen_lambda1 |= key == "lambda1";
                    seen_mu1 |= key == "mu1";
                    seen_n1 |= key == "n1";
                } else {
                    errors.push_back({line_no, "unknown key '" + key + "'"});
                }
            } catch (const std::invalid_argument& e) {
                errors.push_back({line_no, key + ": " + e.what()});
            }
        }
    }

    if (!seen_lambda1) {
        errors.push_back({0, "missing required key 'lambda1'"});
    }
    if (!seen_mu1) {
        errors.push_back({0, "missing required key 'mu1'"});
    }
    if (!seen_n1) {
        errors.push_back({0, "missing required key 'n1'"});
    }
    auto pair_up = [&errors](const char* what, auto& key, auto& values, std::optional<SweepSpec>& dst) {
        if (key && !values) {
            errors.push_back({key->first, std::string(what) + " without a value list"});
        } else if (!key && values) {
            errors.push_back({values->first, std::string("value list without ") + what});
        } else if (key) {
            dst = SweepSpec{key->second, values->second};
        }
    };
    pair_up("sweep", sweep_key, sweep_values, s.sweep);
    pair_up("series", series_key, series_values, s.series);

    if (patience_kind == "none") {
        s.patience.reset();
    } else if (!patience_kind.empty()) {
        const bool match = (patience_kind == "exponential" && s.patience &&
                            std::holds_alternative<ExponentialPatience>(*s.patience)) ||
                           (patience_kind == "deterministic" && s.patience &&
                            std::holds_alternative<DeterministicPatience>(*s.patience)) ||
                           (patience_kind == "uniform" && s.patience &&
                            std::holds_alternative<UniformPatience>(*s.patience));
        if (!match) {
            errors.push_back({patience_line, "patience '" + patience_kind + "' needs its parameters"});
        }
    }
    if (!errors.empty()) {
        throw ScenarioError(std::move(errors));
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError({{0, "cannot open '" + path + "'"}});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

PointInputs resolve_point(const Scenario& s) {
    PointInputs in;
    in.params = s.params;
    in.patience = s.patience;
    if (!s.mu2_set) {
        in.params.mu2 = in.params.mu1;
    }
    if (s.channel_enabled) {
        ChannelParams c = s.channel;
        c.q_lin = c.n0 * db_to_linear(s.q_over_n0_db);
        validate(c);
        const ServiceTimeLaw law = ServiceTimeLaw::from(c);
        const ExpectedTimeReport rep = expected_transmission_time(law, c.t_out);
        in.e_t = rep.truncated_mean;
        in.e_t_closed_form = rep.closed_form_value;
        in.p_out = outage_probability(law, c.t_out);
        if (s.mu1_auto) {
            in.params.mu1 = 1.0 / in.e_t;
        }
        if (s.mu2_auto || (!s.mu2_set && s.mu1_auto)) {
            in.params.mu2 = 1.0 / in.e_t;
        }
        in.channel = c;
    }
    if (!s.channel_enabled) {
        in.e_t = 1.0 / in.params.mu1;
    }
    validate(in.params);
    return in;
}

}  // namespace crq
