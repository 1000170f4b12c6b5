// crq: command-line driver for the priority-queue laboratory.
//
//   crq analytic [scenario] [-p key=value ...]
//   crq ctmc     [scenario] [-p key=value ...] [--dump pi.csv]
//   crq simulate [scenario] [-p key=value ...] [--trace]
//   crq sweep    <scenario>
//   crq validate <scenario>
//
// Exit codes: 0 success, 1 validation failure, 2 input error.

#include "crq/ctmc.hpp"
#include "crq/experiment.hpp"
#include "crq/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitInput = 2;

struct Options {
    std::string scenario_path;
    std::vector<std::string> overrides;
    std::string out_path;
    std::string dump_path;
    std::uint64_t seed = 0;
    std::uint64_t events = 0;
    std::size_t reps = 0;
    unsigned jobs = 0;
    bool trace = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw crq::ScenarioError({{0, "cannot open '" + path + "'"}});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

crq::Scenario build_scenario(const Options& o, std::optional<crq::Engine> only) {
    std::string text = o.scenario_path.empty() ? std::string{} : read_file(o.scenario_path);
    text += "\n";
    for (const auto& kv : o.overrides) {
        text += kv + "\n";
    }
    crq::Scenario s = crq::parse_scenario(text);
    if (only) {
        s.engines = {*only};
    }
    return s;
}

crq::RunOptions run_options(const Options& o) {
    crq::RunOptions r;
    if (o.seed != 0) {
        r.seed = o.seed;
    }
    if (o.events != 0) {
        r.events = o.events;
    }
    if (o.reps != 0) {
        r.reps = o.reps;
    }
    r.jobs = o.jobs != 0 ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    if (o.trace) {
        std::cerr << "time,kind,packet_id,n1,n2,serving_class\n";
        r.trace = [](const crq::TraceRecord& t) {
            std::fprintf(stderr, "%.12g,%s,%llu,%d,%d,%d\n", t.time, crq::to_string(t.kind),
                         static_cast<unsigned long long>(t.packet_id), t.n1, t.n2, t.serving_class);
        };
    }
    return r;
}

void emit(const Options& o, const std::string& text) {
    if (o.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + o.out_path + "'");
    }
    out << text;
}

int run_engine(const Options& o, crq::Engine engine) {
    const crq::Scenario s = build_scenario(o, engine);
    const auto rows = crq::run_scenario(s, run_options(o));
    emit(o, crq::to_csv(rows));
    if (engine == crq::Engine::ctmc && !o.dump_path.empty()) {
        const crq::PointInputs in = crq::resolve_point(s);
        const crq::AdaptiveSolve solve = crq::solve_truncated(in.params, s.boundary_tol);
        std::ofstream dump(o.dump_path);
        crq::write_distribution_csv(dump, solve.dist);
    }
    return 0;
}

int run_sweep(const Options& o) {
    const crq::Scenario s = build_scenario(o, std::nullopt);
    emit(o, crq::to_csv(crq::run_scenario(s, run_options(o))));
    return 0;
}

int run_validate(const Options& o) {
    const crq::Scenario s = build_scenario(o, std::nullopt);
    if (s.engines.size() < 2) {
        throw crq::ScenarioError({{0, "validate needs at least two engines"}});
    }
    const crq::ValidationReport rep =
        crq::cross_validate(s, {s.tol_exact, s.min_coverage}, run_options(o));
    std::ostringstream os;
    crq::write_report(os, rep);
    emit(o, os.str());
    return rep.pass ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-class preemptive-priority queue laboratory"};
    app.require_subcommand(1);
    Options o;

    // Global flags are accepted before or after the subcommand.
    auto add_globals = [&o](CLI::App* a) {
        a->add_option("--seed", o.seed, "master seed (overrides the scenario)");
        a->add_option("--out", o.out_path, "write output to this path instead of stdout");
        a->add_option("--events", o.events, "simulation horizon in events");
        a->add_option("--reps", o.reps, "simulation replications per point");
        a->add_option("--jobs", o.jobs, "worker threads over sweep points");
        a->add_flag("--trace", o.trace, "dump the simulation event trace to stderr");
    };
    add_globals(&app);

    auto add_point_command = [&](const char* name, const char* help) {
        CLI::App* cmd = app.add_subcommand(name, help);
        cmd->add_option("scenario", o.scenario_path, "scenario file")->check(CLI::ExistingFile);
        cmd->add_option("-p,--param", o.overrides, "key=value override (repeatable)")->allow_extra_args(false);
        add_globals(cmd);
        return cmd;
    };
    CLI::App* analytic = add_point_command("analytic", "closed-form metrics");
    CLI::App* ctmc = add_point_command("ctmc", "truncated Markov-chain oracle");
    ctmc->add_option("--dump", o.dump_path, "write the stationary distribution (i,j,prob)");
    CLI::App* simulate = add_point_command("simulate", "discrete-event simulation");

    CLI::App* sweep = app.add_subcommand("sweep", "run every engine of a scenario");
    sweep->add_option("scenario", o.scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("-p,--param", o.overrides, "key=value override (repeatable)")->allow_extra_args(false);
    add_globals(sweep);
    CLI::App* validate = app.add_subcommand("validate", "cross-validate the engines of a scenario");
    validate->add_option("scenario", o.scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
    validate->add_option("-p,--param", o.overrides, "key=value override (repeatable)")->allow_extra_args(false);
    add_globals(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*analytic) {
            return run_engine(o, crq::Engine::analytic);
        }
        if (*ctmc) {
            return run_engine(o, crq::Engine::ctmc);
        }
        if (*simulate) {
            return run_engine(o, crq::Engine::sim);
        }
        if (*sweep) {
            return run_sweep(o);
        }
        if (*validate) {
            return run_validate(o);
        }
    } catch (const crq::ScenarioError& e) {
        std::cerr << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
