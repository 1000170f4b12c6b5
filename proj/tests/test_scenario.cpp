#include "crq/scenario.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <stdexcept>
#include <string>

using namespace crq;

namespace {

std::vector<ParseError> errors_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e.errors();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal file gets defaults") {
    const Scenario s = parse_scenario("lambda1 = 1\nmu1 = 2\ngamma = 1\nn1 = 10\n");
    CHECK(s.params.lambda1 == 1.0);
    CHECK(s.params.mu1 == 2.0);
    CHECK(s.params.gamma == 1.0);
    CHECK(s.params.n1_cap == 10);
    CHECK(s.params.lambda2 == 0.0);
    CHECK(s.engines == std::vector<Engine>{Engine::analytic});
    CHECK(s.events == 1'000'000);
    CHECK(s.reps == 1);
    CHECK_FALSE(s.sweep);
    CHECK_FALSE(s.channel_enabled);
    const PointInputs in = resolve_point(s);
    CHECK(in.params.mu2 == 2.0);
    CHECK(in.e_t == 0.5);
}

TEST_CASE("comments, semicolons and whitespace") {
    const Scenario s = parse_scenario("  # header\nlambda1=1 ;mu1 = 2; n1 = 3   # trailing\n\nname = demo\n");
    CHECK(s.name == "demo");
    CHECK(s.params.n1_cap == 3);
}

TEST_CASE("range expansion") {
    const Scenario s = parse_scenario("lambda1 = 1; mu1 = 2; n1 = 10\nsweep = mu1; values = 10:160:10\n");
    REQUIRE(s.sweep);
    CHECK(s.sweep->key == "mu1");
    REQUIRE(s.sweep->values.size() == 16);
    CHECK(s.sweep->values.front() == 10.0);
    CHECK(s.sweep->values.back() == 160.0);
    CHECK(parse_value_list("0:1:0.1").size() == 11);
    CHECK(parse_value_list("0:1:0.1").back() == doctest::Approx(1.0));
    CHECK(parse_value_list("3, 1.5,2") == std::vector<double>{3.0, 1.5, 2.0});
    CHECK_THROWS_AS(parse_value_list("1:0:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_value_list("1:2:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_value_list(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_value_list("1,inf"), std::invalid_argument);
}

TEST_CASE("unknown key is reported with its line") {
    const auto e = errors_of("lambda1 = 1\nmu1 = 2\nn1 = 4\nlambda3 = 7\n");
    REQUIRE(e.size() == 1);
    CHECK(e[0].line == 4);
    CHECK(e[0].message.find("lambda3") != std::string::npos);
}

TEST_CASE("type mismatch") {
    const auto e = errors_of("lambda1 = fast\nmu1 = 2\nn1 = 4\n");
    REQUIRE_FALSE(e.empty());
    CHECK(e[0].line == 1);
    CHECK(e[0].message.find("lambda1") != std::string::npos);
    CHECK(e[0].message.find("fast") != std::string::npos);
    CHECK_FALSE(errors_of("lambda1 = 1\nmu1 = 2\nn1 = 4.5\n").empty());
    CHECK_FALSE(errors_of("lambda1 = 1\nmu1 = 2\nn1 = 4\nevents = -3\n").empty());
}

TEST_CASE("missing required keys") {
    const auto e = errors_of("lambda1 = 1\ngamma = 2\n");
    REQUIRE(e.size() == 2);
    CHECK(e[0].message.find("mu1") != std::string::npos);
    CHECK(e[1].message.find("n1") != std::string::npos);
}

TEST_CASE("sweep pairing and sweepable keys") {
    CHECK_FALSE(errors_of("lambda1 = 1; mu1 = 2; n1 = 4\nsweep = mu1\n").empty());
    CHECK_FALSE(errors_of("lambda1 = 1; mu1 = 2; n1 = 4\nvalues = 1,2\n").empty());
    CHECK_FALSE(errors_of("lambda1 = 1; mu1 = 2; n1 = 4\nsweep = name; values = 1,2\n").empty());
    CHECK(is_sweepable("q_over_n0_db"));
    CHECK_FALSE(is_sweepable("engines"));
    const Scenario s = parse_scenario("lambda1 = 1; mu1 = 2; n1 = 4\nsweep = lambda1; values = 1,2\nseries = n1; series_values = 5,6\n");
    REQUIRE(s.series);
    CHECK(s.series->values.size() == 2);
}

TEST_CASE("engines and patience") {
    const Scenario s = parse_scenario("lambda1 = 1; mu1 = 2; n1 = 4\nengines = sim, analytic\npatience = uniform; patience_lo = 0.1; patience_hi = 0.3\n");
    CHECK(s.engines == std::vector<Engine>{Engine::analytic, Engine::sim});
    REQUIRE(s.patience);
    CHECK(std::get<UniformPatience>(*s.patience).hi == 0.3);
    CHECK_FALSE(errors_of("lambda1 = 1; mu1 = 2; n1 = 4\nengines = magic\n").empty());
    CHECK_FALSE(errors_of("lambda1 = 1; mu1 = 2; n1 = 4\npatience = deterministic\n").empty());
}

TEST_CASE("mu1 from the channel") {
    const Scenario s = parse_scenario(
        "lambda1 = 50; mu1 = auto_channel; n1 = 100; gamma = 100\n"
        "bandwidth = 1e6; packet_size = 3424; t_out = 0.02; q_over_n0_db = 0\n");
    CHECK(s.mu1_auto);
    const PointInputs in = resolve_point(s);
    REQUIRE(in.channel);
    CHECK(in.params.mu1 == doctest::Approx(161.29).epsilon(2e-3));
    CHECK(in.params.mu2 == in.params.mu1);
    CHECK(in.p_out == doctest::Approx(0.1119).epsilon(1e-3));

    Scenario louder = s;
    set_parameter(louder, "q_over_n0_db", 3.0);
    CHECK(resolve_point(louder).params.mu1 > in.params.mu1);
}

TEST_CASE("every shipped scenario parses") {
    const std::filesystem::path dir = std::filesystem::path(CRQ_SOURCE_DIR) / "scenarios";
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".scn") {
            continue;
        }
        CAPTURE(entry.path().string());
        const Scenario s = load_scenario(entry.path().string());
        CHECK_NOTHROW(resolve_point(s));
        ++count;
    }
    CHECK(count >= 6);
    const Scenario f8 = load_scenario((dir / "fig8.scn").string());
    CHECK(f8.params.mu1 == 500.0);
    CHECK(f8.params.mu2 == 100.0);
    CHECK(f8.params.omega == 0.01);
    CHECK(f8.params.gamma == 100.0);
    CHECK(f8.params.n1_cap == 100);
    CHECK_THROWS_AS(load_scenario((dir / "missing.scn").string()), ScenarioError);
}
