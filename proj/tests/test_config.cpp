#include "fixtures.hpp"

#include "mecdelay/config.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace mecdelay;
using nlohmann::json;

namespace {

bool same(const DPhSpec& a, const DPhSpec& b) { return a.alpha == b.alpha && a.T == b.T; }

bool same(const ScenarioConfig& a, const ScenarioConfig& b) {
    if (a.name != b.name || a.N1 != b.N1 || a.N2 != b.N2 || a.dt_ms != b.dt_ms) return false;
    if (a.D0 != b.D0 || a.D1 != b.D1) return false;
    if (!same(a.transmission, b.transmission) || !same(a.computation, b.computation) || !same(a.vacation, b.vacation))
        return false;
    if (a.solver.method != b.solver.method || a.solver.tail_eps != b.solver.tail_eps || a.solver.n_max != b.solver.n_max ||
        a.solver.mean_tail_eps != b.solver.mean_tail_eps)
        return false;
    if (a.delay_bounds != b.delay_bounds) return false;
    if (a.sweep.has_value() != b.sweep.has_value()) return false;
    if (a.sweep) {
        if (a.sweep->tail_offset != b.sweep->tail_offset || a.sweep->points.size() != b.sweep->points.size() ||
            a.sweep->variants.size() != b.sweep->variants.size())
            return false;
        for (std::size_t k = 0; k < a.sweep->points.size(); ++k)
            if (a.sweep->points[k].mu1 != b.sweep->points[k].mu1 || a.sweep->points[k].S1 != b.sweep->points[k].S1) return false;
        for (std::size_t k = 0; k < a.sweep->variants.size(); ++k)
            if (a.sweep->variants[k].label != b.sweep->variants[k].label ||
                !same(a.sweep->variants[k].computation, b.sweep->variants[k].computation))
                return false;
    }
    if (a.simulation.has_value() != b.simulation.has_value()) return false;
    if (a.simulation) {
        const SimConfig &x = *a.simulation, &y = *b.simulation;
        if (x.seed != y.seed || x.confidence != y.confidence || x.relative_accuracy != y.relative_accuracy ||
            x.warmup != y.warmup || x.replication_slots != y.replication_slots || x.min_replications != y.min_replications ||
            x.round_size != y.round_size || x.max_slots != y.max_slots || x.threads != y.threads ||
            x.histogram_cap != y.histogram_cap)
            return false;
    }
    return true;
}

std::string case1_text() { return preset_text("case1"); }

std::string path_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

std::string edited(const std::function<void(json&)>& f) {
    json j = json::parse(case1_text());
    f(j);
    return j.dump();
}

}  // namespace

TEST_CASE("presets parse and carry the reference parameters") {
    const auto names = preset_names();
    CHECK(names.size() == 5);
    for (const auto& n : {"case1", "case2", "sweep-high-load", "sweep-low-load", "pmf-figs"}) {
        INFO(n);
        const ScenarioConfig c = preset(n);
        CHECK(c.name == n);
        CHECK(c.warnings.empty());
        CHECK_NOTHROW(c.model());
        CHECK(c.dt_ms == 1.0);
    }
    const auto c1 = preset("case1");
    const auto f1 = fixture::case1();
    CHECK(c1.D0 == f1.d0);
    CHECK(c1.D1 == f1.d1);
    CHECK(c1.transmission.T == f1.s1);
    CHECK(c1.computation.T == f1.s2);
    CHECK(c1.vacation.T == f1.V);
    CHECK(c1.vacation.alpha == f1.v);
    CHECK(c1.N1 == 10);
    CHECK(c1.N2 == 15);
    const auto c2 = preset("case2");
    const auto f2 = fixture::case2();
    CHECK(c2.transmission.T == f2.s1);
    CHECK(c2.vacation.T == f2.V);
    CHECK(c2.vacation.alpha == f2.v);
    CHECK(c2.delay_bounds.size() == 8);

    const auto hi = preset("sweep-high-load");
    REQUIRE(hi.sweep);
    CHECK(hi.sweep->points.size() == 10);
    CHECK(hi.sweep->variants.size() == 1);
    CHECK(hi.sweep->variants[0].computation.T(0, 0) == 0.5455);
    CHECK(preset("sweep-low-load").sweep->variants[0].computation.T(0, 0) == 0.2857);
    CHECK(preset("pmf-figs").sweep->points.size() == 3);
    CHECK(preset("pmf-figs").sweep->variants.size() == 2);
    CHECK_THROWS_AS(preset("case3"), ConfigError);
}

TEST_CASE("round trip parse, serialize, parse") {
    for (const auto& n : preset_names()) {
        INFO(n);
        const ScenarioConfig a = preset(n);
        const std::string s = serialize_config(a);
        const ScenarioConfig b = parse_config(s);
        CHECK(same(a, b));
        CHECK(serialize_config(b) == s);
    }
    SUBCASE("non-default solver and awkward doubles") {
        ScenarioConfig a = preset("case2");
        a.solver.method = SolveMethod::matrix_geometric;
        a.solver.tail_eps = 1.0 / 3.0 * 1e-9;
        a.solver.n_max = 1234;
        a.D0(0, 0) = 0.1 + 0.2;
        a.D1(0, 0) = 1.0 - a.D0(0, 0) - a.D0(0, 1) - a.D1(0, 1);
        a.simulation->max_slots = 123456789012;
        a.simulation->seed = 987654321;
        const ScenarioConfig b = parse_config(serialize_config(a));
        CHECK(same(a, b));
    }
}

TEST_CASE("field paths in errors") {
    CHECK(path_of("{") == "<document>");
    CHECK(path_of("[]") == "<root>");
    CHECK(path_of(edited([](json& j) { j.erase("buffers"); })) == "buffers");
    CHECK(path_of(edited([](json& j) { j["buffers"]["N2"] = 5; })) == "buffers.N2");
    CHECK(path_of(edited([](json& j) { j["buffers"]["N1"] = 2.5; })) == "buffers.N1");
    CHECK(path_of(edited([](json& j) { j["arrival"]["D0"][1][0] = "x"; })) == "arrival.D0[1][0]");
    CHECK(path_of(edited([](json& j) { j["arrival"]["D1"][1] = json::array({0.1}); })) == "arrival.D1[1]");
    CHECK(path_of(edited([](json& j) { j["arrival"]["D1"][0][0] = 0.9; })) == "arrival");
    CHECK(path_of(edited([](json& j) { j["vacation"]["alpha"] = json::array({0.5, 0.4}); })) == "vacation");
    CHECK(path_of(edited([](json& j) { j["vacation"]["T"] = json::array({json::array({0.3})}); })) == "vacation");
    CHECK(path_of(edited([](json& j) { j["solver"]["method"] = "lu"; })) == "solver.method");
    CHECK(path_of(edited([](json& j) { j["solver"]["tail_eps"] = 0; })) == "solver.tail_eps");
    CHECK(path_of(edited([](json& j) { j["delay_bounds"][2] = -1; })) == "delay_bounds[2]");
    CHECK(path_of(edited([](json& j) { j["simulation"]["confidence"] = 1.5; })) == "simulation.confidence");
    CHECK(path_of(edited([](json& j) { j["simulation"]["warmup"] = -4; })) == "simulation.warmup");
    CHECK(path_of(edited([](json& j) { j["simulation"]["colour"] = 1; })) == "simulation.colour");
    CHECK(path_of(edited([](json& j) { j["typo"] = 1; })) == "typo");
    CHECK(path_of(edited([](json& j) { j["sweep"] = {{"points", json::array({{{"mu1", 0.5}, {"S1", 1.0}}})}}; })) ==
          "sweep.points[0].S1");
    CHECK(path_of(edited([](json& j) {
              j["sweep"] = {{"points", json::array({{{"mu1", 0.5}, {"S1", 0.5}}})},
                            {"variants", json::array({{{"label", "a"}, {"computation", {{"alpha", {1.0}}, {"T", {{1.0}}}}}}})}};
          })) == "sweep.variants[0].computation");
    CHECK(path_of(case1_text()) == "<accepted>");
    CHECK_THROWS_AS(load_config("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("model parameters have no defaults") {
    for (const char* key : {"arrival", "transmission", "computation", "vacation", "buffers"}) {
        INFO(key);
        CHECK(path_of(edited([key](json& j) { j.erase(key); })) == key);
    }
    const auto c = parse_config(edited([](json& j) {
        j.erase("solver");
        j.erase("simulation");
        j.erase("dt_ms");
    }));
    CHECK(c.solver.method == SolveMethod::direct);
    CHECK(c.solver.tail_eps == 1e-10);
    CHECK(!c.simulation);
    CHECK(!c.dt_ms);
    CHECK(c.sim_config().confidence == 0.95);
    CHECK(c.sim_config().relative_accuracy == 0.05);
}

TEST_CASE("sweep pairs are checked against mu1 = 1 - S1") {
    const auto c = parse_config(edited([](json& j) {
        j["sweep"] = {{"points", json::array({{{"mu1", 0.3571}, {"S1", 0.6429}}, {{"mu1", 0.5}, {"S1", 0.6}}})}};
    }));
    REQUIRE(c.warnings.size() == 1);
    CHECK(c.warnings[0].find("sweep.points[1]") != std::string::npos);
}

TEST_CASE("derived configs") {
    const auto c = preset("case1");
    const auto t = c.with_transmission(0.25);
    CHECK(t.transmission.T(0, 0) == 0.25);
    CHECK(t.transmission.alpha(0) == 1.0);
    CHECK(t.computation.T == c.computation.T);
    const auto opt = c.analysis_options();
    CHECK(opt.tail.eps_tail == c.solver.tail_eps);
    CHECK(opt.dt_ms == 1.0);
    CHECK(c.sim_config().bounds == c.delay_bounds);
}
