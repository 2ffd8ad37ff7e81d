#include "fixtures.hpp"

#include "mecdelay/report.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace mecdelay;

TEST_CASE("case presets reproduce the reference violation probabilities") {
    const std::vector<double> w1{0.9970, 0.9296, 0.5072, 0.1132, 0.0139, 0.0012};
    const std::vector<double> w2{0.9745, 0.9064, 0.7496, 0.4631, 0.1687, 0.0327, 0.0035, 0.0002};
    for (const auto& [name, table] : {std::pair{"case1", w1}, std::pair{"case2", w2}}) {
        const RunResult r = run(preset(name), RunMode::analytic);
        REQUIRE(r.analysis);
        const CsvTable b = read_csv(write_csv(bounds_table(r)));
        REQUIRE(b.rows.size() == table.size());
        for (std::size_t k = 0; k < table.size(); ++k) {
            CHECK(b.number(k, "n") == double(10 * (k + 1)));
            CHECK(std::abs(b.number(k, "analytic") - table[k]) < 5e-4);
        }
    }
}

TEST_CASE("analytic outputs are byte-identical across runs") {
    const auto c = preset("case2");
    const RunResult a = run(c, RunMode::analytic), b = run(c, RunMode::analytic);
    CHECK(run_json(a) == run_json(b));
    CHECK(write_csv(series_table(a.analysis->delay)) == write_csv(series_table(b.analysis->delay)));
    CHECK(write_csv(summary_table(a)) == write_csv(summary_table(b)));
}

TEST_CASE("csv writer and reader") {
    CsvTable t{{"a", "b,c", "d"}, {{"1", "x\"y", ""}, {"2.5", "line\nbreak", "z"}}};
    const CsvTable u = read_csv(write_csv(t));
    CHECK(u.header == t.header);
    CHECK(u.rows == t.rows);
    CHECK(std::isnan(u.number(0, "d")));
    CHECK(u.number(1, "a") == 2.5);
    CHECK_THROWS_AS(read_csv("a,b\n1\n"), ConfigError);
    CHECK_THROWS_AS(read_csv(""), ConfigError);
    CHECK_THROWS_AS(u.column("nope"), std::out_of_range);
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e-17}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("emitted tables re-parse with fixed headers") {
    const RunResult r = run(preset("case1"), RunMode::analytic);
    const CsvTable s = read_csv(write_csv(series_table(r.analysis->delay)));
    CHECK(s.header == std::vector<std::string>{"n", "cpd", "pmf", "violation", "t_ms"});
    CHECK(s.rows.size() == r.analysis->delay.cpd.size());
    for (std::size_t n = 0; n < s.rows.size(); ++n) {
        CHECK(s.number(n, "cpd") == r.analysis->delay.cpd[n]);
        CHECK(s.number(n, "violation") == r.analysis->delay.violation[n]);
        CHECK(s.number(n, "t_ms") == double(n));
    }
    const CsvTable sum = read_csv(write_csv(summary_table(r)));
    CHECK(sum.rows.size() == 1);
    CHECK(sum.number(0, "d_ave") == r.analysis->delay.d_ave);
    CHECK(sum.cell(0, "sim_d_ave").empty());
    // same header with and without simulation
    RunResult sr = r;
    sr.simulation = SimEstimates{};
    sr.simulation->violation.resize(r.config.delay_bounds.size());
    CHECK(read_csv(write_csv(summary_table(sr))).header == sum.header);
    CHECK(read_csv(write_csv(bounds_table(sr))).header == read_csv(write_csv(bounds_table(r))).header);

    const auto j = nlohmann::json::parse(run_json(r));
    CHECK(j["analytic"]["method"] == "direct");
    CHECK(j["analytic"]["bounds"].size() == 6);
    CHECK(j["config"]["buffers"]["N1"] == 10);
    CHECK(j["analytic"]["d_ave_ms"].get<double>() == doctest::Approx(r.analysis->delay.d_ave));
}

TEST_CASE("matrix-geometric diagnostics are reported") {
    auto c = preset("case1");
    c.solver.method = SolveMethod::matrix_geometric;
    const RunResult r = run(c, RunMode::analytic);
    const auto j = nlohmann::json::parse(run_json(r));
    CHECK(j["analytic"]["method"] == "mg");
    CHECK(j["analytic"]["diagnostics"]["direct_max_diff"].is_number());
    CHECK(j["analytic"]["diagnostics"]["r_spectral_radius"].is_number());
}

TEST_CASE("kernel dump lists every nonzero entry") {
    const auto k = oracle::toy_model().kernel();
    const CsvTable t = read_csv(write_csv(kernel_table(k)));
    const MatrixXd P = assemble(k);
    CHECK(Index(t.rows.size()) == (P.array() != 0.0).count());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        CHECK(t.number(r, "value") == P(Index(t.number(r, "row")), Index(t.number(r, "col"))));
}

TEST_CASE("sweep rows follow grid order for any worker count") {
    const auto c = preset("sweep-high-load");
    const auto one = sweep(c, 1), many = sweep(c, 4);
    REQUIRE(one.size() == 10);
    CHECK(write_csv(sweep_table(one)) == write_csv(sweep_table(many)));
    for (std::size_t k = 0; k < one.size(); ++k) {
        CHECK(one[k].index == k);
        CHECK(one[k].mu1 == c.sweep->points[k].mu1);
        CHECK(one[k].p_off > 0.0);
        CHECK(one[k].p_off <= 1.0);
        CHECK(one[k].d_ave_rel_diff < 1e-6);
    }
    const CsvTable t = read_csv(write_csv(sweep_table(one)));
    CHECK(t.header.size() == 14);
    CHECK(t.number(3, "d_ave") == one[3].d_ave);
}

TEST_CASE("sweep shapes") {
    const auto hi = sweep(preset("sweep-high-load"));
    const auto lo = sweep(preset("sweep-low-load"));
    auto argmin = [](const std::vector<SweepRow>& rows, double SweepRow::*f) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (rows[k].*f < rows[best].*f) best = k;
        return best;
    };
    const std::size_t a = argmin(hi, &SweepRow::d_ave), s = argmin(hi, &SweepRow::d_sd);
    CHECK(a > 0);
    CHECK(a + 1 < hi.size());
    CHECK(s > 0);
    CHECK(s + 1 < hi.size());
    CHECK(hi[a].mu1 <= 0.4545);
    CHECK(hi[s].mu1 <= 0.4545);
    for (const auto& rows : {hi, lo})
        for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].p_off >= rows[k - 1].p_off - 1e-9);
    CHECK(hi.back().p2_full > hi.front().p2_full);
    for (std::size_t k = 1; k < lo.size(); ++k) CHECK(lo[k].d_ave <= lo[k - 1].d_ave + 1e-6);
}

TEST_CASE("pmf curves") {
    const auto c = preset("pmf-figs");
    const auto curves = pmf_series(c);
    REQUIRE(curves.size() == 6);
    for (const auto& cv : curves) {
        CHECK(cv.total_mass >= 1.0 - 1e-9);
        CHECK(cv.modes.unimodal());
    }
    // variant order follows the document
    CHECK(curves[0].variant == "lambda>mu2");
    CHECK(curves[3].variant == "lambda<mu2");
    CHECK(curves[1].tail_mass < curves[0].tail_mass);
    CHECK(curves[2].tail_mass > curves[1].tail_mass);
    CHECK(curves[4].tail_mass < curves[3].tail_mass);
    CHECK(curves[5].tail_mass < curves[4].tail_mass);

    const CsvTable t = read_csv(write_csv(pmf_table(curves)));
    std::size_t total = 0;
    for (const auto& cv : curves) total += cv.pmf.size();
    CHECK(t.rows.size() == total);
    const CsvTable s = read_csv(write_csv(pmf_summary_table(curves)));
    CHECK(s.rows.size() == 6);
    CHECK(s.number(2, "tail_mass") == curves[2].tail_mass);
}

TEST_CASE("sweep without a sweep section") {
    CHECK_THROWS_AS(sweep(preset("case1")), ConfigError);
    CHECK_THROWS_AS(parse_run_mode("fast"), ConfigError);
    CHECK(parse_run_mode("both") == RunMode::both);
}

TEST_CASE("run in both modes compares the two sides") {
    auto c = preset("case1");
    c.simulation->replication_slots = 100000;
    c.simulation->max_slots = 2000000;
    c.simulation->warmup = 1000;
    const RunResult r = run(c, RunMode::both);
    REQUIRE(r.analysis);
    REQUIRE(r.simulation);
    const auto j = nlohmann::json::parse(run_json(r));
    CHECK(j["comparison"]["bounds"].size() == 6);
    CHECK(j["simulation"]["tasks"].get<std::int64_t>() > 0);
    const CsvTable b = read_csv(write_csv(bounds_table(r)));
    CHECK(!b.cell(0, "inside").empty());
}
