#include "mecdelay/experiments.hpp"

#include "parallel.hpp"

namespace mecdelay {

RunMode parse_run_mode(const std::string& s) {
    if (s == "analytic") return RunMode::analytic;
    if (s == "simulate") return RunMode::simulate;
    if (s == "both") return RunMode::both;
    throw ConfigError("--mode", "expected analytic, simulate or both, got \"" + s + "\"");
}

const char* run_mode_name(RunMode m) {
    switch (m) {
        case RunMode::analytic: return "analytic";
        case RunMode::simulate: return "simulate";
        case RunMode::both: return "both";
    }
    return "?";
}

RunResult run(const ScenarioConfig& cfg, RunMode mode) {
    RunResult out;
    out.config = cfg;
    out.mode = mode;
    out.warnings = cfg.warnings;
    const SystemModel model = cfg.model();
    if (mode != RunMode::simulate) {
        out.analysis = analyze(model.kernel(), model.lambda(), cfg.analysis_options());
        for (const auto& w : out.analysis->warnings) out.warnings.push_back(w);
    }
    if (mode != RunMode::analytic) {
        out.simulation = simulate(model, cfg.sim_config());
        if (!out.simulation->converged) out.warnings.push_back("simulation stopped at the slot budget before reaching the relative accuracy");
    }
    return out;
}

namespace {

struct GridTask {
    std::string variant;
    std::size_t index;
    SweepPoint point;
    ScenarioConfig cfg;
};

std::vector<GridTask> grid(const ScenarioConfig& cfg) {
    if (!cfg.sweep) throw ConfigError("sweep", "missing required section");
    std::vector<GridTask> out;
    auto add = [&](const std::string& label, const ScenarioConfig& base) {
        for (std::size_t k = 0; k < cfg.sweep->points.size(); ++k) {
            const SweepPoint& p = cfg.sweep->points[k];
            out.push_back({label, k, p, base.with_transmission(p.S1)});
        }
    };
    if (cfg.sweep->variants.empty())
        add("base", cfg);
    else
        for (const auto& v : cfg.sweep->variants) add(v.label, cfg.with_computation(v.computation));
    return out;
}

Analysis<double> evaluate(const ScenarioConfig& c) {
    const SystemModel m = c.model();
    return analyze(m.kernel(), m.lambda(), c.analysis_options());
}

}  // namespace

std::vector<SweepRow> sweep(const ScenarioConfig& cfg, int threads) {
    const auto tasks = grid(cfg);
    std::vector<SweepRow> rows(tasks.size());
    detail::parallel_for(tasks.size(), threads, [&](std::size_t i) {
        const GridTask& t = tasks[i];
        const auto a = evaluate(t.cfg);
        const auto& d = a.delay;
        rows[i] = SweepRow{t.variant,  t.index,  t.point.mu1,  t.point.S1, d.d_ave,     d.d_ave_little, d.d_ave_rel_diff,
                           d.d_sd,     d.p_off,  d.p2_full,    d.n_stop,   d.truncated, cfg.dt_ms,      a.warnings};
    });
    return rows;
}

std::vector<PmfCurve> pmf_series(const ScenarioConfig& cfg, int threads) {
    const auto tasks = grid(cfg);
    std::vector<PmfCurve> curves(tasks.size());
    const int offset = cfg.sweep->tail_offset;
    detail::parallel_for(tasks.size(), threads, [&](std::size_t i) {
        const GridTask& t = tasks[i];
        const auto a = evaluate(t.cfg);
        PmfCurve c;
        c.variant = t.variant;
        c.index = t.index;
        c.mu1 = t.point.mu1;
        c.S1 = t.point.S1;
        c.pmf = a.delay.pmf;
        c.modes = a.delay.modes;
        c.tail_offset = offset;
        c.tail_mass = tail_mass_beyond_mode(c.pmf, Index(offset));
        for (double p : c.pmf) c.total_mass += p;
        c.dt_ms = cfg.dt_ms;
        curves[i] = std::move(c);
    });
    return curves;
}

}  // namespace mecdelay
