#include "mecdelay/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace mecdelay;

namespace {

enum Exit { ok = 0, config_error = 2, solver_error = 3, not_converged = 4 };

struct Options {
    std::string config, preset, mode = "analytic", method, out = ".", format = "both";
    std::optional<std::uint64_t> seed;
    std::optional<double> tail_eps;
    std::optional<Index> n_max;
    int threads = 0;
    bool dump_kernel = false, quiet = false;
};

ScenarioConfig load(const Options& o) {
    if (o.config.empty() == o.preset.empty()) throw ConfigError("--config/--preset", "give exactly one of them");
    ScenarioConfig c = o.config.empty() ? preset(o.preset) : load_config(o.config);
    if (!o.method.empty()) {
        if (o.method == "mg") c.solver.method = SolveMethod::matrix_geometric;
        else if (o.method == "direct") c.solver.method = SolveMethod::direct;
        else throw ConfigError("--method", "expected mg or direct");
    }
    if (o.tail_eps) {
        if (!(*o.tail_eps > 0.0 && *o.tail_eps < 1.0)) throw ConfigError("--tail-eps", "must lie in (0,1)");
        c.solver.tail_eps = *o.tail_eps;
    }
    if (o.n_max) {
        if (*o.n_max < 1) throw ConfigError("--n-max", "must be positive");
        c.solver.n_max = *o.n_max;
    }
    if (o.seed) {
        if (!c.simulation) c.simulation = SimConfig{};
        c.simulation->seed = *o.seed;
    }
    if (o.threads > 0 && c.simulation) c.simulation->threads = o.threads;
    if (c.name.empty()) c.name = o.preset.empty() ? fs::path(o.config).stem().string() : o.preset;
    if (o.format != "csv" && o.format != "json" && o.format != "both") throw ConfigError("--format", "expected csv, json or both");
    return c;
}

class Writer {
public:
    Writer(const Options& o) : dir_(o.out), csv_(o.format != "json"), json_(o.format != "csv") {
        fs::create_directories(dir_);
    }
    void csv(const std::string& file, const CsvTable& t) const {
        if (csv_) put(file, write_csv(t));
    }
    void json(const std::string& file, const std::string& text) const {
        if (json_) put(file, text);
    }

private:
    void put(const std::string& file, const std::string& text) const {
        const fs::path p = dir_ / file;
        std::ofstream f(p, std::ios::binary);
        f << text;
        if (!f) throw std::runtime_error("cannot write " + p.string());
    }
    fs::path dir_;
    bool csv_, json_;
};

void warn(const std::vector<std::string>& w) {
    for (const auto& s : w) std::cerr << "warning: " << s << "\n";
}

int cmd_run(const Options& o) {
    const ScenarioConfig c = load(o);
    const RunResult r = run(c, parse_run_mode(o.mode));
    warn(r.warnings);
    const Writer w(o);
    w.csv(c.name + "_summary.csv", summary_table(r));
    w.csv(c.name + "_bounds.csv", bounds_table(r));
    if (r.analysis) w.csv(c.name + "_series.csv", series_table(r.analysis->delay));
    if (o.dump_kernel) w.csv(c.name + "_kernel.csv", kernel_table(c.model().kernel()));
    w.json(c.name + ".json", run_json(r));
    if (!o.quiet) std::cout << write_csv(bounds_table(r));
    if (!o.quiet && r.analysis)
        std::cout << "d_ave " << r.analysis->delay.d_ave << " slots, d_sd " << r.analysis->delay.d_sd << ", p_off "
                  << r.analysis->delay.p_off << ", p2_full " << r.analysis->delay.p2_full << "\n";
    return r.simulation && !r.simulation->converged ? not_converged : ok;
}

int cmd_sweep(const Options& o) {
    const ScenarioConfig c = load(o);
    warn(c.warnings);
    const auto rows = sweep(c, o.threads);
    for (const auto& r : rows) warn(r.warnings);
    const Writer w(o);
    w.csv(c.name + "_sweep.csv", sweep_table(rows));
    w.json(c.name + "_sweep.json", sweep_json(c, rows));
    if (!o.quiet) std::cout << write_csv(sweep_table(rows));
    return ok;
}

int cmd_pmf(const Options& o) {
    const ScenarioConfig c = load(o);
    warn(c.warnings);
    const auto curves = pmf_series(c, o.threads);
    const Writer w(o);
    w.csv(c.name + "_pmf.csv", pmf_table(curves));
    w.csv(c.name + "_pmf_summary.csv", pmf_summary_table(curves));
    w.json(c.name + "_pmf.json", pmf_json(c, curves));
    if (!o.quiet) std::cout << write_csv(pmf_summary_table(curves));
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay characteristics of a two-stage tandem queue with blocking vacations"};
    app.require_subcommand(0, 1);
    bool list = false;
    app.add_flag("--list-presets", list, "Print the embedded preset names");
    std::string show;
    app.add_option("--print-preset", show, "Print an embedded preset document");

    Options o;
    auto common = [&](CLI::App* s) {
        s->add_option("--config", o.config, "Scenario document (JSON)");
        s->add_option("--preset", o.preset, "Embedded scenario");
        s->add_option("--method", o.method, "Stationary solver: mg or direct");
        s->add_option("--out", o.out, "Output directory");
        s->add_option("--format", o.format, "csv, json or both");
        s->add_option("--tail-eps", o.tail_eps, "Stop the delay recursion when 1 - CPD drops below this");
        s->add_option("--n-max", o.n_max, "Hard cap on the delay recursion");
        s->add_option("--threads", o.threads, "Worker threads (0: all cores)");
        s->add_flag("--quiet", o.quiet, "No stdout summary");
    };
    CLI::App* run_cmd = app.add_subcommand("run", "Analytic and/or simulated delay characteristics of one scenario");
    common(run_cmd);
    run_cmd->add_option("--mode", o.mode, "analytic, simulate or both");
    run_cmd->add_option("--seed", o.seed, "Master seed of the simulator");
    run_cmd->add_flag("--dump-kernel", o.dump_kernel, "Also write the transition matrix entries");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Mean delay, deviation, p_off and p2_full over a mu1 grid");
    common(sweep_cmd);
    CLI::App* pmf_cmd = app.add_subcommand("pmf", "Delay pmf curves over a mu1 grid");
    common(pmf_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (list) {
            for (const auto& n : preset_names()) std::cout << n << "\n";
            return ok;
        }
        if (!show.empty()) {
            std::cout << preset_text(show);
            return ok;
        }
        if (run_cmd->parsed()) return cmd_run(o);
        if (sweep_cmd->parsed()) return cmd_sweep(o);
        if (pmf_cmd->parsed()) return cmd_pmf(o);
        std::cout << app.help();
        return ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return solver_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
