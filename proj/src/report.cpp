#include "mecdelay/report.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace mecdelay {

using json = nlohmann::ordered_json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw std::out_of_range("csv: no column " + name);
}

const std::string& CsvTable::cell(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }

double CsvTable::number(std::size_t row, const std::string& name) const {
    const std::string& s = cell(row, name);
    if (s.empty()) return std::nan("");
    return std::stod(s);
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_row(std::ostringstream& os, const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << quote(cells[k]);
    os << "\n";
}

std::string num(double v) { return format_number(v); }
std::string num(Index v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string flag(bool b) { return b ? "1" : "0"; }
std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt_json(const std::optional<Index>& v) { return v ? json(*v) : json(nullptr); }

json interval(const Interval& iv) { return {{"point", iv.point}, {"lower", iv.lower}, {"upper", iv.upper}}; }

const char* mode_name(ServerMode m) {
    switch (m) {
        case ServerMode::idle: return "idle";
        case ServerMode::vacation: return "vacation";
        case ServerMode::serving: return "serving";
    }
    return "?";
}

json analytic_json(const Analysis<double>& a, const std::vector<int>& bounds) {
    const auto& d = a.delay;
    const auto& s = a.stationary;
    json bj = json::array();
    for (int n : bounds) bj.push_back({{"n", n}, {"W", d.violation_at(n)}});
    return {{"method", method_name(s.method)},
            {"requested_method", method_name(s.requested)},
            {"d_ave", d.d_ave},
            {"d_ave_little", d.d_ave_little},
            {"d_ave_rel_diff", d.d_ave_rel_diff},
            {"d_sd", d.d_sd},
            {"d_ave_ms", opt_json(d.d_ave_ms())},
            {"d_sd_ms", opt_json(d.d_sd_ms())},
            {"p_off", d.p_off},
            {"p2_full", d.p2_full},
            {"lambda", d.lambda},
            {"admitted_rate", d.admitted_rate},
            {"mean_tasks", d.mean_tasks},
            {"bounds", bj},
            {"pmf_mode", d.modes.mode},
            {"pmf_peaks", d.modes.peaks},
            {"unimodal", d.modes.unimodal()},
            {"truncation",
             {{"n_stop", d.n_stop},
              {"tail", d.tail},
              {"truncated", d.truncated},
              {"mass_drift", d.mass_drift},
              {"decay_rate", d.decay_rate},
              {"tail_mean_bound", d.tail_mean_bound}}},
            {"diagnostics",
             {{"states", s.x.size()},
              {"stationary_residual", s.residual},
              {"r_iterations", opt_json(s.r_iterations)},
              {"r_residual", opt_json(s.r_residual)},
              {"r_spectral_radius", opt_json(s.r_spectral_radius)},
              {"jacobi_iterations", opt_json(s.jacobi_iterations)},
              {"jacobi_residual", opt_json(s.jacobi_residual)},
              {"boundary_direct_diff", opt_json(s.boundary_direct_diff)},
              {"direct_max_diff", opt_json(s.direct_max_diff)},
              {"notices", s.notices}}},
            {"series", {{"cpd", d.cpd}, {"pmf", d.pmf}, {"violation", d.violation}}}};
}

json simulation_json(const SimEstimates& e, const SimConfig& c) {
    json bj = json::array();
    for (std::size_t k = 0; k < e.bounds.size(); ++k) {
        json b = interval(e.violation[k]);
        b["n"] = e.bounds[k];
        bj.push_back(b);
    }
    return {{"converged", e.converged},
            {"seed", c.seed},
            {"confidence", c.confidence},
            {"relative_accuracy", c.relative_accuracy},
            {"violation_confidence_each", e.violation_confidence_each},
            {"replications", e.replications},
            {"slots", e.slots},
            {"simulated_slots", e.simulated_slots},
            {"tasks", e.tasks},
            {"bounds", bj},
            {"d_ave", interval(e.d_ave)},
            {"d_sd", interval(e.d_sd)},
            {"p_off", interval(e.p_off)},
            {"p2_full", interval(e.p2_full)},
            {"admitted_rate", interval(e.admitted_rate)}};
}

}  // namespace

std::string write_csv(const CsvTable& t) {
    std::ostringstream os;
    write_row(os, t.header);
    for (const auto& r : t.rows) write_row(os, r);
    return os.str();
}

CsvTable read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> lines;
    std::vector<std::string> cur;
    std::string cell;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') cell += '"', ++i;
            else if (c == '"') quoted = false;
            else cell += c;
        } else if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            cur.push_back(cell), cell.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !cell.empty()) cur.push_back(cell);
            if (!cur.empty()) lines.push_back(cur);
            cur.clear(), cell.clear(), any = false;
        } else {
            cell += c;
            any = true;
        }
    }
    if (quoted) throw ConfigError("csv", "unterminated quoted field");
    if (any || !cell.empty()) cur.push_back(cell);
    if (!cur.empty()) lines.push_back(cur);
    if (lines.empty()) throw ConfigError("csv", "missing header");
    CsvTable t;
    t.header = lines.front();
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].size() != t.header.size())
            throw ConfigError("csv", "row " + std::to_string(k) + " has " + std::to_string(lines[k].size()) + " cells, header has " +
                                         std::to_string(t.header.size()));
        t.rows.push_back(lines[k]);
    }
    return t;
}

CsvTable series_table(const DelayCharacteristics<double>& d) {
    CsvTable t{{"n", "cpd", "pmf", "violation", "t_ms"}, {}};
    for (std::size_t n = 0; n < d.cpd.size(); ++n)
        t.rows.push_back({num(n), num(d.cpd[n]), num(d.pmf[n]), num(d.violation[n]),
                          d.dt_ms ? num(double(n) * *d.dt_ms) : std::string()});
    return t;
}

CsvTable summary_table(const RunResult& r) {
    CsvTable t{{"name", "mode", "method", "d_ave", "d_ave_little", "d_ave_rel_diff", "d_sd", "p_off", "p2_full", "lambda",
                "n_stop", "tail", "truncated", "pmf_peaks", "d_ave_ms", "d_sd_ms", "sim_d_ave", "sim_d_ave_lower",
                "sim_d_ave_upper", "sim_p_off", "sim_p2_full", "sim_converged", "sim_tasks"},
               {}};
    std::vector<std::string> row{r.config.name, run_mode_name(r.mode)};
    if (r.analysis) {
        const auto& d = r.analysis->delay;
        for (const auto& s : {std::string(method_name(r.analysis->stationary.method)), num(d.d_ave), num(d.d_ave_little),
                              num(d.d_ave_rel_diff), num(d.d_sd), num(d.p_off), num(d.p2_full), num(d.lambda), num(d.n_stop),
                              num(d.tail), flag(d.truncated), num(d.modes.peaks), opt(d.d_ave_ms()), opt(d.d_sd_ms())})
            row.push_back(s);
    } else {
        row.resize(row.size() + 14);
    }
    if (r.simulation) {
        const auto& e = *r.simulation;
        for (const auto& s : {num(e.d_ave.point), num(e.d_ave.lower), num(e.d_ave.upper), num(e.p_off.point),
                              num(e.p2_full.point), flag(e.converged), num(Index(e.tasks))})
            row.push_back(s);
    } else {
        row.resize(row.size() + 7);
    }
    t.rows.push_back(row);
    return t;
}

CsvTable bounds_table(const RunResult& r) {
    CsvTable t{{"n", "t_ms", "analytic", "sim_point", "sim_lower", "sim_upper", "inside"}, {}};
    const auto& bounds = r.config.delay_bounds;
    for (std::size_t k = 0; k < bounds.size(); ++k) {
        const int n = bounds[k];
        std::vector<std::string> row{num(n), r.config.dt_ms ? num(n * *r.config.dt_ms) : std::string()};
        row.push_back(r.analysis ? num(r.analysis->delay.violation_at(n)) : std::string());
        if (r.simulation) {
            const Interval& iv = r.simulation->violation[k];
            row.push_back(num(iv.point));
            row.push_back(num(iv.lower));
            row.push_back(num(iv.upper));
            row.push_back(r.analysis ? flag(iv.contains(r.analysis->delay.violation_at(n))) : std::string());
        } else {
            row.resize(row.size() + 4);
        }
        t.rows.push_back(row);
    }
    return t;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
    CsvTable t{{"variant", "index", "mu1", "S1", "d_ave", "d_ave_little", "d_ave_rel_diff", "d_sd", "p_off", "p2_full",
                "d_ave_ms", "d_sd_ms", "n_stop", "truncated"},
               {}};
    for (const auto& r : rows) {
        const auto ms = [&](double v) { return r.dt_ms ? num(v * *r.dt_ms) : std::string(); };
        t.rows.push_back({r.variant, num(r.index), num(r.mu1), num(r.S1), num(r.d_ave), num(r.d_ave_little),
                          num(r.d_ave_rel_diff), num(r.d_sd), num(r.p_off), num(r.p2_full), ms(r.d_ave), ms(r.d_sd),
                          num(r.n_stop), flag(r.truncated)});
    }
    return t;
}

CsvTable pmf_table(const std::vector<PmfCurve>& curves) {
    CsvTable t{{"variant", "mu1", "n", "t_ms", "pmf"}, {}};
    for (const auto& c : curves)
        for (std::size_t n = 0; n < c.pmf.size(); ++n)
            t.rows.push_back({c.variant, num(c.mu1), num(n), c.dt_ms ? num(double(n) * *c.dt_ms) : std::string(), num(c.pmf[n])});
    return t;
}

CsvTable pmf_summary_table(const std::vector<PmfCurve>& curves) {
    CsvTable t{{"variant", "index", "mu1", "S1", "mode", "peaks", "unimodal", "tail_offset", "tail_mass", "total_mass"}, {}};
    for (const auto& c : curves)
        t.rows.push_back({c.variant, num(c.index), num(c.mu1), num(c.S1), num(c.modes.mode), num(c.modes.peaks),
                          flag(c.modes.unimodal()), num(c.tail_offset), num(c.tail_mass), num(c.total_mass)});
    return t;
}

CsvTable kernel_table(const LevelKernel<double>& k) {
    CsvTable t{{"row", "col", "value", "from_i1", "from_i2", "from_mode", "to_i1", "to_i2", "to_mode"}, {}};
    const MatrixXd P = assemble(k);
    const PhaseLayout& L = k.layout();
    for (Index r = 0; r < P.rows(); ++r) {
        const State a = L.state(r);
        for (Index c = 0; c < P.cols(); ++c) {
            if (P(r, c) == 0.0) continue;
            const State b = L.state(c);
            t.rows.push_back({num(r), num(c), num(P(r, c)), num(a.i1), num(a.i2), mode_name(a.mode), num(b.i1), num(b.i2),
                              mode_name(b.mode)});
        }
    }
    return t;
}

std::string run_json(const RunResult& r) {
    json j;
    j["name"] = r.config.name;
    j["mode"] = run_mode_name(r.mode);
    j["config"] = json::parse(serialize_config(r.config));
    j["dt_ms"] = opt_json(r.config.dt_ms);
    if (r.analysis) j["analytic"] = analytic_json(*r.analysis, r.config.delay_bounds);
    if (r.simulation) j["simulation"] = simulation_json(*r.simulation, r.config.sim_config());
    if (r.analysis && r.simulation) {
        json cmp = json::array();
        for (std::size_t k = 0; k < r.config.delay_bounds.size(); ++k) {
            const int n = r.config.delay_bounds[k];
            const double w = r.analysis->delay.violation_at(n);
            const Interval& iv = r.simulation->violation[k];
            cmp.push_back({{"n", n}, {"analytic", w}, {"lower", iv.lower}, {"upper", iv.upper}, {"inside", iv.contains(w)}});
        }
        j["comparison"] = {{"bounds", cmp},
                           {"d_ave_inside", r.simulation->d_ave.contains(r.analysis->delay.d_ave)},
                           {"p_off_inside", r.simulation->p_off.contains(r.analysis->delay.p_off)}};
    }
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

std::string sweep_json(const ScenarioConfig& cfg, const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back({{"variant", r.variant},
                       {"index", r.index},
                       {"mu1", r.mu1},
                       {"S1", r.S1},
                       {"d_ave", r.d_ave},
                       {"d_ave_little", r.d_ave_little},
                       {"d_ave_rel_diff", r.d_ave_rel_diff},
                       {"d_sd", r.d_sd},
                       {"p_off", r.p_off},
                       {"p2_full", r.p2_full},
                       {"n_stop", r.n_stop},
                       {"truncated", r.truncated},
                       {"warnings", r.warnings}});
    json j;
    j["name"] = cfg.name;
    j["config"] = json::parse(serialize_config(cfg));
    j["rows"] = arr;
    j["warnings"] = cfg.warnings;
    return j.dump(2) + "\n";
}

std::string pmf_json(const ScenarioConfig& cfg, const std::vector<PmfCurve>& curves) {
    json arr = json::array();
    for (const auto& c : curves)
        arr.push_back({{"variant", c.variant},
                       {"index", c.index},
                       {"mu1", c.mu1},
                       {"S1", c.S1},
                       {"mode", c.modes.mode},
                       {"peaks", c.modes.peaks},
                       {"unimodal", c.modes.unimodal()},
                       {"tail_offset", c.tail_offset},
                       {"tail_mass", c.tail_mass},
                       {"total_mass", c.total_mass},
                       {"pmf", c.pmf}});
    json j;
    j["name"] = cfg.name;
    j["config"] = json::parse(serialize_config(cfg));
    j["curves"] = arr;
    j["warnings"] = cfg.warnings;
    return j.dump(2) + "\n";
}

}  // namespace mecdelay
