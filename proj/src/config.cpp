#include "mecdelay/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mecdelay {

using json = nlohmann::ordered_json;

namespace {

std::string at(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(at(path, k), "unknown field");
}

const json& need(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError(at(path, key), "missing required field");
    return j.at(key);
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

std::int64_t integer(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    const double v = number(j, path);
    if (v != std::floor(v) || std::abs(v) > 9e18) throw ConfigError(path, "expected an integer");
    return std::int64_t(v);
}

int small_int(const json& j, const std::string& path) {
    const std::int64_t v = integer(j, path);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(path, "out of range");
    return int(v);
}

MatrixXd matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty list of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) throw ConfigError(at(path, 0), "expected a nonempty row");
    const std::size_t cols = j[0].size();
    MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rp = at(path, r);
        if (!j[r].is_array()) throw ConfigError(rp, "expected a row");
        if (j[r].size() != cols) throw ConfigError(rp, "row length differs from row 0");
        for (std::size_t c = 0; c < cols; ++c) m(Index(r), Index(c)) = number(j[r][c], at(rp, c));
    }
    return m;
}

RowVectorXd row(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty list");
    RowVectorXd v(Index(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v(Index(k)) = number(j[k], at(path, k));
    return v;
}

DPhSpec dph(const json& j, const std::string& path) {
    only_keys(j, path, {"alpha", "T"});
    DPhSpec d{row(need(j, path, "alpha"), at(path, "alpha")), matrix(need(j, path, "T"), at(path, "T"))};
    d.build(path);
    return d;
}

SolveMethod parse_method(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected \"mg\" or \"direct\"");
    const auto s = j.get<std::string>();
    if (s == "direct") return SolveMethod::direct;
    if (s == "mg") return SolveMethod::matrix_geometric;
    throw ConfigError(path, "expected \"mg\" or \"direct\", got \"" + s + "\"");
}

SolverOptions solver(const json& j, const std::string& path) {
    only_keys(j, path, {"method", "tail_eps", "n_max", "mean_tail_eps"});
    SolverOptions s;
    if (j.contains("method")) s.method = parse_method(j["method"], at(path, "method"));
    if (j.contains("tail_eps")) s.tail_eps = number(j["tail_eps"], at(path, "tail_eps"));
    if (j.contains("n_max")) s.n_max = integer(j["n_max"], at(path, "n_max"));
    if (j.contains("mean_tail_eps")) s.mean_tail_eps = number(j["mean_tail_eps"], at(path, "mean_tail_eps"));
    if (!(s.tail_eps > 0.0 && s.tail_eps < 1.0)) throw ConfigError(at(path, "tail_eps"), "must lie in (0,1)");
    if (s.n_max < 1) throw ConfigError(at(path, "n_max"), "must be positive");
    if (!(s.mean_tail_eps > 0.0)) throw ConfigError(at(path, "mean_tail_eps"), "must be positive");
    return s;
}

SweepSpec sweep(const json& j, const std::string& path) {
    only_keys(j, path, {"points", "variants", "tail_offset"});
    SweepSpec s;
    const std::string pp = at(path, "points");
    const json& pts = need(j, path, "points");
    if (!pts.is_array() || pts.empty()) throw ConfigError(pp, "expected a nonempty list");
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const std::string p = at(pp, k);
        only_keys(pts[k], p, {"mu1", "S1"});
        SweepPoint pt{number(need(pts[k], p, "mu1"), at(p, "mu1")), number(need(pts[k], p, "S1"), at(p, "S1"))};
        if (!(pt.S1 >= 0.0 && pt.S1 < 1.0)) throw ConfigError(at(p, "S1"), "must lie in [0,1)");
        s.points.push_back(pt);
    }
    if (j.contains("variants")) {
        const std::string vp = at(path, "variants");
        const json& vs = j["variants"];
        if (!vs.is_array()) throw ConfigError(vp, "expected a list");
        std::set<std::string> labels;
        for (std::size_t k = 0; k < vs.size(); ++k) {
            const std::string p = at(vp, k);
            only_keys(vs[k], p, {"label", "computation"});
            const json& l = need(vs[k], p, "label");
            if (!l.is_string() || l.get<std::string>().empty()) throw ConfigError(at(p, "label"), "expected a nonempty string");
            if (!labels.insert(l.get<std::string>()).second) throw ConfigError(at(p, "label"), "duplicate label");
            s.variants.push_back({l.get<std::string>(), dph(need(vs[k], p, "computation"), at(p, "computation"))});
        }
    }
    if (j.contains("tail_offset")) s.tail_offset = small_int(j["tail_offset"], at(path, "tail_offset"));
    if (s.tail_offset < 0) throw ConfigError(at(path, "tail_offset"), "must be nonnegative");
    return s;
}

SimConfig simulation(const json& j, const std::string& path) {
    only_keys(j, path,
              {"seed", "confidence", "relative_accuracy", "warmup", "replication_slots", "min_replications", "round_size",
               "max_slots", "threads", "histogram_cap"});
    SimConfig c;
    if (j.contains("seed")) {
        const std::int64_t s = integer(j["seed"], at(path, "seed"));
        if (s < 0) throw ConfigError(at(path, "seed"), "must be nonnegative");
        c.seed = std::uint64_t(s);
    }
    if (j.contains("confidence")) c.confidence = number(j["confidence"], at(path, "confidence"));
    if (j.contains("relative_accuracy")) c.relative_accuracy = number(j["relative_accuracy"], at(path, "relative_accuracy"));
    if (j.contains("warmup")) c.warmup = integer(j["warmup"], at(path, "warmup"));
    if (j.contains("replication_slots")) c.replication_slots = integer(j["replication_slots"], at(path, "replication_slots"));
    if (j.contains("min_replications")) c.min_replications = small_int(j["min_replications"], at(path, "min_replications"));
    if (j.contains("round_size")) c.round_size = small_int(j["round_size"], at(path, "round_size"));
    if (j.contains("max_slots")) c.max_slots = integer(j["max_slots"], at(path, "max_slots"));
    if (j.contains("threads")) c.threads = small_int(j["threads"], at(path, "threads"));
    if (j.contains("histogram_cap")) c.histogram_cap = small_int(j["histogram_cap"], at(path, "histogram_cap"));
    c.validate();
    return c;
}

json to_json(const MatrixXd& m) {
    json out = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json rj = json::array();
        for (Index c = 0; c < m.cols(); ++c) rj.push_back(m(r, c));
        out.push_back(rj);
    }
    return out;
}

json to_json(const RowVectorXd& v) {
    json out = json::array();
    for (Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

json to_json(const DPhSpec& d) { return json{{"alpha", to_json(d.alpha)}, {"T", to_json(d.T)}}; }

}  // namespace

DPh<double> DPhSpec::build(const std::string& path) const {
    try {
        return DPh<double>(alpha, T);
    } catch (const ValidationError& e) {
        throw ConfigError(path, e.what());
    }
}

SystemModel ScenarioConfig::model() const {
    DMap<double> arrivals = [&] {
        try {
            return DMap<double>(D0, D1);
        } catch (const ValidationError& e) {
            throw ConfigError("arrival", e.what());
        }
    }();
    SystemModel m{std::move(arrivals), transmission.build("transmission"), computation.build("computation"),
                  vacation.build("vacation"), N1, N2};
    try {
        (void)m.layout();
    } catch (const ConfigError& e) {
        throw ConfigError("buffers", e.what());
    }
    return m;
}

AnalysisOptions<double> ScenarioConfig::analysis_options() const {
    AnalysisOptions<double> o;
    o.method = solver.method;
    o.tail.eps_tail = solver.tail_eps;
    o.tail.n_max = solver.n_max;
    o.tail.mean_tail_eps = solver.mean_tail_eps;
    o.dt_ms = dt_ms;
    return o;
}

SimConfig ScenarioConfig::sim_config() const {
    SimConfig c = simulation.value_or(SimConfig{});
    c.bounds = delay_bounds;
    return c;
}

ScenarioConfig ScenarioConfig::with_transmission(double S1) const {
    ScenarioConfig c = *this;
    c.transmission = {RowVectorXd::Ones(1), MatrixXd::Constant(1, 1, S1)};
    return c;
}

ScenarioConfig ScenarioConfig::with_computation(const DPhSpec& d) const {
    ScenarioConfig c = *this;
    c.computation = d;
    return c;
}

ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
    }
    only_keys(j, "",
              {"name", "buffers", "dt_ms", "arrival", "transmission", "computation", "vacation", "solver",
               "delay_bounds", "sweep", "simulation"});
    ScenarioConfig c;
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw ConfigError("name", "expected a string");
        c.name = j["name"].get<std::string>();
    }
    const json& b = need(j, "", "buffers");
    only_keys(b, "buffers", {"N1", "N2"});
    c.N1 = small_int(need(b, "buffers", "N1"), "buffers.N1");
    c.N2 = small_int(need(b, "buffers", "N2"), "buffers.N2");
    if (c.N1 < 1) throw ConfigError("buffers.N1", "must be at least 1");
    if (c.N2 <= c.N1) throw ConfigError("buffers.N2", "must exceed N1");
    if (j.contains("dt_ms")) {
        c.dt_ms = number(j["dt_ms"], "dt_ms");
        if (!(*c.dt_ms > 0.0)) throw ConfigError("dt_ms", "must be positive");
    }
    const json& a = need(j, "", "arrival");
    only_keys(a, "arrival", {"D0", "D1"});
    c.D0 = matrix(need(a, "arrival", "D0"), "arrival.D0");
    c.D1 = matrix(need(a, "arrival", "D1"), "arrival.D1");
    c.transmission = dph(need(j, "", "transmission"), "transmission");
    c.computation = dph(need(j, "", "computation"), "computation");
    c.vacation = dph(need(j, "", "vacation"), "vacation");
    if (j.contains("solver")) c.solver = solver(j["solver"], "solver");
    if (j.contains("delay_bounds")) {
        const json& d = j["delay_bounds"];
        if (!d.is_array()) throw ConfigError("delay_bounds", "expected a list");
        for (std::size_t k = 0; k < d.size(); ++k) {
            const int n = small_int(d[k], at("delay_bounds", k));
            if (n < 0) throw ConfigError(at("delay_bounds", k), "must be nonnegative");
            c.delay_bounds.push_back(n);
        }
    }
    if (j.contains("sweep")) c.sweep = sweep(j["sweep"], "sweep");
    if (j.contains("simulation")) c.simulation = simulation(j["simulation"], "simulation");

    (void)c.model();
    if (c.sweep)
        for (std::size_t k = 0; k < c.sweep->points.size(); ++k) {
            const auto& p = c.sweep->points[k];
            if (std::abs(p.mu1 - (1.0 - p.S1)) > 1e-6) {
                std::ostringstream os;
                os << at("sweep.points", k) << ": mu1 = " << p.mu1 << " differs from 1 - S1 = " << 1.0 - p.S1;
                c.warnings.push_back(os.str());
            }
        }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

std::string serialize_config(const ScenarioConfig& c) {
    json j;
    if (!c.name.empty()) j["name"] = c.name;
    j["buffers"] = {{"N1", c.N1}, {"N2", c.N2}};
    if (c.dt_ms) j["dt_ms"] = *c.dt_ms;
    j["arrival"] = {{"D0", to_json(c.D0)}, {"D1", to_json(c.D1)}};
    j["transmission"] = to_json(c.transmission);
    j["computation"] = to_json(c.computation);
    j["vacation"] = to_json(c.vacation);
    j["solver"] = {{"method", method_name(c.solver.method)},
                   {"tail_eps", c.solver.tail_eps},
                   {"n_max", c.solver.n_max},
                   {"mean_tail_eps", c.solver.mean_tail_eps}};
    j["delay_bounds"] = c.delay_bounds;
    if (c.sweep) {
        json pts = json::array();
        for (const auto& p : c.sweep->points) pts.push_back({{"mu1", p.mu1}, {"S1", p.S1}});
        json vs = json::array();
        for (const auto& v : c.sweep->variants) vs.push_back({{"label", v.label}, {"computation", to_json(v.computation)}});
        j["sweep"] = {{"points", pts}, {"variants", vs}, {"tail_offset", c.sweep->tail_offset}};
    }
    if (c.simulation) {
        const SimConfig& s = *c.simulation;
        j["simulation"] = {{"seed", s.seed},
                           {"confidence", s.confidence},
                           {"relative_accuracy", s.relative_accuracy},
                           {"warmup", s.warmup},
                           {"replication_slots", s.replication_slots},
                           {"min_replications", s.min_replications},
                           {"round_size", s.round_size},
                           {"max_slots", s.max_slots},
                           {"threads", s.threads},
                           {"histogram_cap", s.histogram_cap}};
    }
    return j.dump(2) + "\n";
}

}  // namespace mecdelay
