#pragma once

#include "mecdelay/delay.hpp"
#include "mecdelay/model.hpp"
#include "mecdelay/simulator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mecdelay {

/// (alpha, T) as written in a config document.
struct DPhSpec {
    RowVectorXd alpha;
    MatrixXd T;

    DPh<double> build(const std::string& path) const;
};

struct SolverOptions {
    SolveMethod method = SolveMethod::direct;
    double tail_eps = 1e-10;
    Index n_max = 100000;
    double mean_tail_eps = 1e-6;
};

struct SweepPoint {
    double mu1 = 0.0;
    double S1 = 0.0;
};

/// One curve of a sweep: the base system with another computation time.
struct SweepVariant {
    std::string label;
    DPhSpec computation;
};

struct SweepSpec {
    std::vector<SweepPoint> points;
    std::vector<SweepVariant> variants;  ///< empty: base computation only
    int tail_offset = 20;                ///< PMF tail measured beyond mode + offset
};

struct ScenarioConfig {
    std::string name;
    int N1 = 0, N2 = 0;
    std::optional<double> dt_ms;
    MatrixXd D0, D1;
    DPhSpec transmission, computation, vacation;
    SolverOptions solver;
    std::vector<int> delay_bounds;
    std::optional<SweepSpec> sweep;
    std::optional<SimConfig> simulation;

    /// Non-fatal findings from parsing, e.g. mu1 != 1 - S1.
    std::vector<std::string> warnings;

    SystemModel model() const;
    AnalysisOptions<double> analysis_options() const;
    /// Simulation settings with the delay bounds filled in.
    SimConfig sim_config() const;

    /// Copy with the transmission time replaced by a one-phase D-PH.
    ScenarioConfig with_transmission(double S1) const;
    ScenarioConfig with_computation(const DPhSpec& c) const;
};

/// Parses a JSON document. Errors carry the field path.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);

std::vector<std::string> preset_names();
/// Embedded preset by name; throws ConfigError for unknown names.
ScenarioConfig preset(const std::string& name);
std::string preset_text(const std::string& name);

}  // namespace mecdelay
