#pragma once

#include "mecdelay/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mecdelay {

enum class RunMode { analytic, simulate, both };

RunMode parse_run_mode(const std::string& s);
const char* run_mode_name(RunMode m);

struct RunResult {
    ScenarioConfig config;
    RunMode mode = RunMode::analytic;
    std::optional<Analysis<double>> analysis;
    std::optional<SimEstimates> simulation;
    std::vector<std::string> warnings;
};

RunResult run(const ScenarioConfig& cfg, RunMode mode);

/// One sweep grid point of one variant.
struct SweepRow {
    std::string variant;
    std::size_t index = 0;
    double mu1 = 0.0, S1 = 0.0;
    double d_ave = 0.0, d_ave_little = 0.0, d_ave_rel_diff = 0.0, d_sd = 0.0;
    double p_off = 0.0, p2_full = 0.0;
    Index n_stop = 0;
    bool truncated = false;
    std::optional<double> dt_ms;
    std::vector<std::string> warnings;
};

struct PmfCurve {
    std::string variant;
    std::size_t index = 0;
    double mu1 = 0.0, S1 = 0.0;
    std::vector<double> pmf;  ///< PW_n, n = 0..n_stop
    ModeInfo modes;
    int tail_offset = 0;
    double tail_mass = 0.0;  ///< sum of PW_n for n > mode + tail_offset
    double total_mass = 0.0;
    std::optional<double> dt_ms;
};

/// Grid points of every variant in (variant, point) order, evaluated on a
/// worker pool. Requires a sweep section.
std::vector<SweepRow> sweep(const ScenarioConfig& cfg, int threads = 0);
std::vector<PmfCurve> pmf_series(const ScenarioConfig& cfg, int threads = 0);

}  // namespace mecdelay
