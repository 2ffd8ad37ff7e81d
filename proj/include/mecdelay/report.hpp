#pragma once

#include "mecdelay/experiments.hpp"

#include <string>
#include <vector>

namespace mecdelay {

/// Header plus string cells; the writer quotes only when needed.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    const std::string& cell(std::size_t row, const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

std::string write_csv(const CsvTable& t);
/// Parses what write_csv emits; throws ConfigError("csv") on ragged rows.
CsvTable read_csv(const std::string& text);

/// Shortest decimal that reads back to the same double.
std::string format_number(double v);

/// n, cpd, pmf, violation, t_ms (empty without Δt).
CsvTable series_table(const DelayCharacteristics<double>& d);
/// One row per config.
CsvTable summary_table(const RunResult& r);
/// Per delay bound: analytic W_n, simulated point and interval, containment.
CsvTable bounds_table(const RunResult& r);
CsvTable sweep_table(const std::vector<SweepRow>& rows);
CsvTable pmf_table(const std::vector<PmfCurve>& curves);
CsvTable pmf_summary_table(const std::vector<PmfCurve>& curves);
/// Nonzero entries of the assembled transition matrix with state labels.
CsvTable kernel_table(const LevelKernel<double>& k);

std::string run_json(const RunResult& r);
std::string sweep_json(const ScenarioConfig& cfg, const std::vector<SweepRow>& rows);
std::string pmf_json(const ScenarioConfig& cfg, const std::vector<PmfCurve>& curves);

}  // namespace mecdelay
