#ifndef PHROD_RUNNER_HPP
#define PHROD_RUNNER_HPP

#include <string>
#include <vector>

#include "phrod/diagnostics.hpp"
#include "phrod/scenario.hpp"

namespace phrod {

struct RunManifest {
  std::string scenario_source;  // built-in name or scenario file path
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string out_path;               // empty: derived from the scenario name
  std::vector<std::string> columns;   // empty: all columns
  // Convergence study parameters.
  std::vector<double> h_list;
  double ref_h = 1e-3;
  double t_eval = 5.0;
};

Scenario load_scenario(const RunManifest& manifest);

struct RunResult {
  Scenario scenario;
  std::vector<StepRecord> records;
};

// Integrates the scenario over its full time grid.
RunResult run_scenario(const Scenario& scenario);

// Column names for a scenario (a pure function of its features).
std::vector<std::string> csv_columns(const Scenario& scenario);

// Streams records to CSV at out_path; on solver failure the partial file is
// flushed with a failure marker comment and the error rethrown.
void run_to_csv(const Scenario& scenario, const std::string& out_path,
                const std::vector<std::string>& columns);

std::string format_record_row(const StepRecord& record, const Scenario& scenario,
                              const std::vector<std::string>& columns);

struct StudyPoint {
  double h = 0.0;
  double position_error = 0.0;
  double velocity_error = 0.0;
};

struct StudyResult {
  std::vector<StudyPoint> points;
  double order_position = 0.0;  // least-squares slope in log-log
  double order_velocity = 0.0;
};

// Probe-node position/velocity errors against a fine reference at t_eval.
// Runs execute in parallel across `workers` threads (0: hardware default,
// overridable via the PHROD_WORKERS environment variable).
StudyResult convergence_study(const Scenario& base, const std::vector<double>& h_list,
                              double ref_h, double t_eval, int workers = 0);

void write_study_csv(const StudyResult& result, const std::string& out_path);

}  // namespace phrod

#endif
