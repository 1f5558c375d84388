#include "phrod/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "phrod/integrator.hpp"

namespace phrod {

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);  // 17 significant digits
  return buf;
}

// FNV-1a over the serialized scenario; identifies the run in the metadata.
std::string scenario_hash(const std::string& serialized) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialized) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

Scenario load_scenario(const RunManifest& manifest) {
  Scenario sc;
  if (is_builtin_scenario(manifest.scenario_source)) {
    sc = builtin_scenario(manifest.scenario_source);
  } else if (std::filesystem::exists(manifest.scenario_source)) {
    sc = read_scenario_file(manifest.scenario_source);
  } else {
    throw ConfigError("not a built-in scenario and no such file: " + manifest.scenario_source);
  }
  for (const auto& [key, value] : manifest.overrides) apply_override(sc, key, value);
  sc.validate();
  return sc;
}

RunResult run_scenario(const Scenario& scenario) {
  RunResult result;
  result.scenario = scenario;
  RodSystem sys(scenario);
  MidpointIntegrator integrator(sys, scenario.solver);

  GlobalState state = integrator.initialize();
  result.records.push_back(make_record(state, sys, nullptr, nullptr));
  const int n = scenario.solver.n_steps();
  for (int i = 0; i < n; ++i) {
    StepStats stats;
    state = integrator.step(state, &stats);
    result.records.push_back(make_record(state, sys, &stats, &result.records.back()));
  }
  return result;
}

std::vector<std::string> csv_columns(const Scenario& scenario) {
  std::vector<std::string> cols = {
      "time", "total_energy", "external_work", "energy_increment", "power_balance"};
  if (scenario.has_viscous()) cols.push_back("dissipated_energy");
  for (int i = 1; i <= 3; ++i) cols.push_back("P_" + std::to_string(i));
  for (int i = 1; i <= 3; ++i) cols.push_back("L_" + std::to_string(i));
  for (int i = 1; i <= 3; ++i) cols.push_back("center_of_mass_" + std::to_string(i));
  if (scenario.output.analytic_center_of_mass)
    for (int i = 1; i <= 3; ++i) cols.push_back("center_of_mass_difference_" + std::to_string(i));
  for (int i = 1; i <= 3; ++i) cols.push_back("tip_position_" + std::to_string(i));
  for (int i = 1; i <= 3; ++i) cols.push_back("tip_velocity_" + std::to_string(i));
  for (int i = 1; i <= 3; ++i) cols.push_back("tip_velocity_B_" + std::to_string(i));
  cols.push_back("constraint_max");
  for (int i = 1; i <= 6; ++i) cols.push_back("mid_constraint_" + std::to_string(i));
  for (int i = 1; i <= 3; ++i) cols.push_back("strain_norm_Gamma_" + std::to_string(i));
  for (int i = 1; i <= 3; ++i) cols.push_back("strain_drift_K_" + std::to_string(i));
  cols.push_back("newton_iterations");
  for (std::size_t k = 1; k <= scenario.actuators.size(); ++k)
    cols.push_back("tau_" + std::to_string(k));
  return cols;
}

namespace {

double record_value(const StepRecord& r, const Scenario& sc, const std::string& col) {
  if (col == "time") return r.t;
  if (col == "total_energy") return r.energy;
  if (col == "external_work") return r.external_work;
  if (col == "energy_increment") return r.energy_increment;
  if (col == "power_balance") return r.power_balance;
  if (col == "dissipated_energy") return r.dissipation;
  if (col == "constraint_max") return r.constraint_max;
  if (col == "newton_iterations") return static_cast<double>(r.newton_iterations);
  auto indexed = [&](const std::string& prefix, int count) {
    if (col.rfind(prefix, 0) != 0) return -1;
    const int i = std::stoi(col.substr(prefix.size())) - 1;
    return (i >= 0 && i < count) ? i : -1;
  };
  int i;
  if ((i = indexed("P_", 3)) >= 0) return r.linear_momentum[i];
  if ((i = indexed("L_", 3)) >= 0) return r.angular_momentum[i];
  if ((i = indexed("center_of_mass_difference_", 3)) >= 0)
    return r.center_of_mass[i] - flying_spaghetti_center_of_mass(r.t)[i];
  if ((i = indexed("center_of_mass_", 3)) >= 0) return r.center_of_mass[i];
  if ((i = indexed("tip_position_", 3)) >= 0) return r.probe_position[i];
  if ((i = indexed("tip_velocity_B_", 3)) >= 0) return r.probe_velocity_body[i];
  if ((i = indexed("tip_velocity_", 3)) >= 0) return r.probe_velocity[i];
  if ((i = indexed("mid_constraint_", 6)) >= 0) return r.mid_constraint[i];
  if ((i = indexed("strain_norm_Gamma_", 3)) >= 0) return r.strain_norm_gamma[i];
  if ((i = indexed("strain_drift_K_", 3)) >= 0) return r.strain_drift_kappa[i];
  if ((i = indexed("tau_", static_cast<int>(sc.actuators.size()))) >= 0)
    return r.tau[static_cast<std::size_t>(i)];
  throw ConfigError("unknown CSV column: " + col);
}

}  // namespace

std::string format_record_row(const StepRecord& record, const Scenario& scenario,
                              const std::vector<std::string>& columns) {
  std::string row;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c > 0) row += ",";
    row += sci(record_value(record, scenario, columns[c]));
  }
  return row;
}

void run_to_csv(const Scenario& scenario, const std::string& out_path,
                const std::vector<std::string>& requested) {
  std::vector<std::string> columns = requested.empty() ? csv_columns(scenario) : requested;
  // Validate requested names against the schema.
  const std::vector<std::string> schema = csv_columns(scenario);
  for (const std::string& c : columns)
    if (std::find(schema.begin(), schema.end(), c) == schema.end())
      throw ConfigError("column not in this scenario's schema: " + c);

  std::ofstream out(out_path);
  if (!out) throw IoError("cannot open output file: " + out_path);
  const std::string serialized = serialize_scenario(scenario);
  out << "# scenario: " << scenario.name << "\n";
  out << "# scenario_hash: " << scenario_hash(serialized) << "\n";
  out << "# h: " << sci(scenario.solver.h) << "\n";
  out << "# t_end: " << sci(scenario.solver.t_end) << "\n";
  out << "# elements: " << scenario.n_elements << "\n";
  out << "# order: " << scenario.order << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c == 0 ? "" : ",") << columns[c];
  out << "\n";

  RodSystem sys(scenario);
  MidpointIntegrator integrator(sys, scenario.solver);
  GlobalState state = integrator.initialize();
  StepRecord prev = make_record(state, sys, nullptr, nullptr);
  out << format_record_row(prev, scenario, columns) << "\n";
  const int n = scenario.solver.n_steps();
  for (int i = 0; i < n; ++i) {
    try {
      StepStats stats;
      state = integrator.step(state, &stats);
      prev = make_record(state, sys, &stats, &prev);
    } catch (const SolverError& err) {
      out << "# run failed at step " << (i + 1) << ": " << err.what() << "\n";
      out.flush();
      throw;
    }
    out << format_record_row(prev, scenario, columns) << "\n";
  }
  out.flush();
  if (!out) throw IoError("failed while writing: " + out_path);
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

namespace {

struct ProbeSample {
  Vec3 position;
  Vec3 velocity;
};

ProbeSample probe_at(const Scenario& base, double h, double t_eval) {
  Scenario sc = base;
  sc.solver.h = h;
  sc.solver.t_end = t_eval;
  sc.validate();
  RodSystem sys(sc);
  MidpointIntegrator integrator(sys, sc.solver);
  GlobalState state = integrator.initialize();
  const int n = sc.solver.n_steps();
  for (int i = 0; i < n; ++i) state = integrator.step(state);
  const int probe = resolve_probe_node(sys);
  ProbeSample out;
  out.position = state.x.segment<3>(sys.layout().phi_offset(probe));
  out.velocity = state.x.segment<3>(sys.layout().vphi_offset(probe));
  return out;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested;
  if (const char* env = std::getenv("PHROD_WORKERS"); env != nullptr && n <= 0)
    n = std::atoi(env);
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  return std::min<int>(n, static_cast<int>(jobs));
}

}  // namespace

StudyResult convergence_study(const Scenario& base, const std::vector<double>& h_list,
                              double ref_h, double t_eval, int workers) {
  if (h_list.empty()) throw ConfigError("convergence study needs a non-empty h list");

  std::vector<double> hs = h_list;
  std::vector<ProbeSample> samples(hs.size() + 1);
  std::vector<double> all(hs.begin(), hs.end());
  all.push_back(ref_h);

  const int n_workers = worker_count(workers, all.size());
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    for (;;) {
      const std::size_t j = cursor.fetch_add(1);
      if (j >= all.size()) return;
      try {
        samples[j] = probe_at(base, all[j], t_eval);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  const ProbeSample ref = samples.back();
  StudyResult result;
  std::vector<double> log_h, log_ep, log_ev;
  for (std::size_t j = 0; j < hs.size(); ++j) {
    StudyPoint pt;
    pt.h = hs[j];
    pt.position_error = (samples[j].position - ref.position).norm() / ref.position.norm();
    pt.velocity_error = (samples[j].velocity - ref.velocity).norm() / ref.velocity.norm();
    result.points.push_back(pt);
    if (pt.position_error > 0.0 && pt.velocity_error > 0.0) {
      log_h.push_back(std::log(pt.h));
      log_ep.push_back(std::log(pt.position_error));
      log_ev.push_back(std::log(pt.velocity_error));
    }
  }
  if (log_h.size() >= 2) {
    result.order_position = fit_slope(log_h, log_ep);
    result.order_velocity = fit_slope(log_h, log_ev);
  }
  return result;
}

void write_study_csv(const StudyResult& result, const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot open output file: " + out_path);
  out << "# fitted_order_position: " << sci(result.order_position) << "\n";
  out << "# fitted_order_velocity: " << sci(result.order_velocity) << "\n";
  out << "h,position_error,velocity_error\n";
  for (const StudyPoint& pt : result.points)
    out << sci(pt.h) << "," << sci(pt.position_error) << "," << sci(pt.velocity_error) << "\n";
  if (!out) throw IoError("failed while writing: " + out_path);
}

}  // namespace phrod
