#include "phrod/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace phrod {

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void RodGeometry::validate() const {
  if (!(length > 0.0)) throw ConfigError("rod length must be positive");
  const double span = (end - start).norm();
  if (std::abs(span - length) > 1e-9 * std::max(1.0, length))
    throw ConfigError("straight reference requires |end - start| equal to the rod length");
}

void SolverSettings::validate() const {
  if (!(h > 0.0)) throw ConfigError("time step must be positive");
  if (!(eps_newton > 0.0)) throw ConfigError("Newton tolerance must be positive");
  if (max_newton_iters < 1) throw ConfigError("Newton iteration budget must be at least 1");
  n_steps();
}

int SolverSettings::n_steps() const {
  const double ratio = t_end / h;
  const int n = static_cast<int>(std::lround(ratio));
  if (n < 1 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("t_end must be a positive integer multiple of the time step");
  return n;
}

bool NodeClamp::clamps_all_frame() const {
  return std::all_of(frame.begin(), frame.end(), [](bool b) { return b; });
}

bool Scenario::has_end_load(bool at_end) const {
  const auto& f = at_end ? force_end : force_start;
  const auto& m = at_end ? moment_end : moment_start;
  return !f.empty() || !m.empty();
}

void Scenario::validate() const {
  geometry.validate();
  material.validate();
  solver.validate();
  branch_split(material, maxwell);  // checks the fraction partition
  if (n_elements < 1 || (order != 1 && order != 2))
    throw ConfigError("mesh needs at least one element of order 1 or 2");
  const int nn = n_elements * order + 1;
  for (const NodeClamp& c : dirichlet.clamps)
    if (c.node < 0 || c.node >= nn) throw ConfigError("clamped node outside the mesh");
  if (output.probe_node >= nn || output.mid_node >= nn)
    throw ConfigError("output probe references a node outside the mesh");

  // Actuator magnitude sign conventions, sampled on the time grid.
  const int n = solver.n_steps();
  for (std::size_t k = 0; k < actuators.size(); ++k) {
    const Actuator& act = actuators[k];
    for (int i = 0; i <= 2 * n; ++i) {
      const double t = 0.5 * solver.h * i;
      const double tau = act.magnitude(t);
      if (act.kind == Actuator::Kind::pneumatic && tau > 1e-12)
        throw ConfigError("pneumatic actuator " + std::to_string(k + 1) +
                          " must have non-positive magnitude");
      if (act.kind == Actuator::Kind::tendon && tau < -1e-12)
        throw ConfigError("tendon actuator " + std::to_string(k + 1) +
                          " must have non-negative magnitude");
    }
  }
}

LoadSample eval_loads(const Scenario& scenario, double t) {
  LoadSample s;
  s.force_start = eval_terms(scenario.force_start, t);
  s.moment_start = eval_terms(scenario.moment_start, t);
  s.force_end = eval_terms(scenario.force_end, t);
  s.moment_end = eval_terms(scenario.moment_end, t);
  s.distributed_force = eval_terms(scenario.distributed_force, t);
  s.distributed_moment = eval_terms(scenario.distributed_moment, t);
  s.tau.reserve(scenario.actuators.size());
  for (const Actuator& a : scenario.actuators) s.tau.push_back(a.magnitude(t));
  return s;
}

Vec3 flying_spaghetti_center_of_mass(double t) {
  double r1 = 0.0;
  if (t <= 2.5)
    r1 = 3.0 + 2.0 / 15.0 * t * t * t;
  else if (t <= 5.0)
    r1 = 43.0 / 6.0 - 5.0 * t + 2.0 * t * t - 2.0 / 15.0 * t * t * t;
  else
    r1 = -19.0 / 2.0 + 5.0 * t;
  return Vec3(r1, 0.0, 4.0);
}

// ---------------------------------------------------------------------------
// Built-in scenarios
// ---------------------------------------------------------------------------

namespace {

SignalSegment poly_segment(double t0, double t1, double c0, double c1) {
  SignalSegment s;
  s.t_begin = t0;
  s.t_end = t1;
  s.c0 = c0;
  s.c1 = c1;
  return s;
}

TimeSignal triangular_pulse() {
  // 80 t up to 2.5, then 400 - 80 t down to zero at 5; zero afterwards.
  return TimeSignal::piecewise(
      {poly_segment(0.0, 2.5, 0.0, 80.0), poly_segment(2.5, 5.0, 400.0, -80.0)});
}

TimeSignal cosine_pulse(double duration) {
  // 1/2 (1 - cos(2 pi t / duration)) on [0, duration), zero afterwards.
  SignalSegment s;
  s.t_begin = 0.0;
  s.t_end = duration;
  s.c0 = 0.5;
  s.a = -0.5;
  s.w = 2.0 * M_PI / duration;
  return TimeSignal::piecewise({s});
}

TimeSignal ramp(double t_end) { return TimeSignal::piecewise({poly_segment(0.0, t_end, 0.0, 1.0)}); }

Scenario flying_spaghetti() {
  Scenario sc;
  sc.name = "flying_spaghetti";
  sc.geometry = {10.0, Vec3(6.0, 0.0, 0.0), Vec3(0.0, 0.0, 8.0)};
  sc.material.rhoA = 1.0;
  sc.material.Mrho11 = sc.material.Mrho22 = 10.0;
  sc.material.kS1 = sc.material.kS2 = sc.material.kE = Stiffness::finite(1e4);
  sc.material.kB1 = sc.material.kB2 = sc.material.kT = Stiffness::finite(1e3);
  sc.n_elements = 10;
  sc.order = 2;
  sc.force_end = {{Vec3(0.1, 0.0, 0.0), triangular_pulse()}};
  sc.moment_end = {{Vec3(0.0, 1.0, 0.5), triangular_pulse()}};
  sc.solver.h = 0.1;
  sc.solver.t_end = 15.0;
  sc.solver.eps_newton = 1e-11;
  sc.output.probe_node = 0;  // free end used by the convergence protocol
  sc.output.analytic_center_of_mass = true;
  return sc;
}

Scenario cantilever_oscillation(bool viscous) {
  Scenario sc;
  sc.name = viscous ? "cantilever_oscillation_viscous" : "cantilever_oscillation";
  const double d = 4e-3;
  const double E = 7.2e10;
  const double nu = 0.35;
  const double G = E / (2.0 * (1.0 + nu));
  const double A = M_PI * d * d / 4.0;
  const double I = M_PI * std::pow(d, 4) / 64.0;
  const double rho = 2850.0;
  sc.geometry = {1.0, Vec3::Zero(), Vec3(1.0, 0.0, 0.0)};
  sc.material.rhoA = rho * A;
  sc.material.Mrho11 = sc.material.Mrho22 = rho * I;
  sc.material.kS1 = sc.material.kS2 = sc.material.kE = Stiffness::make_rigid();
  sc.material.kB1 = sc.material.kB2 = Stiffness::finite(E * I);
  sc.material.kT = Stiffness::finite(G * 2.0 * I);
  sc.n_elements = 8;
  sc.order = 2;
  sc.dirichlet.clamps = {NodeClamp{0}};
  sc.force_end = {{Vec3(0.0, 1.0, 1.0), cosine_pulse(0.05)}};
  sc.moment_end = {{Vec3(0.25, 0.0, 0.0), cosine_pulse(0.05)}};
  sc.solver.h = 1e-3;
  sc.solver.t_end = 0.3;
  sc.solver.eps_newton = 1e-12;
  if (viscous) sc.maxwell = {MaxwellBranch{0.75, 0.08, 0.08}};
  return sc;
}

Scenario quasistatic_cantilever(bool constrained) {
  Scenario sc;
  sc.name = constrained ? "quasistatic_cantilever_constrained" : "quasistatic_cantilever";
  const double L = 2.0 * M_PI;
  sc.geometry = {L, Vec3::Zero(), Vec3(L, 0.0, 0.0)};
  sc.material.rhoA = 0.0;
  sc.material.Mrho11 = sc.material.Mrho22 = 0.0;
  sc.material.kB1 = sc.material.kB2 = Stiffness::finite(2.0);
  sc.material.kT = Stiffness::finite(0.5);
  if (constrained) {
    sc.material.kS1 = sc.material.kS2 = sc.material.kE = Stiffness::make_rigid();
  } else {
    sc.material.kS1 = sc.material.kS2 = Stiffness::finite(1.0);
    sc.material.kE = Stiffness::finite(5.0);
  }
  sc.n_elements = 8;
  sc.order = 2;
  sc.dirichlet.clamps = {NodeClamp{0}};
  const double P = 10.0 * 2.0 / (L * L);  // 10 k_b1 / L^2
  sc.force_end = {{Vec3(0.0, -P, 0.0), ramp(1.0)}};
  sc.moment_end = {{Vec3(0.0, 0.0, 2.5 * P), ramp(1.0)}};
  sc.solver.h = 1e-2;
  sc.solver.t_end = 1.0;
  sc.solver.eps_newton = 1e-12;
  return sc;
}

Scenario soft_arm(bool heart) {
  Scenario sc;
  sc.name = heart ? "soft_arm_heart" : "soft_arm_circle";
  const double d = 0.03;
  const double E = 6e5;
  const double G = 2e5;
  const double A = M_PI * d * d / 4.0;
  const double I = M_PI * std::pow(d, 4) / 64.0;
  const double rho = 1080.0;
  const double L = 0.1755;
  sc.geometry = {L, Vec3::Zero(), Vec3(0.0, 0.0, L)};
  sc.material.rhoA = rho * A;
  sc.material.Mrho11 = sc.material.Mrho22 = rho * I;
  sc.material.kS1 = sc.material.kS2 = Stiffness::finite(G * A);
  sc.material.kE = Stiffness::finite(E * A);
  sc.material.kB1 = sc.material.kB2 = Stiffness::finite(E * I);
  sc.material.kT = Stiffness::finite(G * 2.0 * I);
  sc.n_elements = 10;
  sc.order = 2;
  sc.dirichlet.clamps = {NodeClamp{0}};
  sc.solver.h = 0.05;
  sc.solver.t_end = 4.0;
  sc.solver.eps_newton = 1e-11;

  // Chamber line-of-centroids offset; must lie inside the 3 cm cross-section.
  const double r = 6.5e-3;
  const double fmax = -50.0;
  const double t1 = 0.5, t2 = 3.5, T = 4.0;
  const double angles[3] = {M_PI / 6.0, 5.0 * M_PI / 6.0, 9.0 * M_PI / 6.0};
  for (double alpha : angles) {
    Actuator act;
    act.kind = Actuator::Kind::pneumatic;
    act.offset1 = r * std::cos(alpha);
    act.offset2 = r * std::sin(alpha);
    act.magnitude = heart
                        ? TimeSignal::named("soft_arm_pressure_heart", {fmax, T, alpha})
                        : TimeSignal::named("soft_arm_pressure", {fmax, t1, t2, T, alpha});
    sc.actuators.push_back(act);
  }
  return sc;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"flying_spaghetti",
          "cantilever_oscillation",
          "cantilever_oscillation_viscous",
          "quasistatic_cantilever",
          "quasistatic_cantilever_constrained",
          "soft_arm_circle",
          "soft_arm_heart"};
}

bool is_builtin_scenario(const std::string& name) {
  const auto names = builtin_scenario_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "flying_spaghetti") return flying_spaghetti();
  if (name == "cantilever_oscillation") return cantilever_oscillation(false);
  if (name == "cantilever_oscillation_viscous") return cantilever_oscillation(true);
  if (name == "quasistatic_cantilever") return quasistatic_cantilever(false);
  if (name == "quasistatic_cantilever_constrained") return quasistatic_cantilever(true);
  if (name == "soft_arm_circle") return soft_arm(false);
  if (name == "soft_arm_heart") return soft_arm(true);
  throw ConfigError("unknown scenario: " + name);
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_vec(const Vec3& v) { return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_num(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number: " + s);
  }
}

std::string serialize_signal(const TimeSignal& sig) {
  if (sig.is_zero()) return "zero";
  if (sig.is_named()) {
    std::string out = "named " + sig.name();
    for (double p : sig.params()) out += " " + fmt(p);
    return out;
  }
  std::string out = "piecewise";
  bool first = true;
  for (const SignalSegment& s : sig.segments()) {
    out += first ? " " : " ; ";
    first = false;
    out += fmt(s.t_begin) + " " + fmt(s.t_end) + " " + fmt(s.c0) + " " + fmt(s.c1) + " " +
           fmt(s.c2) + " " + fmt(s.c3) + " " + fmt(s.a) + " " + fmt(s.w) + " " + fmt(s.phase);
  }
  return out;
}

TimeSignal parse_signal(const std::string& text) {
  const std::string t = trim(text);
  if (t == "zero" || t.empty()) return TimeSignal::zero();
  if (t.rfind("named", 0) == 0) {
    const auto toks = split_ws(t);
    if (toks.size() < 2) throw ConfigError("named signal needs an identifier");
    std::vector<double> params;
    for (std::size_t i = 2; i < toks.size(); ++i) params.push_back(parse_num(toks[i]));
    return TimeSignal::named(toks[1], params);
  }
  if (t.rfind("piecewise", 0) == 0) {
    std::vector<SignalSegment> segs;
    std::string rest = trim(t.substr(9));
    std::istringstream in(rest);
    std::string chunk;
    while (std::getline(in, chunk, ';')) {
      const auto toks = split_ws(chunk);
      if (toks.empty()) continue;
      if (toks.size() != 9) throw ConfigError("piecewise segment needs 9 numbers");
      SignalSegment s;
      s.t_begin = parse_num(toks[0]);
      s.t_end = parse_num(toks[1]);
      s.c0 = parse_num(toks[2]);
      s.c1 = parse_num(toks[3]);
      s.c2 = parse_num(toks[4]);
      s.c3 = parse_num(toks[5]);
      s.a = parse_num(toks[6]);
      s.w = parse_num(toks[7]);
      s.phase = parse_num(toks[8]);
      segs.push_back(s);
    }
    return TimeSignal::piecewise(segs);
  }
  throw ConfigError("unknown signal form: " + t);
}

std::string serialize_load_terms(const std::vector<LoadTerm>& terms, const std::string& key) {
  std::string out;
  for (const LoadTerm& term : terms)
    out += key + " = " + fmt_vec(term.amplitude) + " ; " + serialize_signal(term.signal) + "\n";
  return out;
}

LoadTerm parse_load_term(const std::string& value) {
  const auto sep = value.find(';');
  if (sep == std::string::npos) throw ConfigError("load term needs 'amplitude ; signal'");
  const auto amp = split_ws(value.substr(0, sep));
  if (amp.size() != 3) throw ConfigError("load amplitude needs 3 components");
  LoadTerm term;
  term.amplitude = Vec3(parse_num(amp[0]), parse_num(amp[1]), parse_num(amp[2]));
  term.signal = parse_signal(value.substr(sep + 1));
  return term;
}

std::string stiffness_str(const Stiffness& k) { return k.rigid ? "rigid" : fmt(k.value); }

Stiffness parse_stiffness(const std::string& s) {
  if (trim(s) == "rigid") return Stiffness::make_rigid();
  return Stiffness::finite(parse_num(trim(s)));
}

}  // namespace

std::string serialize_scenario(const Scenario& sc) {
  std::ostringstream out;
  out << "[rod]\n";
  out << "name = " << sc.name << "\n";
  out << "length = " << fmt(sc.geometry.length) << "\n";
  out << "start = " << fmt_vec(sc.geometry.start) << "\n";
  out << "end = " << fmt_vec(sc.geometry.end) << "\n\n";

  out << "[material]\n";
  out << "rhoA = " << fmt(sc.material.rhoA) << "\n";
  out << "Mrho11 = " << fmt(sc.material.Mrho11) << "\n";
  out << "Mrho22 = " << fmt(sc.material.Mrho22) << "\n";
  out << "kS1 = " << stiffness_str(sc.material.kS1) << "\n";
  out << "kS2 = " << stiffness_str(sc.material.kS2) << "\n";
  out << "kE = " << stiffness_str(sc.material.kE) << "\n";
  out << "kB1 = " << stiffness_str(sc.material.kB1) << "\n";
  out << "kB2 = " << stiffness_str(sc.material.kB2) << "\n";
  out << "kT = " << stiffness_str(sc.material.kT) << "\n\n";

  for (std::size_t i = 0; i < sc.maxwell.size(); ++i) {
    out << "[maxwell." << (i + 1) << "]\n";
    out << "fraction = " << fmt(sc.maxwell[i].fraction) << "\n";
    out << "tauE = " << fmt(sc.maxwell[i].tauE) << "\n";
    out << "tauG = " << fmt(sc.maxwell[i].tauG) << "\n\n";
  }

  out << "[mesh]\n";
  out << "elements = " << sc.n_elements << "\n";
  out << "order = " << sc.order << "\n\n";

  out << "[dirichlet]\n";
  for (const NodeClamp& c : sc.dirichlet.clamps) {
    const bool all_pos = std::all_of(c.position.begin(), c.position.end(), [](bool b) { return b; });
    std::string what = all_pos && c.clamps_all_frame() ? "all"
                       : all_pos                       ? "position"
                                                       : "frame";
    out << "clamp = " << c.node << " " << what << "\n";
  }
  out << "\n[loads]\n";
  out << serialize_load_terms(sc.force_start, "force_start");
  out << serialize_load_terms(sc.moment_start, "moment_start");
  out << serialize_load_terms(sc.force_end, "force_end");
  out << serialize_load_terms(sc.moment_end, "moment_end");
  out << serialize_load_terms(sc.distributed_force, "distributed_force");
  out << serialize_load_terms(sc.distributed_moment, "distributed_moment");
  out << "\n";

  for (std::size_t i = 0; i < sc.actuators.size(); ++i) {
    const Actuator& a = sc.actuators[i];
    out << "[actuators." << (i + 1) << "]\n";
    out << "kind = " << (a.kind == Actuator::Kind::pneumatic ? "pneumatic" : "tendon") << "\n";
    out << "offset = " << fmt(a.offset1) << " " << fmt(a.offset2) << "\n";
    out << "signal = " << serialize_signal(a.magnitude) << "\n\n";
  }

  out << "[solver]\n";
  out << "h = " << fmt(sc.solver.h) << "\n";
  out << "t_end = " << fmt(sc.solver.t_end) << "\n";
  out << "eps = " << fmt(sc.solver.eps_newton) << "\n";
  out << "max_newton_iters = " << sc.solver.max_newton_iters << "\n";
  out << "jacobian = "
      << (sc.solver.jacobian_mode == SolverSettings::JacobianMode::analytic ? "analytic" : "fd")
      << "\n";
  out << "fd_step = " << fmt(sc.solver.fd_step) << "\n\n";

  out << "[output]\n";
  out << "probe_node = " << (sc.output.probe_node < 0 ? std::string("auto") : std::to_string(sc.output.probe_node)) << "\n";
  out << "mid_node = " << (sc.output.mid_node < 0 ? std::string("auto") : std::to_string(sc.output.mid_node)) << "\n";
  out << "analytic_com = " << (sc.output.analytic_center_of_mass ? "flying_spaghetti" : "none") << "\n";
  return out.str();
}

Scenario parse_scenario(const std::string& text, const std::string& fallback_name) {
  Scenario sc;
  sc.name = fallback_name;
  // Collected (section, key, value) triples in file order.
  std::istringstream in(text);
  std::string line, section;
  std::map<int, MaxwellBranch> maxwell;
  std::map<int, Actuator> actuators;

  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header: " + line);
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    auto parse_vec = [&](const std::string& v) {
      const auto toks = split_ws(v);
      if (toks.size() != 3) throw ConfigError("expected 3 components: " + v);
      return Vec3(parse_num(toks[0]), parse_num(toks[1]), parse_num(toks[2]));
    };

    if (section == "rod") {
      if (key == "name") sc.name = value;
      else if (key == "length") sc.geometry.length = parse_num(value);
      else if (key == "start") sc.geometry.start = parse_vec(value);
      else if (key == "end") sc.geometry.end = parse_vec(value);
      else throw ConfigError("unknown key in [rod]: " + key);
    } else if (section == "material") {
      if (key == "rhoA") sc.material.rhoA = parse_num(value);
      else if (key == "Mrho11") sc.material.Mrho11 = parse_num(value);
      else if (key == "Mrho22") sc.material.Mrho22 = parse_num(value);
      else if (key == "kS1") sc.material.kS1 = parse_stiffness(value);
      else if (key == "kS2") sc.material.kS2 = parse_stiffness(value);
      else if (key == "kE") sc.material.kE = parse_stiffness(value);
      else if (key == "kB1") sc.material.kB1 = parse_stiffness(value);
      else if (key == "kB2") sc.material.kB2 = parse_stiffness(value);
      else if (key == "kT") sc.material.kT = parse_stiffness(value);
      else throw ConfigError("unknown key in [material]: " + key);
    } else if (section.rfind("maxwell.", 0) == 0) {
      const int idx = static_cast<int>(parse_num(section.substr(8)));
      MaxwellBranch& br = maxwell[idx];
      if (key == "fraction") br.fraction = parse_num(value);
      else if (key == "tauE") br.tauE = parse_num(value);
      else if (key == "tauG") br.tauG = parse_num(value);
      else throw ConfigError("unknown key in [" + section + "]: " + key);
    } else if (section == "mesh") {
      if (key == "elements") sc.n_elements = static_cast<int>(parse_num(value));
      else if (key == "order") sc.order = static_cast<int>(parse_num(value));
      else throw ConfigError("unknown key in [mesh]: " + key);
    } else if (section == "dirichlet") {
      if (key != "clamp") throw ConfigError("unknown key in [dirichlet]: " + key);
      const auto toks = split_ws(value);
      if (toks.size() != 2) throw ConfigError("clamp needs '<node> <all|position|frame>'");
      NodeClamp c;
      c.node = static_cast<int>(parse_num(toks[0]));
      if (toks[1] == "all") {
      } else if (toks[1] == "position") {
        c.frame.fill(false);
      } else if (toks[1] == "frame") {
        c.position.fill(false);
      } else {
        throw ConfigError("clamp kind must be all, position or frame");
      }
      sc.dirichlet.clamps.push_back(c);
    } else if (section == "loads") {
      if (key == "force_start") sc.force_start.push_back(parse_load_term(value));
      else if (key == "moment_start") sc.moment_start.push_back(parse_load_term(value));
      else if (key == "force_end") sc.force_end.push_back(parse_load_term(value));
      else if (key == "moment_end") sc.moment_end.push_back(parse_load_term(value));
      else if (key == "distributed_force") sc.distributed_force.push_back(parse_load_term(value));
      else if (key == "distributed_moment") sc.distributed_moment.push_back(parse_load_term(value));
      else throw ConfigError("unknown key in [loads]: " + key);
    } else if (section.rfind("actuators.", 0) == 0) {
      const int idx = static_cast<int>(parse_num(section.substr(10)));
      Actuator& a = actuators[idx];
      if (key == "kind") {
        if (value == "pneumatic") a.kind = Actuator::Kind::pneumatic;
        else if (value == "tendon") a.kind = Actuator::Kind::tendon;
        else throw ConfigError("actuator kind must be pneumatic or tendon");
      } else if (key == "offset") {
        const auto toks = split_ws(value);
        if (toks.size() != 2) throw ConfigError("actuator offset needs 2 components");
        a.offset1 = parse_num(toks[0]);
        a.offset2 = parse_num(toks[1]);
      } else if (key == "signal") {
        a.magnitude = parse_signal(value);
      } else {
        throw ConfigError("unknown key in [" + section + "]: " + key);
      }
    } else if (section == "solver") {
      if (key == "h") sc.solver.h = parse_num(value);
      else if (key == "t_end") sc.solver.t_end = parse_num(value);
      else if (key == "eps") sc.solver.eps_newton = parse_num(value);
      else if (key == "max_newton_iters") sc.solver.max_newton_iters = static_cast<int>(parse_num(value));
      else if (key == "jacobian") {
        if (value == "analytic") sc.solver.jacobian_mode = SolverSettings::JacobianMode::analytic;
        else if (value == "fd") sc.solver.jacobian_mode = SolverSettings::JacobianMode::finite_difference;
        else throw ConfigError("jacobian must be analytic or fd");
      } else if (key == "fd_step") sc.solver.fd_step = parse_num(value);
      else throw ConfigError("unknown key in [solver]: " + key);
    } else if (section == "output") {
      if (key == "probe_node") sc.output.probe_node = (value == "auto") ? -1 : static_cast<int>(parse_num(value));
      else if (key == "mid_node") sc.output.mid_node = (value == "auto") ? -1 : static_cast<int>(parse_num(value));
      else if (key == "analytic_com") sc.output.analytic_center_of_mass = (value == "flying_spaghetti");
      else throw ConfigError("unknown key in [output]: " + key);
    } else {
      throw ConfigError("unknown section: [" + section + "]");
    }
  }

  for (auto& [idx, br] : maxwell) sc.maxwell.push_back(br);
  for (auto& [idx, a] : actuators) sc.actuators.push_back(a);
  sc.validate();
  return sc;
}

Scenario read_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  const auto slash = stem.find_last_of('/');
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const auto dot = stem.find_last_of('.');
  if (dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_scenario(buf.str(), stem);
}

void write_scenario_file(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << serialize_scenario(scenario);
  if (!out) throw IoError("failed while writing scenario file: " + path);
}

void apply_override(Scenario& sc, const std::string& key, const std::string& value) {
  if (key == "h") sc.solver.h = parse_num(value);
  else if (key == "t_end") sc.solver.t_end = parse_num(value);
  else if (key == "eps") sc.solver.eps_newton = parse_num(value);
  else if (key == "max_newton_iters") sc.solver.max_newton_iters = static_cast<int>(parse_num(value));
  else if (key == "fd_step") sc.solver.fd_step = parse_num(value);
  else if (key == "n_e") sc.n_elements = static_cast<int>(parse_num(value));
  else if (key == "p") sc.order = static_cast<int>(parse_num(value));
  else if (key == "jacobian_mode") {
    if (value == "analytic") sc.solver.jacobian_mode = SolverSettings::JacobianMode::analytic;
    else if (value == "fd") sc.solver.jacobian_mode = SolverSettings::JacobianMode::finite_difference;
    else throw ConfigError("jacobian_mode must be analytic or fd");
  } else {
    throw ConfigError("unknown override key: " + key);
  }
}

}  // namespace phrod
