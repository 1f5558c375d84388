#include "phrod/loads.hpp"

#include <cmath>
#include <limits>

namespace phrod {

double SignalSegment::eval(double t) const {
  double v = c0 + t * (c1 + t * (c2 + t * c3));
  if (a != 0.0) v += a * std::cos(w * t + phase);
  return v;
}

TimeSignal TimeSignal::zero() { return TimeSignal(); }

TimeSignal TimeSignal::constant(double c) {
  SignalSegment s;
  s.t_begin = 0.0;
  s.t_end = std::numeric_limits<double>::infinity();
  s.c0 = c;
  return piecewise({s});
}

TimeSignal TimeSignal::piecewise(std::vector<SignalSegment> segments) {
  TimeSignal f;
  f.segments_ = std::move(segments);
  return f;
}

TimeSignal TimeSignal::named(std::string id, std::vector<double> params) {
  TimeSignal f;
  f.name_ = std::move(id);
  f.params_ = std::move(params);
  return f;
}

double TimeSignal::operator()(double t) const {
  if (!name_.empty()) return eval_named_signal(name_, params_, t);
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const SignalSegment& s = segments_[i];
    const bool last = (i + 1 == segments_.size());
    if (t >= s.t_begin && (t < s.t_end || (last && t <= s.t_end))) return s.eval(t);
  }
  return 0.0;
}

bool TimeSignal::is_zero() const { return name_.empty() && segments_.empty(); }

namespace {

// Amplitude/phase profiles of the soft-arm maneuver: ramp up over [0,t1],
// rotate at constant amplitude over (t1,t2], ramp down over (t2,T].
double soft_arm_amplitude(double fmax, double t1, double t2, double T, double t) {
  if (t <= t1) return 0.5 * fmax * (1.0 - std::cos(M_PI * t / t1));
  if (t <= t2) return fmax;
  if (t <= T) return 0.5 * fmax * (1.0 + std::cos(M_PI * (t - t2) / (T - t2)));
  return 0.0;
}

double soft_arm_phase(double t1, double t2, double T, double t) {
  if (t <= t1) return 0.0;
  if (t <= t2) return M_PI * (1.0 - std::cos(M_PI * (t - t1) / (t2 - t1)));
  (void)T;
  return 2.0 * M_PI;
}

}  // namespace

double heart_radius(double theta) {
  const double x = std::pow(std::sin(theta), 3);
  const double y = std::cos(theta) - std::cos(2.0 * theta);
  return std::hypot(x, y);
}

double heart_radius_max() {
  // The maximum sits at theta = pi where the radius equals 2; keep the
  // computed search so the normalization stays honest if the path changes.
  static const double rmax = [] {
    double best = 0.0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) best = std::max(best, heart_radius(2.0 * M_PI * i / n));
    return best;
  }();
  return rmax;
}

double heart_phase(double theta) {
  const double x = std::pow(std::sin(theta), 3);
  const double y = std::cos(theta) - std::cos(2.0 * theta);
  return std::atan2(y, x);
}

double eval_named_signal(const std::string& id, const std::vector<double>& params, double t) {
  if (id == "soft_arm_pressure") {
    if (params.size() != 5) throw ConfigError("soft_arm_pressure needs 5 parameters");
    const double fmax = params[0], t1 = params[1], t2 = params[2], T = params[3],
                 alpha = params[4];
    const double f = soft_arm_amplitude(fmax, t1, t2, T, t);
    const double phi = soft_arm_phase(t1, t2, T, t);
    return 0.5 * f * (1.0 + std::cos(phi - alpha));
  }
  if (id == "soft_arm_pressure_heart") {
    if (params.size() != 3) throw ConfigError("soft_arm_pressure_heart needs 3 parameters");
    const double fmax = params[0], T = params[1], alpha = params[2];
    const double theta = 2.0 * M_PI * t / T;
    const double f = fmax * heart_radius(theta) / heart_radius_max();
    const double phi = heart_phase(theta);
    return 0.5 * f * (1.0 + std::cos(phi - alpha));
  }
  throw ConfigError("unknown named signal: " + id);
}

Vec3 eval_terms(const std::vector<LoadTerm>& terms, double t) {
  Vec3 v = Vec3::Zero();
  for (const auto& term : terms) v += term.eval(t);
  return v;
}

}  // namespace phrod
