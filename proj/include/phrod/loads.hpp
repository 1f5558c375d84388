#ifndef PHROD_LOADS_HPP
#define PHROD_LOADS_HPP

#include <string>
#include <vector>

#include "phrod/types.hpp"

namespace phrod {

// One piece of a piecewise time signal on [t_begin, t_end):
//   c0 + c1 t + c2 t^2 + c3 t^3 + a cos(w t + phase)
struct SignalSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double a = 0.0, w = 0.0, phase = 0.0;

  double eval(double t) const;
};

// Scalar function of time. Either a piecewise polynomial/cosine signal
// (half-open pieces [a,b), final piece closed, zero outside) or a named
// closed form from the registry below.
class TimeSignal {
public:
  TimeSignal() = default;

  static TimeSignal zero();
  static TimeSignal constant(double c);
  static TimeSignal piecewise(std::vector<SignalSegment> segments);
  static TimeSignal named(std::string id, std::vector<double> params);

  double operator()(double t) const;

  bool is_zero() const;
  bool is_named() const { return !name_.empty(); }
  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<SignalSegment>& segments() const { return segments_; }

private:
  std::vector<SignalSegment> segments_;
  std::string name_;
  std::vector<double> params_;
};

// Named closed forms used by the built-in scenarios.
//   soft_arm_pressure(params = {f_max, t1, t2, T, alpha}):
//     chamber pressure force 1/2 f(t) (1 + cos(phi(t) - alpha)) with the
//     ramp/rotate/return amplitude and phase profiles.
//   soft_arm_pressure_heart(params = {f_max, T, alpha}):
//     same chamber force driven by the normalized heart-path radius and its
//     atan2 phase angle.
double eval_named_signal(const std::string& id, const std::vector<double>& params, double t);

// Heart path helpers (exposed for tests): x = sin^3, y = cos - cos(2.),
// radius normalized to unit maximum.
double heart_radius(double theta);
double heart_radius_max();
double heart_phase(double theta);

// A load contribution amplitude * signal(t).
struct LoadTerm {
  Vec3 amplitude = Vec3::Zero();
  TimeSignal signal;

  Vec3 eval(double t) const { return amplitude * signal(t); }
};

Vec3 eval_terms(const std::vector<LoadTerm>& terms, double t);

}  // namespace phrod

#endif
