#pragma once

#include <rouf/analyzer/space.hpp>
#include <rouf/error.hpp>
#include <rouf/ml/classifier.hpp>
#include <rouf/trace.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// Synthetic automatic emergency braking system: a subject vehicle closing on a
// stationary obstacle. A radar sees the obstacle within `radar_range`; beyond it
// detection comes from the ML perception component (or one of its abstractions).

namespace rouf::cps {

struct AebsParams {
  double dt = 0.1;
  double horizon = 10.0;
  double radar_range = 30.0;
  double ttc_warning = 4.0;     // TTC at or below this: warning
  double ttc_braking = 3.0;     // at or below: partial braking
  double ttc_mitigation = 1.0;  // at or below: full braking
  double decel_braking = 3.0;
  double decel_mitigation = 5.0;
  double v_max = 17.9;
  double d_max = 60.0;

  void validate() const {
    auto pos = [](double v, const char* what) {
      if (!std::isfinite(v) || !(v > 0)) throw ConfigError(std::string(what) + " must be a positive number");
    };
    pos(dt, "dt");
    pos(horizon, "horizon");
    pos(radar_range, "radar_range");
    pos(ttc_mitigation, "ttc_mitigation");
    pos(decel_braking, "decel_braking");
    pos(decel_mitigation, "decel_mitigation");
    pos(v_max, "v_max");
    pos(d_max, "d_max");
    if (horizon < dt) throw ConfigError("horizon must cover at least one step");
    if (!(ttc_mitigation < ttc_braking && ttc_braking <= ttc_warning)) {
      throw ConfigError("TTC thresholds must satisfy mitigation < braking <= warning");
    }
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)) + 1; }
};

enum class Mode { kSafe = 0, kWarning = 1, kBraking = 2, kMitigation = 3 };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::kSafe: return "safe";
    case Mode::kWarning: return "warning";
    case Mode::kBraking: return "braking";
    case Mode::kMitigation: return "mitigation";
  }
  return "?";
}

/// Optimistic abstraction: detection always equals the ground truth.
struct Perfect {};
/// Pessimistic abstraction: detection is always the negation of the ground truth.
struct AlwaysWrong {};
/// The real perception component: classify gamma(scene); label 1 means obstacle seen.
struct Concrete {
  ml::ClassifierPtr classifier;
  analyzer::Concretizer gamma;
  std::optional<std::size_t> distance_dim;  // abstract axis slaved to the gap
};

using MLMode = std::variant<Perfect, AlwaysWrong, Concrete>;

inline const char* ml_mode_name(const MLMode& m) {
  if (std::holds_alternative<Perfect>(m)) return "perfect";
  if (std::holds_alternative<AlwaysWrong>(m)) return "always-wrong";
  return "concrete";
}

enum class SceneMode { kStatic, kTracked };

/// Abstract scene. The distance axis (if any) is overwritten from the gap:
/// with d0 once (static, one picture per run) or with the live gap every step (tracked).
struct Scene {
  std::vector<double> point;
  SceneMode mode = SceneMode::kStatic;
};

struct AebsModel {
  AebsParams params;
  MLMode ml = Perfect{};
  bool obstacle = true;  // ground truth of every scene
};

/// Same plant and controller with the detection source swapped.
inline AebsModel make_variant(const AebsModel& model, MLMode ml) {
  AebsModel out = model;
  out.ml = std::move(ml);
  return out;
}

namespace detail {

inline Mode controller_mode(const AebsParams& p, bool detected, double v, double dist) {
  if (!detected) return Mode::kSafe;
  const double ttc = dist / std::max(v, 1e-6);
  if (ttc <= p.ttc_mitigation) return Mode::kMitigation;
  if (ttc <= p.ttc_braking) return Mode::kBraking;
  if (ttc <= p.ttc_warning) return Mode::kWarning;
  return Mode::kSafe;
}

inline double acceleration(const AebsParams& p, Mode m) {
  switch (m) {
    case Mode::kBraking: return -p.decel_braking;
    case Mode::kMitigation: return -p.decel_mitigation;
    default: return 0.0;
  }
}

class Perception {
 public:
  Perception(const AebsModel& model, double d0, const Scene& scene) : model_(model), scene_(scene), d0_(d0) {
    if (const auto* c = std::get_if<Concrete>(&model.ml)) {
      if (!c->classifier) throw ConfigError("concrete perception needs a classifier");
      const std::size_t n = c->gamma.arity();
      if (scene.point.size() != n) {
        throw InputError("scene has " + std::to_string(scene.point.size()) + " coordinates, the abstract space has " +
                         std::to_string(n));
      }
      for (double a : scene.point) {
        if (!(a >= 0 && a <= 1)) throw InputError("scene coordinates must lie in [0,1]");
      }
      if (c->distance_dim && *c->distance_dim >= n) throw ConfigError("distance dimension out of range");
    }
  }

  bool detected(double dist) {
    if (dist <= model_.params.radar_range) return true;
    if (std::holds_alternative<Perfect>(model_.ml)) return model_.obstacle;
    if (std::holds_alternative<AlwaysWrong>(model_.ml)) return !model_.obstacle;
    const auto& c = std::get<Concrete>(model_.ml);
    if (scene_.mode == SceneMode::kStatic) {
      if (!cached_) cached_ = classify(c, d0_);
      return *cached_;
    }
    return classify(c, dist);
  }

 private:
  bool classify(const Concrete& c, double gap) const {
    std::vector<double> a = scene_.point;
    if (c.distance_dim) {
      a[*c.distance_dim] = std::clamp(c.gamma.space().normalized_value(*c.distance_dim, gap), 0.0, 1.0);
    }
    return c.classifier->classify(c.gamma(a)).label == 1;
  }

  const AebsModel& model_;
  const Scene& scene_;
  double d0_;
  std::optional<bool> cached_;
};

}  // namespace detail

/// Simulates from speed v0 (m/s) and gap d0 (m). The trace carries v_s and dist
/// (linear), mode (0 safe .. 3 mitigation, hold) and detected (0/1, hold). Once the
/// gap reaches zero the collision is latched and every signal holds its value.
inline Trace simulate(const AebsModel& model, double v0, double d0, const Scene& scene = {}) {
  const AebsParams& p = model.params;
  p.validate();
  if (!std::isfinite(v0) || v0 < 0 || v0 > p.v_max) {
    throw InputError("v0 = " + std::to_string(v0) + " m/s outside [0, " + std::to_string(p.v_max) + "]");
  }
  if (!std::isfinite(d0) || d0 < 0 || d0 > p.d_max) {
    throw InputError("d0 = " + std::to_string(d0) + " m outside [0, " + std::to_string(p.d_max) + "]");
  }
  detail::Perception perception(model, d0, scene);

  const std::size_t n = p.steps();
  std::vector<double> vs(n), dist(n), mode(n), det(n);
  double v = v0, d = d0;
  bool collided = d <= 0;
  double last_mode = 0, last_det = 0;
  for (std::size_t k = 0; k < n; ++k) {
    vs[k] = v;
    dist[k] = d;
    if (collided && k > 0) {
      mode[k] = last_mode;
      det[k] = last_det;
      continue;
    }
    const bool seen = perception.detected(d);
    const Mode m = detail::controller_mode(p, seen, v, d);
    mode[k] = last_mode = static_cast<double>(m);
    det[k] = last_det = seen ? 1.0 : 0.0;
    if (collided) continue;
    v = std::max(0.0, v + detail::acceleration(p, m) * p.dt);
    d -= v * p.dt;
    collided = d <= 0;
  }

  TimeGrid grid(0.0, p.dt, n);
  Trace trace(grid);
  trace.add(Signal("v_s", grid, std::move(vs), Interp::kLinear));
  trace.add(Signal("dist", grid, std::move(dist), Interp::kLinear));
  trace.add(Signal("mode", grid, std::move(mode), Interp::kHold));
  trace.add(Signal("detected", grid, std::move(det), Interp::kHold));
  return trace;
}

/// Interpolation modes of the AEBS trace signals, for re-reading exported traces.
inline InterpMap trace_interp() { return {{"mode", Interp::kHold}, {"detected", Interp::kHold}}; }

inline const std::vector<std::string>& trace_signal_names() {
  static const std::vector<std::string> names{"v_s", "dist", "mode", "detected"};
  return names;
}

}  // namespace rouf::cps
