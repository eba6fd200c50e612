#pragma once

// Fixed-step RK4 integration, omega-limit labelling, basin maps and
// vector-field sampling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "modgame/analysis.hpp"
#include "modgame/game_core.hpp"

namespace modgame {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultStep = 1e-2;
inline constexpr double kDefaultHorizon = 1e4;
inline constexpr double kConvergedSpeed = 1e-9;
inline constexpr double kCaptureRadius = 1e-3;
inline constexpr double kClampTolerance = 1e-9;
inline constexpr double kSeparatrixGuard = 1e-9;

template <std::size_t N>
using Vector = std::array<double, N>;

namespace detail {

template <std::size_t N>
Vector<N> axpy(const Vector<N>& y, double h, const Vector<N>& k) {
  Vector<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * k[i];
  return out;
}

template <std::size_t N>
void require_finite(const Vector<N>& v, double dt) {
  for (double c : v) {
    if (!std::isfinite(c)) {
      std::ostringstream os;
      os << "non-finite value in RK4 stage (dt = " << dt << ", state = [";
      for (std::size_t i = 0; i < N; ++i) os << (i ? ", " : "") << v[i];
      os << "])";
      throw IntegrationError(os.str());
    }
  }
}

inline Vector<2> to_vector(const ReducedState& s) { return {s.x, s.z}; }
inline ReducedState to_reduced(const Vector<2>& v) { return {v[0], v[1]}; }
inline Vector<4> to_vector(const FullState& s) { return {s.xi[0], s.xi[1], s.eta[0], s.eta[1]}; }
inline FullState to_full(const Vector<4>& v) { return {{v[0], v[1]}, {v[2], v[3]}}; }

/// Distance by which v lies outside [0,1].
inline double excursion(double v) { return v < 0.0 ? -v : (v > 1.0 ? v - 1.0 : 0.0); }

}  // namespace detail

/// Classical Runge-Kutta increment y(t + dt) - y(t) on a raw vector, given
/// k1 = f(y). Throws IntegrationError if any stage is non-finite.
template <std::size_t N, class Field>
Vector<N> rk4_increment_from(const Field& f, const Vector<N>& y, const Vector<N>& k1, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  detail::require_finite(k1, dt);
  const Vector<N> k2 = f(detail::axpy(y, 0.5 * dt, k1));
  detail::require_finite(k2, dt);
  const Vector<N> k3 = f(detail::axpy(y, 0.5 * dt, k2));
  detail::require_finite(k3, dt);
  const Vector<N> k4 = f(detail::axpy(y, dt, k3));
  detail::require_finite(k4, dt);
  Vector<N> d;
  for (std::size_t i = 0; i < N; ++i) d[i] = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  detail::require_finite(d, dt);
  return d;
}

/// One classical Runge-Kutta step on a raw vector, given k1 = f(y).
template <std::size_t N, class Field>
Vector<N> rk4_step_from(const Field& f, const Vector<N>& y, const Vector<N>& k1, double dt) {
  const Vector<N> d = rk4_increment_from(f, y, k1, dt);
  Vector<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + d[i];
  detail::require_finite(out, dt);
  return out;
}

template <std::size_t N, class Field>
Vector<N> rk4_step(const Field& f, const Vector<N>& y, double dt) {
  return rk4_step_from(f, y, f(y), dt);
}

/// State plus a running TwoSum rounding-error term.
template <std::size_t N>
struct CompensatedVector {
  Vector<N> hi{};
  Vector<N> lo{};

  void add(const Vector<N>& d) {
    for (std::size_t i = 0; i < N; ++i) {
      const double b = d[i] + lo[i];
      const double s = hi[i] + b;
      const double bb = s - hi[i];
      lo[i] = (hi[i] - (s - bb)) + (b - bb);
      hi[i] = s;
    }
  }

  /// Replaces hi by a projected copy; the error term survives only where
  /// the projection left the coordinate untouched.
  void reset_where_changed(const Vector<N>& projected) {
    for (std::size_t i = 0; i < N; ++i) {
      if (projected[i] != hi[i]) lo[i] = 0.0;
      hi[i] = projected[i];
    }
  }
};

/// Clamps every coordinate to [0,1]; returns the largest excursion removed.
template <std::size_t N>
double clamp_to_box(Vector<N>& v) {
  double worst = 0.0;
  for (double& c : v) {
    worst = std::max(worst, detail::excursion(c));
    c = std::clamp(c, 0.0, 1.0);
  }
  return worst;
}

/// Field on the reduced state: ReducedState -> ReducedState.
template <class Field>
concept ReducedField = requires(const Field& f, const ReducedState& s) {
  { f(s) } -> std::convertible_to<ReducedState>;
};

template <class Field>
concept FullField = requires(const Field& f, const FullState& s) {
  { f(s) } -> std::convertible_to<FullState>;
};

namespace detail {

/// Maps a raw RK4 result back onto the state space; returns the clamped-off excursion.
inline double project(Vector<2>& v) { return clamp_to_box(v); }

inline double project(Vector<4>& v) {
  const double ex = clamp_to_box(v);
  for (std::size_t k = 0; k < 4; k += 2) {
    const double sum = v[k] + v[k + 1];
    if (!(sum > 0.0)) throw IntegrationError("population pair collapsed to zero mass");
    v[k] /= sum;
    v[k + 1] /= sum;
  }
  return ex;
}

inline ReducedState from_vector(const Vector<2>& v) { return to_reduced(v); }
inline FullState from_vector(const Vector<4>& v) { return to_full(v); }

template <class Field>
auto raw_field(const Field& f) {
  return [&f](const auto& v) { return to_vector(f(from_vector(v))); };
}


}  // namespace detail

/// RK4 step on (x, z) followed by a clamp to the unit box. The clamped-off
/// amount is reported through `excursion` when given.
template <ReducedField Field>
ReducedState step_rk4(const Field& f, const ReducedState& s, double dt,
                      double* excursion = nullptr) {
  Vector<2> next = rk4_step(detail::raw_field(f), detail::to_vector(s), dt);
  const double ex = detail::project(next);
  if (excursion) *excursion = ex;
  return detail::to_reduced(next);
}

/// RK4 step on (xi, eta) followed by clamping and renormalising each pair.
template <FullField Field>
FullState step_rk4(const Field& f, const FullState& s, double dt, double* excursion = nullptr) {
  Vector<4> next = rk4_step(detail::raw_field(f), detail::to_vector(s), dt);
  const double ex = detail::project(next);
  if (excursion) *excursion = ex;
  return detail::to_full(next);
}

/// Unchecked reduced field of the standard model, for integrators.
inline auto reduced_field(const ModelParams& p) {
  return [n = p.np(), a = p.a()](const ReducedState& s) { return detail::reduced_rhs(n, a, s); };
}

inline auto coupled_field(const GameMatrices& g, double n_p) {
  return [g, n_p](const FullState& s) { return detail::coupled_rhs(g, n_p, s); };
}

// ---------------------------------------------------------------------------
// Outcomes

enum class Outcome { utopia, dystopia, corner01, corner10, unresolved };

inline constexpr std::array<Outcome, 5> kAllOutcomes{Outcome::utopia, Outcome::dystopia,
                                                     Outcome::corner01, Outcome::corner10,
                                                     Outcome::unresolved};

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::utopia: return "utopia";
    case Outcome::dystopia: return "dystopia";
    case Outcome::corner01: return "corner01";
    case Outcome::corner10: return "corner10";
    case Outcome::unresolved: break;
  }
  return "unresolved";
}

inline std::optional<Outcome> outcome_from_string(std::string_view s) {
  for (Outcome o : kAllOutcomes) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

/// A fixed point the omega-limit search can settle on.
struct Attractor {
  ReducedState point;
  bool stable = false;
  Outcome label = Outcome::unresolved;
};

inline Outcome corner_label(const ReducedState& p) {
  if (p.x == 1.0 && p.z == 1.0) return Outcome::utopia;
  if (p.x == 0.0 && p.z == 0.0) return Outcome::dystopia;
  if (p.x == 0.0 && p.z == 1.0) return Outcome::corner01;
  if (p.x == 1.0 && p.z == 0.0) return Outcome::corner10;
  return Outcome::unresolved;
}

/// Non-spurious equilibria of the standard model as attractor candidates.
inline std::vector<Attractor> attractors(const ModelParams& p) {
  std::vector<Attractor> out;
  for (const auto& e : classified_equilibria(p)) {
    if (e.spurious) continue;
    out.push_back({e.point, e.classification == Stability::stable_node, corner_label(e.point)});
  }
  return out;
}

inline const Attractor* nearest_attractor(std::span<const Attractor> candidates,
                                          const ReducedState& s, double radius) {
  const Attractor* best = nullptr;
  double best_d = radius;
  for (const auto& c : candidates) {
    const double d = std::hypot(s.x - c.point.x, s.z - c.point.z);
    if (d <= best_d) {
      best = &c;
      best_d = d;
    }
  }
  return best;
}

inline Outcome label_state(std::span<const Attractor> candidates, const ReducedState& s,
                           double radius = kCaptureRadius) {
  const Attractor* a = nearest_attractor(candidates, s, radius);
  return a ? a->label : Outcome::unresolved;
}

// ---------------------------------------------------------------------------
// Trajectories

template <class State>
struct Sample {
  double t = 0.0;
  State state{};
};

template <class State>
struct BasicTrajectory {
  std::vector<Sample<State>> samples;
  Outcome terminal_label = Outcome::unresolved;
  double max_excursion = 0.0;  // largest pre-clamp departure from the box

  const State& final_state() const { return samples.back().state; }
};

using Trajectory = BasicTrajectory<ReducedState>;
using FullTrajectory = BasicTrajectory<FullState>;

struct SimulationOptions {
  double horizon = 200.0;
  double dt = kDefaultStep;
  std::size_t stride = 1;  // record every stride-th step; the final state is always kept
};

namespace detail {

inline std::size_t step_count(double horizon, double dt) {
  if (!(horizon > 0.0)) throw DomainError("horizon T must be positive");
  if (!(dt > 0.0) || dt > horizon) throw DomainError("dt must satisfy 0 < dt <= T");
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

inline std::string describe(const ReducedState& s) {
  std::ostringstream os;
  os << "(x, z) = (" << s.x << ", " << s.z << ")";
  return os.str();
}

inline std::string describe(const FullState& s) {
  std::ostringstream os;
  os << "(x, y, z, w) = (" << s.xi[0] << ", " << s.xi[1] << ", " << s.eta[0] << ", " << s.eta[1]
     << ")";
  return os.str();
}

template <class State, class Field>
BasicTrajectory<State> integrate_fixed(const Field& f, const State& s0,
                                       const SimulationOptions& opt) {
  const std::size_t steps = step_count(opt.horizon, opt.dt);
  const std::size_t stride = std::max<std::size_t>(1, opt.stride);
  const auto raw = raw_field(f);
  BasicTrajectory<State> traj;
  traj.samples.reserve(steps / stride + 2);
  traj.samples.push_back({0.0, s0});
  CompensatedVector<std::tuple_size_v<decltype(to_vector(s0))>> y;
  y.hi = to_vector(s0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * opt.dt;
    const double t = k == steps ? opt.horizon : static_cast<double>(k) * opt.dt;
    try {
      y.add(rk4_increment_from(raw, y.hi, raw(y.hi), t - t_prev));
      auto next = y.hi;
      detail::require_finite(next, t - t_prev);
      traj.max_excursion = std::max(traj.max_excursion, project(next));
      y.reset_where_changed(next);
    } catch (const IntegrationError& e) {
      throw IntegrationError(std::string(e.what()) + "; last valid state at t = " +
                             std::to_string(t_prev) + ": " + describe(from_vector(y.hi)));
    }
    if (k % stride == 0 || k == steps) traj.samples.push_back({t, from_vector(y.hi)});
  }
  return traj;
}

}  // namespace detail

/// Fixed-step trajectory of an arbitrary reduced field.
template <ReducedField Field>
Trajectory simulate_field(const Field& f, std::span<const Attractor> candidates,
                          const ReducedState& s0, const SimulationOptions& opt) {
  require_box(s0);
  Trajectory traj = detail::integrate_fixed(f, s0, opt);
  traj.terminal_label = label_state(candidates, traj.final_state());
  return traj;
}

inline Trajectory simulate(const ModelParams& p, const ReducedState& s0,
                           const SimulationOptions& opt) {
  const auto eqs = attractors(p);
  return simulate_field(reduced_field(p), eqs, s0, opt);
}

inline Trajectory simulate(const ModelParams& p, const ReducedState& s0, double horizon,
                           double dt = kDefaultStep) {
  return simulate(p, s0, SimulationOptions{horizon, dt, 1});
}

/// Trajectory of the four-dimensional coupled system.
inline FullTrajectory simulate_full(const GameMatrices& g, double n_p, const FullState& s0,
                                    const SimulationOptions& opt) {
  require_full_state(s0);
  return detail::integrate_fixed(coupled_field(g, n_p), s0, opt);
}

// ---------------------------------------------------------------------------
// Omega limits

struct OmegaOptions {
  double dt = kDefaultStep;
  double t_max = kDefaultHorizon;
  double converged_speed = kConvergedSpeed;
  double capture_radius = kCaptureRadius;
};

/// Integrates until the field speed drops below `converged_speed` next to a
/// stable attractor, or until t_max. Slow passages near saddles do not stop
/// the search; after t_max the state is labelled by its nearest attractor.
template <ReducedField Field>
Outcome omega_limit_field(const Field& f, std::span<const Attractor> candidates,
                          const ReducedState& s0, const OmegaOptions& opt = {}) {
  require_box(s0);
  const auto raw = [&f](const Vector<2>& v) {
    return detail::to_vector(f(detail::to_reduced(v)));
  };
  Vector<2> y = detail::to_vector(s0);
  const std::size_t steps = detail::step_count(opt.t_max, opt.dt);
  for (std::size_t k = 0; k < steps; ++k) {
    const Vector<2> k1 = raw(y);
    const double speed = std::hypot(k1[0], k1[1]);
    if (speed == 0.0) break;
    if (speed < opt.converged_speed) {
      const Attractor* a = nearest_attractor(candidates, detail::to_reduced(y), opt.capture_radius);
      if (a && a->stable) return a->label;
    }
    y = rk4_step_from(raw, y, k1, opt.dt);
    clamp_to_box(y);
  }
  return label_state(candidates, detail::to_reduced(y), opt.capture_radius);
}

inline Outcome omega_limit(const ModelParams& p, const ReducedState& s0,
                           const OmegaOptions& opt = {}) {
  require_box(s0);
  if (closed_form_basin_applies(p) && std::abs(s0.x - interior_x(p)) < kSeparatrixGuard &&
      s0.z > 0.0 && s0.z < 1.0) {
    return Outcome::unresolved;
  }
  const auto eqs = attractors(p);
  return omega_limit_field(reduced_field(p), eqs, s0, opt);
}

// ---------------------------------------------------------------------------
// Grids

/// Per-cell omega-limit labels on the n x n cell-centre grid over (0,1)^2.
/// labels[j * n + i] belongs to the cell centred at ((i + 0.5)/n, (j + 0.5)/n).
struct BasinMap {
  std::size_t n = 0;
  std::vector<Outcome> labels;

  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) / static_cast<double>(n); }
  Outcome at(std::size_t i, std::size_t j) const { return labels[j * n + i]; }
  std::size_t count(Outcome o) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), o));
  }
  double fraction(Outcome o) const {
    return labels.empty() ? 0.0 : static_cast<double>(count(o)) / static_cast<double>(labels.size());
  }
  bool operator==(const BasinMap&) const = default;
};

/// Evaluates cell(i, j) over an n x n grid, splitting rows across worker
/// threads. Output order is fixed by the grid index.
template <class CellFn>
BasinMap evaluate_grid(std::size_t n, const CellFn& cell, unsigned threads = 0) {
  if (n < 2) throw DomainError("grid resolution must be at least 2");
  BasinMap map;
  map.n = n;
  map.labels.assign(n * n, Outcome::unresolved);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  const auto work = [&](unsigned worker) {
    for (std::size_t j = worker; j < n; j += threads) {
      for (std::size_t i = 0; i < n; ++i) map.labels[j * n + i] = cell(i, j);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  return map;
}

inline BasinMap basin_map(const ModelParams& p, std::size_t n, const OmegaOptions& opt = {},
                          unsigned threads = 0) {
  const double h = 1.0 / static_cast<double>(n);
  return evaluate_grid(
      n,
      [&](std::size_t i, std::size_t j) {
        const ReducedState s{(static_cast<double>(i) + 0.5) * h, (static_cast<double>(j) + 0.5) * h};
        return omega_limit(p, s, opt);
      },
      threads);
}

/// Location of the dystopia -> utopia switch along x in each z row.
struct SeparatrixEstimate {
  std::vector<std::optional<double>> per_row;  // midpoint of the bracketing centres
  std::optional<double> mean;                  // over rows that have a switch
};

inline SeparatrixEstimate measure_separatrix(const BasinMap& map) {
  SeparatrixEstimate est;
  double sum = 0.0;
  std::size_t rows = 0;
  for (std::size_t j = 0; j < map.n; ++j) {
    std::optional<double> where;
    for (std::size_t i = 1; i < map.n; ++i) {
      if (map.at(i - 1, j) == Outcome::dystopia && map.at(i, j) == Outcome::utopia) {
        where = 0.5 * (map.center(i - 1) + map.center(i));
        break;
      }
    }
    if (where) {
      sum += *where;
      ++rows;
    }
    est.per_row.push_back(where);
  }
  if (rows > 0) est.mean = sum / static_cast<double>(rows);
  return est;
}

struct FieldSample {
  ReducedState at;
  ReducedState velocity;
};

/// Field values on the n x n node grid {0, 1/(n-1), ..., 1}^2, row-major in z.
template <ReducedField Field>
std::vector<FieldSample> sample_field(const Field& f, std::size_t n) {
  if (n < 2) throw DomainError("grid resolution must be at least 2");
  std::vector<FieldSample> out;
  out.reserve(n * n);
  const double h = 1.0 / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      // Pin the last node to exactly 1 so the corners are exact fixed points.
      const ReducedState s{i + 1 == n ? 1.0 : static_cast<double>(i) * h,
                           j + 1 == n ? 1.0 : static_cast<double>(j) * h};
      out.push_back({s, f(s)});
    }
  }
  return out;
}

inline std::vector<FieldSample> field_sample(const ModelParams& p, std::size_t n) {
  return sample_field(reduced_field(p), n);
}

}  // namespace modgame
