#pragma once

// Model variants: an incentive-based interaction matrix, and a user/moderator
// split that evolves by SIS-style conversion dynamics.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "modgame/analysis.hpp"
#include "modgame/game_core.hpp"
#include "modgame/integrate.hpp"

namespace modgame {

// ---------------------------------------------------------------------------
// Incentives
//
// Users meeting moderators receive B = [[a, a/2], [0, -1]]: cooperation is
// rewarded instead of defection being punished. On x + y = 1, z + w = 1 the
// coupled system reduces to
//
//   x' = -(1/4) x (x - 1) L(x, z)
//   z' = -(1/4) z (z - 1) G(x, z)
//
//   L = 3 n x + (2a - 4)(1 - n) z + 2a (1 - n) + 4 - 9 n
//   G = 5 n x + 16 (1 - n) z + 5 n - 8          (unchanged from the base model)
//
// See docs/incentives.md for the substitution.

class IncentiveParams {
 public:
  IncentiveParams(double n_p, double a) : np_(n_p), a_(a) {
    if (!(n_p > 0.0 && n_p < 1.0)) throw DomainError("n_p must lie in (0, 1)");
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("a must be positive and finite");
  }

  double np() const { return np_; }
  double nc() const { return 1.0 - np_; }
  double a() const { return a_; }

  GameMatrices matrices() const {
    return {user_game(), moderator_game(), incentive_payoff(a_), moderator_payoff()};
  }

  static PayoffMatrix2 incentive_payoff(double a) { return {a, a / 2.0, 0.0, -1.0}; }

  bool operator==(const IncentiveParams&) const = default;

 private:
  double np_;
  double a_;
};

namespace detail {

inline double incentive_l(double n, double a, double x, double z) {
  return 3.0 * n * x + (2.0 * a - 4.0) * (1.0 - n) * z + 2.0 * a * (1.0 - n) + 4.0 - 9.0 * n;
}

inline double moderator_g(double n, double x, double z) {
  return 5.0 * n * x + 16.0 * (1.0 - n) * z + 5.0 * n - 8.0;
}

inline ReducedState incentives_reduced_rhs(double n, double a, const ReducedState& s) {
  return {-0.25 * s.x * (s.x - 1.0) * incentive_l(n, a, s.x, s.z),
          -0.25 * s.z * (s.z - 1.0) * moderator_g(n, s.x, s.z)};
}

}  // namespace detail

inline ReducedState incentives_reduced_rhs(const IncentiveParams& p, const ReducedState& s) {
  require_box(s);
  return detail::incentives_reduced_rhs(p.np(), p.a(), s);
}

inline auto incentives_field(const IncentiveParams& p) {
  return [n = p.np(), a = p.a()](const ReducedState& s) {
    return detail::incentives_reduced_rhs(n, a, s);
  };
}

inline FullState incentives_coupled_rhs(const IncentiveParams& p, const FullState& s) {
  return coupled_rhs(p.matrices(), p.np(), s);
}

inline Matrix2 incentives_jacobian(const IncentiveParams& p, const ReducedState& s) {
  require_box(s);
  const double n = p.np();
  const double a = p.a();
  const double x = s.x;
  const double z = s.z;
  const double l = detail::incentive_l(n, a, x, z);
  const double g = detail::moderator_g(n, x, z);
  Matrix2 j;
  j.a11 = -0.25 * ((2.0 * x - 1.0) * l + x * (x - 1.0) * 3.0 * n);
  j.a12 = -0.25 * x * (x - 1.0) * (2.0 * a - 4.0) * (1.0 - n);
  j.a21 = -0.25 * z * (z - 1.0) * 5.0 * n;
  j.a22 = -0.25 * ((2.0 * z - 1.0) * g + z * (z - 1.0) * 16.0 * (1.0 - n));
  return j;
}

/// Candidate equilibria in the same order as the base model: four corners,
/// edges x=0, z=0, x=1, z=1, then the interior root of L = G = 0.
/// Non-spurious points come back classified.
inline std::array<Equilibrium, 9> incentives_equilibria(const IncentiveParams& p) {
  const double n = p.np();
  const double a = p.a();
  const double q = 1.0 - n;
  const double cz = (2.0 * a - 4.0) * q;         // L's z coefficient
  const double c0 = 2.0 * a * q + 4.0 - 9.0 * n;  // L's constant
  const double det = 3.0 * n * 16.0 * q - 5.0 * n * cz;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::array<ReducedState, 9> pts{{
      {0.0, 0.0},
      {0.0, 1.0},
      {1.0, 0.0},
      {1.0, 1.0},
      {0.0, (8.0 - 5.0 * n) / (16.0 * q)},
      {-c0 / (3.0 * n), 0.0},
      {1.0, (8.0 - 10.0 * n) / (16.0 * q)},
      {-(c0 + cz) / (3.0 * n), 1.0},
      det == 0.0 ? ReducedState{nan, nan}
                 : ReducedState{(-c0 * 16.0 * q - cz * (8.0 - 5.0 * n)) / det,
                                (3.0 * n * (8.0 - 5.0 * n) + 5.0 * n * c0) / det},
  }};
  std::array<Equilibrium, 9> out{};
  for (int i = 0; i < 9; ++i) {
    out[i].point = pts[i];
    out[i].index = i + 1;
    out[i].spurious = !in_unit_box(pts[i]);
    if (!out[i].spurious) {
      out[i].eigenvalues = eigenvalues(incentives_jacobian(p, pts[i]));
      out[i].classification = classify_eigenvalues(out[i].eigenvalues);
    }
  }
  return out;
}

inline double incentives_utopia_threshold(double n_p) { return 0.5 * n_p / (1.0 - n_p); }
inline double incentives_dystopia_threshold(double n_p) {
  return 0.5 * (9.0 * n_p - 4.0) / (1.0 - n_p);
}

inline bool incentives_utopia_stable(const IncentiveParams& p) {
  return p.a() > incentives_utopia_threshold(p.np());
}

inline bool incentives_dystopia_stable(const IncentiveParams& p) {
  return p.a() < incentives_dystopia_threshold(p.np());
}

inline std::vector<Attractor> attractors(const IncentiveParams& p) {
  std::vector<Attractor> out;
  for (const auto& e : incentives_equilibria(p)) {
    if (e.spurious) continue;
    out.push_back({e.point, e.classification == Stability::stable_node, corner_label(e.point)});
  }
  return out;
}

inline Trajectory simulate(const IncentiveParams& p, const ReducedState& s0,
                           const SimulationOptions& opt) {
  const auto eqs = attractors(p);
  return simulate_field(incentives_field(p), eqs, s0, opt);
}

inline Outcome omega_limit(const IncentiveParams& p, const ReducedState& s0,
                           const OmegaOptions& opt = {}) {
  const auto eqs = attractors(p);
  return omega_limit_field(incentives_field(p), eqs, s0, opt);
}

inline BasinMap basin_map(const IncentiveParams& p, std::size_t n, const OmegaOptions& opt = {},
                          unsigned threads = 0) {
  const auto eqs = attractors(p);
  const auto field = incentives_field(p);
  const double h = 1.0 / static_cast<double>(n);
  return evaluate_grid(
      n,
      [&](std::size_t i, std::size_t j) {
        const ReducedState s{(static_cast<double>(i) + 0.5) * h, (static_cast<double>(j) + 0.5) * h};
        return omega_limit_field(field, eqs, s, opt);
      },
      threads);
}

inline std::vector<FieldSample> field_sample(const IncentiveParams& p, std::size_t n) {
  return sample_field(incentives_field(p), n);
}

// ---------------------------------------------------------------------------
// Epidemic population split
//
//   n_p' = lambda + rho n_c - beta n_p n_c - mu n_p
//   n_c' = beta n_p n_c - rho n_c - mu n_c
//
// Users convert to moderators at rate beta (infection), moderators revert at
// rate rho (recovery), and both turn over at rate mu with inflow lambda.

struct EpidemicParams {
  double beta = 0.0;    // conversion rate
  double rho = 0.0;     // reversion rate
  double mu = 0.0;      // turnover
  double lambda = 0.0;  // inflow

  /// Constant total population: lambda = mu.
  static EpidemicParams stable(double beta, double rho, double mu) {
    EpidemicParams e{beta, rho, mu, mu};
    e.validate();
    return e;
  }

  bool stable_population() const { return lambda == mu; }

  void validate() const {
    for (double v : {beta, rho, mu, lambda}) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("epidemic rates must be finite and non-negative");
      }
    }
  }

  /// Endemic user fraction beta n_p = rho + mu, when beta > 0.
  std::optional<double> endemic_users() const {
    if (!(beta > 0.0)) return std::nullopt;
    return (rho + mu) / beta;
  }

  bool operator==(const EpidemicParams&) const = default;
};

struct PopulationRates {
  double users = 0.0;       // n_p'
  double moderators = 0.0;  // n_c'
};

inline PopulationRates epidemic_rhs(const EpidemicParams& ep, double n_p, double n_c) {
  if (!(n_p >= 0.0) || !(n_c >= 0.0)) throw DomainError("population fractions must be non-negative");
  return {ep.lambda + ep.rho * n_c - ep.beta * n_p * n_c - ep.mu * n_p,
          ep.beta * n_p * n_c - ep.rho * n_c - ep.mu * n_c};
}

struct EpidemicState {
  double x = 0.0;
  double z = 0.0;
  double np = 0.5;

  ReducedState reduced() const { return {x, z}; }
  bool operator==(const EpidemicState&) const = default;
};

struct EpidemicDerivative {
  EpidemicState rate;       // (x', z', n_p')
  bool degenerate = false;  // n_p sat on (or beyond) 0 or 1 and was clamped
};

namespace detail {

inline EpidemicDerivative coupled_epidemic_rhs(double a, const EpidemicParams& ep,
                                               const EpidemicState& s) {
  EpidemicDerivative d;
  const double n = std::clamp(s.np, 0.0, 1.0);
  d.degenerate = !(s.np > 0.0 && s.np < 1.0);
  const ReducedState v = reduced_rhs(n, a, {s.x, s.z});
  const double nc = 1.0 - n;
  d.rate = {v.x, v.z, ep.lambda + ep.rho * nc - ep.beta * n * nc - ep.mu * n};
  return d;
}

}  // namespace detail

/// (x', z', n_p') with the reduced game evaluated at the current n_p.
inline EpidemicDerivative coupled_epidemic_rhs(double a, const EpidemicParams& ep,
                                               const EpidemicState& s) {
  ep.validate();
  if (!(a > 0.0)) throw DomainError("a must be positive");
  const auto in = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in(s.x) || !in(s.z) || !in(s.np)) throw DomainError("epidemic state outside [0,1]^3");
  return detail::coupled_epidemic_rhs(a, ep, s);
}

struct EpidemicTrajectory {
  std::vector<Sample<EpidemicState>> samples;
  bool degenerate = false;  // n_p touched 0 or 1 somewhere along the run
  double max_excursion = 0.0;

  const EpidemicState& final_state() const { return samples.back().state; }
};

inline EpidemicTrajectory simulate_epidemic(double a, const EpidemicParams& ep,
                                            const EpidemicState& s0,
                                            const SimulationOptions& opt) {
  (void)coupled_epidemic_rhs(a, ep, s0);  // validates inputs
  const auto raw = [a, &ep](const Vector<3>& v) {
    const auto d = detail::coupled_epidemic_rhs(a, ep, {v[0], v[1], v[2]});
    return Vector<3>{d.rate.x, d.rate.z, d.rate.np};
  };
  const std::size_t steps = detail::step_count(opt.horizon, opt.dt);
  const std::size_t stride = std::max<std::size_t>(1, opt.stride);
  EpidemicTrajectory traj;
  traj.samples.push_back({0.0, s0});
  traj.degenerate = !(s0.np > 0.0 && s0.np < 1.0);
  Vector<3> y{s0.x, s0.z, s0.np};
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * opt.dt;
    const double t = k == steps ? opt.horizon : static_cast<double>(k) * opt.dt;
    try {
      y = rk4_step(raw, y, t - t_prev);
    } catch (const IntegrationError& e) {
      std::ostringstream os;
      os << e.what() << "; last valid state at t = " << t_prev << ": (x, z, n_p) = (" << y[0]
         << ", " << y[1] << ", " << y[2] << ")";
      throw IntegrationError(os.str());
    }
    traj.max_excursion = std::max(traj.max_excursion, clamp_to_box(y));
    if (!(y[2] > 0.0 && y[2] < 1.0)) traj.degenerate = true;
    if (k % stride == 0 || k == steps) traj.samples.push_back({t, {y[0], y[1], y[2]}});
  }
  return traj;
}

/// The (n_p, n_c) subsystem on its own, without the unit-sum constraint.
inline std::vector<Sample<std::array<double, 2>>> simulate_population(
    const EpidemicParams& ep, double n_p0, double n_c0, const SimulationOptions& opt) {
  ep.validate();
  (void)epidemic_rhs(ep, n_p0, n_c0);
  const auto raw = [&ep](const Vector<2>& v) {
    return Vector<2>{ep.lambda + ep.rho * v[1] - ep.beta * v[0] * v[1] - ep.mu * v[0],
                     ep.beta * v[0] * v[1] - ep.rho * v[1] - ep.mu * v[1]};
  };
  const std::size_t steps = detail::step_count(opt.horizon, opt.dt);
  const std::size_t stride = std::max<std::size_t>(1, opt.stride);
  std::vector<Sample<std::array<double, 2>>> out;
  out.push_back({0.0, {n_p0, n_c0}});
  Vector<2> y{n_p0, n_c0};
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * opt.dt;
    const double t = k == steps ? opt.horizon : static_cast<double>(k) * opt.dt;
    y = rk4_step(raw, y, t - t_prev);
    if (k % stride == 0 || k == steps) out.push_back({t, y});
  }
  return out;
}

/// A change of the standard model's stability regime as n_p drifts.
struct RegimeCrossing {
  double t = 0.0;
  double np = 0.0;
  std::string what;  // "utopia-stable", "dystopia-stable" or "interior-exists"
  bool now = false;  // predicate value after the crossing
};

inline std::vector<RegimeCrossing> regime_crossings(double a, const EpidemicTrajectory& traj) {
  std::vector<RegimeCrossing> out;
  struct Flags {
    bool utopia, dystopia, interior;
  };
  std::optional<Flags> prev;
  for (const auto& smp : traj.samples) {
    const double n = smp.state.np;
    if (!(n > 0.0 && n < 1.0)) continue;
    const ModelParams p(n, a);
    const Flags f{utopia_stable(p), dystopia_stable(p), interior_exists(p)};
    if (prev) {
      if (f.utopia != prev->utopia) out.push_back({smp.t, n, "utopia-stable", f.utopia});
      if (f.dystopia != prev->dystopia) out.push_back({smp.t, n, "dystopia-stable", f.dystopia});
      if (f.interior != prev->interior) out.push_back({smp.t, n, "interior-exists", f.interior});
    }
    prev = f;
  }
  return out;
}

}  // namespace modgame
