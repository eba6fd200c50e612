#pragma once

// Payoff structures and vector fields for the user/moderator evolutionary game.
//
// Ordinary users (fraction n_p of the population) play a prisoner's dilemma
// among themselves, moderators (n_c = 1 - n_p) play a coordination game, and
// the two populations meet in a bimatrix game. Strategy 1 is "cooperate" for
// users and "positive" for moderators.

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace modgame {

/// Raised when an input violates a documented precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Vec2 = std::array<double, 2>;

inline constexpr double kSimplexTolerance = 1e-9;

// Scale constants of the four payoff matrices. Only the punishment scale a
// is a free parameter of the model; the others are fixed at one.
inline constexpr double kUserGameScale = 1.0;       // r
inline constexpr double kModeratorGameScale = 1.0;  // v
inline constexpr double kModeratorPayoffScale = 1.0;  // s

class PayoffMatrix2 {
 public:
  constexpr PayoffMatrix2() = default;

  PayoffMatrix2(double a11, double a12, double a21, double a22)
      : m_{{{a11, a12}, {a21, a22}}} {
    for (const auto& row : m_) {
      for (double v : row) {
        if (!std::isfinite(v)) throw DomainError("payoff entries must be finite");
      }
    }
  }

  double operator()(int i, int j) const { return m_[i][j]; }

  PayoffMatrix2 transpose() const {
    return {m_[0][0], m_[1][0], m_[0][1], m_[1][1]};
  }

  PayoffMatrix2 operator+(const PayoffMatrix2& o) const {
    return {m_[0][0] + o.m_[0][0], m_[0][1] + o.m_[0][1],
            m_[1][0] + o.m_[1][0], m_[1][1] + o.m_[1][1]};
  }

  /// M v
  Vec2 apply(const Vec2& v) const {
    return {m_[0][0] * v[0] + m_[0][1] * v[1], m_[1][0] * v[0] + m_[1][1] * v[1]};
  }

  /// u^T M
  Vec2 left_apply(const Vec2& u) const {
    return {u[0] * m_[0][0] + u[1] * m_[1][0], u[0] * m_[0][1] + u[1] * m_[1][1]};
  }

  /// u^T M v
  double bilinear(const Vec2& u, const Vec2& v) const {
    const Vec2 mv = apply(v);
    return u[0] * mv[0] + u[1] * mv[1];
  }

  bool operator==(const PayoffMatrix2&) const = default;

 private:
  std::array<std::array<double, 2>, 2> m_{};
};

inline void require_simplex(const Vec2& v, const char* what) {
  const bool ok = v[0] >= -kSimplexTolerance && v[1] >= -kSimplexTolerance &&
                  std::abs(v[0] + v[1] - 1.0) <= kSimplexTolerance &&
                  std::isfinite(v[0]) && std::isfinite(v[1]);
  if (!ok) {
    std::ostringstream os;
    os << what << " = (" << v[0] << ", " << v[1] << ") is not on the 2-simplex";
    throw DomainError(os.str());
  }
}

// ---------------------------------------------------------------------------
// Model matrices

/// Users' prisoner's dilemma.
inline PayoffMatrix2 user_game(double r = kUserGameScale) {
  return {r / 2.0, -r, r, r / 4.0};
}

/// Moderators' coordination game.
inline PayoffMatrix2 moderator_game(double v = kModeratorGameScale) {
  return {v, -v, -v, v};
}

/// Users' payoff (row player) when meeting moderators; a scales the penalty.
inline PayoffMatrix2 punishment_payoff(double a) {
  return {a / 2.0, 0.0, -a / 2.0, -a};
}

/// Moderators' payoff (column player) when meeting users.
inline PayoffMatrix2 moderator_payoff(double s = kModeratorPayoffScale) {
  return {s / 2.0, 0.0, s / 4.0, s};
}

/// The four matrices of one coupled model instance.
struct GameMatrices {
  PayoffMatrix2 user;          // A
  PayoffMatrix2 moderator;     // F
  PayoffMatrix2 interaction;   // B, users as row players
  PayoffMatrix2 moderator_in;  // C, moderators as column players
};

// ---------------------------------------------------------------------------
// Parameters and states

class ModelParams {
 public:
  ModelParams(double n_p, double a) : np_(n_p), a_(a) {
    if (!(n_p > 0.0 && n_p < 1.0)) throw DomainError("n_p must lie in (0, 1)");
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("a must be positive and finite");
  }

  double np() const { return np_; }
  double nc() const { return 1.0 - np_; }
  double a() const { return a_; }

  GameMatrices matrices() const {
    return {user_game(), moderator_game(), punishment_payoff(a_), moderator_payoff()};
  }

  bool operator==(const ModelParams&) const = default;

 private:
  double np_;
  double a_;
};

/// (x, z): cooperating-user fraction and positive-moderator fraction.
struct ReducedState {
  double x = 0.0;
  double z = 0.0;

  bool operator==(const ReducedState&) const = default;
};

/// (xi, eta) = ((x, y), (z, w)).
struct FullState {
  Vec2 xi{1.0, 0.0};
  Vec2 eta{1.0, 0.0};

  static FullState from_reduced(const ReducedState& s) {
    return {{s.x, 1.0 - s.x}, {s.z, 1.0 - s.z}};
  }
  ReducedState reduced() const { return {xi[0], eta[0]}; }

  bool operator==(const FullState&) const = default;
};

inline void require_box(const ReducedState& s) {
  const auto in = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in(s.x) || !in(s.z)) {
    std::ostringstream os;
    os << "state (" << s.x << ", " << s.z << ") lies outside [0,1]^2";
    throw DomainError(os.str());
  }
}

inline void require_full_state(const FullState& s) {
  require_simplex(s.xi, "xi");
  require_simplex(s.eta, "eta");
}

// ---------------------------------------------------------------------------
// Vector fields

/// Two-population replicator dynamics for a bimatrix game (row payoff `row`,
/// column payoff `col`). Returns (d zeta/dt, d chi/dt).
inline std::pair<Vec2, Vec2> hofbauer_rhs(const PayoffMatrix2& row, const PayoffMatrix2& col,
                                          const Vec2& zeta, const Vec2& chi) {
  require_simplex(zeta, "zeta");
  require_simplex(chi, "chi");
  const Vec2 row_fitness = row.apply(chi);
  const double row_mean = zeta[0] * row_fitness[0] + zeta[1] * row_fitness[1];
  const Vec2 col_fitness = col.left_apply(zeta);
  const double col_mean = col_fitness[0] * chi[0] + col_fitness[1] * chi[1];
  return {{zeta[0] * (row_fitness[0] - row_mean), zeta[1] * (row_fitness[1] - row_mean)},
          {chi[0] * (col_fitness[0] - col_mean), chi[1] * (col_fitness[1] - col_mean)}};
}

/// Mean payoff in a symmetric game where each player is row or column
/// player half the time: (1/2) zeta^T (A + A^T) zeta.
inline double population_average(const PayoffMatrix2& game, const Vec2& zeta) {
  require_simplex(zeta, "zeta");
  return 0.5 * (game + game.transpose()).bilinear(zeta, zeta);
}

inline Vec2 symmetric_rhs(const PayoffMatrix2& game, const Vec2& zeta) {
  const double mean = population_average(game, zeta);
  const Vec2 fitness = game.apply(zeta);
  return {zeta[0] * (fitness[0] - mean), zeta[1] * (fitness[1] - mean)};
}

namespace detail {

inline FullState coupled_rhs(const GameMatrices& g, double n_p, const FullState& s) {
  const double n_c = 1.0 - n_p;
  const Vec2& xi = s.xi;
  const Vec2& eta = s.eta;

  const Vec2 user_fit = g.user.apply(xi);
  const double user_mean = xi[0] * user_fit[0] + xi[1] * user_fit[1];  // = (1/2) xi^T (A + A^T) xi
  const Vec2 meet_fit = g.interaction.apply(eta);
  const double meet_mean = xi[0] * meet_fit[0] + xi[1] * meet_fit[1];

  const Vec2 mod_fit = g.moderator.apply(eta);
  const double mod_mean = eta[0] * mod_fit[0] + eta[1] * mod_fit[1];
  const Vec2 judged_fit = g.moderator_in.left_apply(xi);
  const double judged_mean = judged_fit[0] * eta[0] + judged_fit[1] * eta[1];

  FullState d;
  for (int i = 0; i < 2; ++i) {
    d.xi[i] = xi[i] * (n_p * (user_fit[i] - user_mean) + n_c * (meet_fit[i] - meet_mean));
    d.eta[i] = eta[i] * (n_c * (mod_fit[i] - mod_mean) + n_p * (judged_fit[i] - judged_mean));
  }
  return d;
}

}  // namespace detail

/// Coupled four-dimensional system for arbitrary matrices.
inline FullState coupled_rhs(const GameMatrices& g, double n_p, const FullState& s) {
  require_full_state(s);
  return detail::coupled_rhs(g, n_p, s);
}

inline FullState coupled_rhs(const ModelParams& p, const FullState& s) {
  return coupled_rhs(p.matrices(), p.np(), s);
}

/// Closed-form two-variable system on x + y = 1, z + w = 1.
namespace detail {

// Unchecked evaluation; integrators call this on intermediate stages that may
// sit a rounding error outside the box.
inline ReducedState reduced_rhs(double n, double a, const ReducedState& s) {
  const double x = s.x;
  const double z = s.z;
  return {0.25 * x * (x - 1.0) * (-3.0 * n * x + 5.0 * n + 4.0 * n * a - 4.0 * a),
          -0.25 * z * (z - 1.0) * (-16.0 * n * z + 16.0 * z + 5.0 * n - 8.0 + 5.0 * n * x)};
}

}  // namespace detail

inline ReducedState reduced_rhs(const ModelParams& p, const ReducedState& s) {
  require_box(s);
  return detail::reduced_rhs(p.np(), p.a(), s);
}

}  // namespace modgame
