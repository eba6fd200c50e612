#pragma once

// Closed-form equilibria, linear stability and basin results for the
// reduced (x, z) system.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string_view>

#include "modgame/game_core.hpp"

namespace modgame {

inline constexpr double kHyperbolicityTolerance = 1e-9;
inline constexpr double kSeparatrixTolerance = 1e-12;

struct Matrix2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
  bool operator==(const Matrix2&) const = default;
};

enum class Stability { unclassified, stable_node, unstable_node, saddle, marginal };

inline std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable_node: return "stable-node";
    case Stability::unstable_node: return "unstable-node";
    case Stability::saddle: return "saddle";
    case Stability::marginal: return "marginal";
    case Stability::unclassified: break;
  }
  return "unclassified";
}

inline std::optional<Stability> stability_from_string(std::string_view s) {
  for (auto v : {Stability::stable_node, Stability::unstable_node, Stability::saddle,
                 Stability::marginal, Stability::unclassified}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

using Eigenpair = std::array<std::complex<double>, 2>;

/// Eigenvalues of a 2x2 real matrix from its trace and determinant.
/// Real pairs are ordered descending.
inline Eigenpair eigenvalues(const Matrix2& m) {
  if (m.a12 == 0.0 || m.a21 == 0.0) {
    const double hi = std::max(m.a11, m.a22);
    const double lo = std::min(m.a11, m.a22);
    return {std::complex<double>(hi, 0.0), std::complex<double>(lo, 0.0)};
  }
  const double tr = m.trace();
  // (a11 - a22)^2 + 4 a12 a21 avoids cancellation in tr^2 - 4 det.
  const double disc = (m.a11 - m.a22) * (m.a11 - m.a22) + 4.0 * m.a12 * m.a21;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    // Stable form: compute the larger-magnitude root first.
    const double big = tr >= 0.0 ? 0.5 * (tr + root) : 0.5 * (tr - root);
    const double small = big != 0.0 ? m.det() / big : 0.5 * (tr - root);
    const double hi = std::max(big, small);
    const double lo = std::min(big, small);
    return {std::complex<double>(hi, 0.0), std::complex<double>(lo, 0.0)};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
}

inline Stability classify_eigenvalues(const Eigenpair& ev) {
  const double r0 = ev[0].real();
  const double r1 = ev[1].real();
  if (std::abs(r0) <= kHyperbolicityTolerance || std::abs(r1) <= kHyperbolicityTolerance) {
    return Stability::marginal;
  }
  if (r0 < 0.0 && r1 < 0.0) return Stability::stable_node;
  if (r0 > 0.0 && r1 > 0.0) return Stability::unstable_node;
  return Stability::saddle;
}

struct Equilibrium {
  ReducedState point;  // may fall outside the unit box
  int index = 0;       // 1..9 in the enumeration order below
  bool spurious = false;
  Eigenpair eigenvalues{};
  Stability classification = Stability::unclassified;
};

inline bool in_unit_box(const ReducedState& s) {
  return s.x >= 0.0 && s.x <= 1.0 && s.z >= 0.0 && s.z <= 1.0;
}

/// x coordinate shared by equilibria 6, 8 and 9 (the separatrix location).
inline double interior_x(const ModelParams& p) {
  const double n = p.np();
  const double a = p.a();
  return (5.0 * n + 4.0 * n * a - 4.0 * a) / (3.0 * n);
}

/// The nine candidate equilibria, in order:
///   1 (0,0)  2 (0,1)  3 (1,0)  4 (1,1)
///   5 x=0 edge  6 z=0 edge  7 x=1 edge  8 z=1 edge  9 interior.
/// Eigenvalues are left unset; see classify().
inline std::array<Equilibrium, 9> enumerate_equilibria(const ModelParams& p) {
  const double n = p.np();
  const double a = p.a();
  const double xs = interior_x(p);
  const std::array<ReducedState, 9> pts{{
      {0.0, 0.0},
      {0.0, 1.0},
      {1.0, 0.0},
      {1.0, 1.0},
      {0.0, (5.0 * n - 8.0) / (16.0 * (n - 1.0))},
      {xs, 0.0},
      {1.0, (5.0 * n - 4.0) / (8.0 * (n - 1.0))},
      {xs, 1.0},
      {xs, (10.0 * n - 6.0 + 5.0 * n * a - 5.0 * a) / (12.0 * (n - 1.0))},
  }};
  std::array<Equilibrium, 9> out{};
  for (int i = 0; i < 9; ++i) {
    out[i].point = pts[i];
    out[i].index = i + 1;
    out[i].spurious = !in_unit_box(pts[i]);
  }
  return out;
}

/// Piecewise existence condition for an equilibrium in the open box (0,1)^2.
inline bool interior_exists(const ModelParams& p) {
  const double n = p.np();
  const double a = p.a();
  const double q = 1.0 - n;
  const double utopia_bound = 0.5 * n / q;
  const double dystopia_bound = 1.25 * n / q;
  const double z_low = 0.4 * (5.0 * n - 3.0) / q;
  const double z_high = 0.4 * (3.0 - n) / q;
  if (n < 8.0 / 11.0) return utopia_bound < a && a < dystopia_bound;
  if (n < 0.8) return utopia_bound < a && a < z_high;
  return z_low < a && a < z_high;
}

/// Analytic Jacobian of reduced_rhs.
inline Matrix2 jacobian(const ModelParams& p, const ReducedState& s) {
  require_box(s);
  const double n = p.np();
  const double a = p.a();
  const double x = s.x;
  const double z = s.z;
  // Factors centred on the (1,1) corner.
  const double cx = n / 2.0 - a + n * a - 0.75 * n * (x - 1.0);
  const double gz = 16.0 * (1.0 - n) * (z - 1.0) + 5.0 * n * (x - 1.0) + (8.0 - 6.0 * n);
  Matrix2 j;
  j.a11 = (2.0 * x - 1.0) * cx - 0.75 * n * x * (x - 1.0);
  j.a12 = 0.0;
  j.a21 = -1.25 * n * z * (z - 1.0);
  j.a22 = -0.25 * (2.0 * z - 1.0) * gz - 4.0 * (1.0 - n) * z * (z - 1.0);
  return j;
}

/// Fills eigenvalues and classification. Spurious points are rejected.
inline Equilibrium classify(const ModelParams& p, Equilibrium e) {
  if (e.spurious || !in_unit_box(e.point)) {
    throw DomainError("cannot classify a spurious equilibrium");
  }
  e.eigenvalues = eigenvalues(jacobian(p, e.point));
  e.classification = classify_eigenvalues(e.eigenvalues);
  return e;
}

/// enumerate_equilibria with every non-spurious point classified.
inline std::array<Equilibrium, 9> classified_equilibria(const ModelParams& p) {
  auto eqs = enumerate_equilibria(p);
  for (auto& e : eqs) {
    if (!e.spurious) e = classify(p, e);
  }
  return eqs;
}

inline double utopia_threshold(double n_p) { return n_p / (2.0 * (1.0 - n_p)); }
inline double dystopia_threshold(double n_p) { return 5.0 * n_p / (4.0 * (1.0 - n_p)); }

/// (1,1) is asymptotically stable.
inline bool utopia_stable(const ModelParams& p) { return p.a() > utopia_threshold(p.np()); }

/// (0,0) is asymptotically stable.
inline bool dystopia_stable(const ModelParams& p) { return p.a() < dystopia_threshold(p.np()); }

struct CornerStability {
  bool corner01 = false;  // x = 0, z = 1
  bool corner10 = false;  // x = 1, z = 0
};

/// Stability of the mixed corners. (0,1) uses the closed-form condition;
/// (1,0) is read off the Jacobian, whose diagonal there is
/// (n_p/2 - a(1 - n_p), (5 n_p - 4)/2).
inline CornerStability corner_stability(const ModelParams& p) {
  CornerStability c;
  c.corner01 = p.np() < 8.0 / 11.0 && p.a() < dystopia_threshold(p.np());
  c.corner10 = classify_eigenvalues(eigenvalues(jacobian(p, {1.0, 0.0}))) ==
               Stability::stable_node;
  return c;
}

/// The x-separatrix x*, present only when it falls strictly inside (0,1).
inline std::optional<double> basin_threshold(const ModelParams& p) {
  const double xs = interior_x(p);
  if (xs > 0.0 && xs < 1.0) return xs;
  return std::nullopt;
}

/// True when the half-space basin description applies: n_p > 4/5 and a lies
/// strictly between the interior-existence bounds.
inline bool closed_form_basin_applies(const ModelParams& p) {
  const double n = p.np();
  const double q = 1.0 - n;
  return n > 0.8 && 0.4 * (5.0 * n - 3.0) / q < p.a() && p.a() < 0.4 * (3.0 - n) / q;
}

enum class BasinSide { utopia, dystopia, boundary };

inline std::string_view to_string(BasinSide b) {
  switch (b) {
    case BasinSide::utopia: return "utopia";
    case BasinSide::dystopia: return "dystopia";
    case BasinSide::boundary: break;
  }
  return "boundary";
}

/// Closed-form basin membership. Throws DomainError outside the parameter
/// range where the half-space description holds, or for z on a face.
inline BasinSide analytic_basin(const ModelParams& p, const ReducedState& s) {
  if (!closed_form_basin_applies(p)) {
    throw DomainError("closed-form basin requires n_p > 4/5 and a inside the interior band");
  }
  require_box(s);
  if (!(s.z > 0.0 && s.z < 1.0)) throw DomainError("closed-form basin requires 0 < z < 1");
  const double xs = interior_x(p);
  if (std::abs(s.x - xs) <= kSeparatrixTolerance) return BasinSide::boundary;
  return s.x > xs ? BasinSide::utopia : BasinSide::dystopia;
}

}  // namespace modgame
