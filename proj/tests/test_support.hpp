#pragma once

// Test-only oracles. Nothing here calls into the library's evaluation paths.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace modgame::testing {

/// Radical-inverse (van der Corput) value of i in the given prime base.
inline double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// 2-D Halton point i (bases 2 and 3), i >= 1.
inline std::pair<double, double> halton2(std::size_t i) {
  return {radical_inverse(i, 2), radical_inverse(i, 3)};
}

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Vec matvec(const Mat& m, const Vec& v) {
  Vec out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Mat transpose(const Mat& m) {
  Mat t(m[0].size(), Vec(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j) t[j][i] = m[i][j];
  return t;
}

/// Brute-force coupled system on dynamic vectors, written straight from the
/// replicator definitions: symmetric within-population play weighted by the
/// own-population share, bimatrix play weighted by the other share.
inline std::pair<Vec, Vec> coupled_oracle(const Mat& A, const Mat& F, const Mat& B, const Mat& C,
                                          double np, const Vec& xi, const Vec& eta) {
  const double nc = 1.0 - np;
  Mat AAt = A;
  Mat FFt = F;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      AAt[i][j] = A[i][j] + A[j][i];
      FFt[i][j] = F[i][j] + F[j][i];
    }
  const Vec Axi = matvec(A, xi);
  const double ubar = 0.5 * dot(xi, matvec(AAt, xi));
  const Vec Beta = matvec(B, eta);
  const double bbar = dot(xi, Beta);
  const Vec Feta = matvec(F, eta);
  const double fbar = 0.5 * dot(eta, matvec(FFt, eta));
  const Vec xiC = matvec(transpose(C), xi);
  const double cbar = dot(xiC, eta);
  Vec dxi(2), deta(2);
  for (std::size_t i = 0; i < 2; ++i) {
    dxi[i] = xi[i] * (np * (Axi[i] - ubar) + nc * (Beta[i] - bbar));
    deta[i] = eta[i] * (nc * (Feta[i] - fbar) + np * (xiC[i] - cbar));
  }
  return {dxi, deta};
}

/// Central-difference Jacobian of f: R^2 -> R^2.
inline std::array<double, 4> central_jacobian(
    const std::function<std::pair<double, double>(double, double)>& f, double x, double z,
    double h) {
  const auto [fxp, gxp] = f(x + h, z);
  const auto [fxm, gxm] = f(x - h, z);
  const auto [fzp, gzp] = f(x, z + h);
  const auto [fzm, gzm] = f(x, z - h);
  return {(fxp - fxm) / (2 * h), (fzp - fzm) / (2 * h), (gxp - gxm) / (2 * h),
          (gzp - gzm) / (2 * h)};
}

}  // namespace modgame::testing
