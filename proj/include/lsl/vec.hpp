#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace lsl {

// Fixed-capacity vectors/matrices for 2D/3D work; the active dimension is
// carried by the caller and unused components stay zero.
using Vec = std::array<double, 3>;
using Mat = std::array<std::array<double, 3>, 3>;  // M[i][j] = dv_i/dx_j
using Ten = std::array<Mat, 3>;                    // T[i][j][k] = d2 v_i / dx_j dx_k

inline Vec vec0() { return {0.0, 0.0, 0.0}; }
inline Mat mat0() { return {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}}; }
inline Ten ten0() { return {mat0(), mat0(), mat0()}; }

inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

inline double dot(const Vec& a, const Vec& b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a, int d) { return std::sqrt(dot(a, a, d)); }

inline Vec add(const Vec& a, const Vec& b, int d) {
  Vec r = vec0();
  for (int i = 0; i < d; ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b, int d) {
  Vec r = vec0();
  for (int i = 0; i < d; ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(double c, const Vec& a, int d) {
  Vec r = vec0();
  for (int i = 0; i < d; ++i) r[i] = c * a[i];
  return r;
}

inline Vec matvec(const Mat& m, const Vec& a, int d) {
  Vec r = vec0();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r[i] += m[i][j] * a[j];
  return r;
}

// (M^T) a
inline Vec mattvec(const Mat& m, const Vec& a, int d) {
  Vec r = vec0();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r[i] += m[j][i] * a[j];
  return r;
}

inline Mat symmetrize(const Mat& m, int d) {
  Mat r = mat0();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r[i][j] = 0.5 * (m[i][j] + m[j][i]);
  return r;
}

// a^T M b
inline double bilinear(const Mat& m, const Vec& a, const Vec& b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s += a[i] * m[i][j] * b[j];
  return s;
}

inline double det(const Mat& m, int d) {
  if (d == 1) return m[0][0];
  if (d == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Largest |eigenvalue| of a symmetric matrix (cyclic Jacobi; d <= 3).
inline double spectral_radius_sym(Mat m, int d) {
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += m[i][j] * m[i][j];
    if (off < 1e-30) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        if (std::abs(m[p][q]) < 1e-300) continue;
        double theta = 0.5 * std::atan2(2 * m[p][q], m[q][q] - m[p][p]);
        double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < d; ++k) {
          double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (int k = 0; k < d; ++k) {
          double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
      }
  }
  double r = 0;
  for (int i = 0; i < d; ++i) r = std::max(r, std::abs(m[i][i]));
  return r;
}

inline bool finite(const Vec& a, int d) {
  for (int i = 0; i < d; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

}  // namespace lsl
