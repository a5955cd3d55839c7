#pragma once

#include <array>
#include <cmath>

namespace egs {

/// Point or vector in the plane.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
};

inline Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }

/// 2x2 matrix stored row-major; row index is the vector component.
struct Mat2 {
  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};

  double &operator()(int i, int j) { return a[2 * i + j]; }
  double operator()(int i, int j) const { return a[2 * i + j]; }

  static Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }

  Mat2 symmetric_part() const {
    const double off = 0.5 * (a[1] + a[2]);
    return Mat2{{a[0], off, off, a[3]}};
  }
  double trace() const { return a[0] + a[3]; }

  Mat2 &operator+=(const Mat2 &o) {
    for (int k = 0; k < 4; ++k) a[k] += o.a[k];
    return *this;
  }
  Mat2 &operator*=(double s) {
    for (double &v : a) v *= s;
    return *this;
  }
};

inline Mat2 operator+(Mat2 a, const Mat2 &b) { return a += b; }
inline Mat2 operator-(Mat2 a, const Mat2 &b) {
  for (int k = 0; k < 4; ++k) a.a[k] -= b.a[k];
  return a;
}
inline Mat2 operator*(double s, Mat2 a) { return a *= s; }
inline Vec2 operator*(const Mat2 &m, const Vec2 &v) {
  return {m(0, 0) * v.x + m(0, 1) * v.y, m(1, 0) * v.x + m(1, 1) * v.y};
}
/// Frobenius inner product A:B.
inline double contract(const Mat2 &m, const Mat2 &n) {
  return m.a[0] * n.a[0] + m.a[1] * n.a[1] + m.a[2] * n.a[2] + m.a[3] * n.a[3];
}

}  // namespace egs
