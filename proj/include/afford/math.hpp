#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

namespace afford {

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm_sq(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  return n > 0.0 ? v / n : Vec3{0, 0, 0};
}
inline Vec3 comp_min(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 comp_max(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}
// Angle between two vectors, radians, robust near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) {
  double c = dot(normalized(a), normalized(b));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

struct Mat3 {
  // row-major
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static Mat3 identity() { return Mat3{}; }
  static Mat3 zero() {
    Mat3 r;
    r.m = {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
    return r;
  }
  static Mat3 diag(double a, double b, double c) {
    Mat3 r = zero();
    r.m[0][0] = a; r.m[1][1] = b; r.m[2][2] = c;
    return r;
  }
  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
      r.m[i][0] = c0[i]; r.m[i][1] = c1[i]; r.m[i][2] = c2[i];
    }
    return r;
  }

  double& operator()(int r, int c) { return m[r][c]; }
  double operator()(int r, int c) const { return m[r][c]; }

  Vec3 col(int c) const { return {m[0][c], m[1][c], m[2][c]}; }
  Vec3 row(int r) const { return {m[r][0], m[r][1], m[r][2]}; }

  Vec3 operator*(const Vec3& v) const {
    return {dot(row(0), v), dot(row(1), v), dot(row(2), v)};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r = zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
    return r;
  }
  Mat3 operator+(const Mat3& o) const {
    Mat3 r = zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
    return r;
  }
  Mat3 operator*(double s) const {
    Mat3 r = *this;
    for (auto& row_ : r.m)
      for (auto& v : row_) v *= s;
    return r;
  }
  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }
  double trace() const { return m[0][0] + m[1][1] + m[2][2]; }
  double det() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
  Mat3 inverse() const {
    double d = det();
    Mat3 r;
    r.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
    r.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
    r.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
    r.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
    r.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
    r.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
    r.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
    r.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
    r.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
    return r;
  }
};

// Eigen-decomposition of a symmetric 3x3 by cyclic Jacobi rotations.
// Returns eigenvalues (ascending) and the matching eigenvectors as columns.
inline void eigen_symmetric(const Mat3& a_in, Vec3& eigenvalues, Mat3& eigenvectors) {
  Mat3 a = a_in;
  Mat3 v = Mat3::identity();
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = std::abs(a(0, 1)) + std::abs(a(0, 2)) + std::abs(a(1, 2));
    if (off < 1e-15) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a(p, q)) < 1e-18) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        Mat3 r = Mat3::identity();
        r(p, p) = c; r(q, q) = c; r(p, q) = s; r(q, p) = -s;
        a = r.transposed() * a * r;
        v = v * r;
      }
    }
  }
  std::array<int, 3> idx = {0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
  eigenvalues = {a(idx[0], idx[0]), a(idx[1], idx[1]), a(idx[2], idx[2])};
  eigenvectors = Mat3::from_columns(v.col(idx[0]), v.col(idx[1]), v.col(idx[2]));
}

struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  constexpr Quat() = default;
  constexpr Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quat identity() { return {}; }
  static Quat from_axis_angle(const Vec3& axis, double angle) {
    Vec3 a = afford::normalized(axis);
    double h = 0.5 * angle;
    double s = std::sin(h);
    return {std::cos(h), a.x * s, a.y * s, a.z * s};
  }
  // Shortest rotation taking unit vector `from` to unit vector `to`.
  static Quat from_two_vectors(const Vec3& from, const Vec3& to) {
    Vec3 f = afford::normalized(from), t = afford::normalized(to);
    double c = dot(f, t);
    if (c > 1.0 - 1e-12) return identity();
    if (c < -1.0 + 1e-12) {
      Vec3 axis = cross(f, Vec3{1, 0, 0});
      if (norm_sq(axis) < 1e-12) axis = cross(f, Vec3{0, 1, 0});
      return from_axis_angle(axis, kPi);
    }
    Vec3 a = cross(f, t);
    Quat q{1.0 + c, a.x, a.y, a.z};
    return q.normalized();
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quat normalized() const {
    double n = norm();
    return {w / n, x / n, y / n, z / n};
  }
  Quat conjugate() const { return {w, -x, -y, -z}; }

  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }
  Quat operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
  Quat operator+(const Quat& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }

  Vec3 rotate(const Vec3& v) const {
    Vec3 u{x, y, z};
    Vec3 t = cross(u, v) * 2.0;
    return v + t * w + cross(u, t);
  }
  Vec3 rotate_inverse(const Vec3& v) const { return conjugate().rotate(v); }

  Mat3 to_matrix() const {
    Mat3 r;
    double xx = x * x, yy = y * y, zz = z * z;
    double xy = x * y, xz = x * z, yz = y * z;
    double wx = w * x, wy = w * y, wz = w * z;
    r.m = {{{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)},
            {2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)},
            {2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}}};
    return r;
  }
  static Quat from_matrix(const Mat3& m) {
    double t = m.trace();
    Quat q;
    if (t > 0.0) {
      double s = std::sqrt(t + 1.0) * 2.0;
      q = {0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s};
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
      double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
      q = {(m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s};
    } else if (m(1, 1) > m(2, 2)) {
      double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
      q = {(m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s};
    } else {
      double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
      q = {(m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s};
    }
    return q.normalized();
  }

  // Rotation angle to another quaternion, radians.
  double angle_to(const Quat& o) const {
    Quat d = conjugate() * o;
    double c = std::clamp(std::abs(d.w), 0.0, 1.0);
    return 2.0 * std::acos(c);
  }

  bool is_finite() const {
    return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Quat slerp(const Quat& a, Quat b, double t) {
  double c = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  if (c < 0.0) { b = b * -1.0; c = -c; }
  if (c > 1.0 - 1e-10) {
    Quat r{a.w + (b.w - a.w) * t, a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t,
           a.z + (b.z - a.z) * t};
    return r.normalized();
  }
  double theta = std::acos(c);
  double sa = std::sin((1.0 - t) * theta) / std::sin(theta);
  double sb = std::sin(t * theta) / std::sin(theta);
  return (a * sa + b * sb).normalized();
}

// Rigid transform g = (R, p) in SE(3).
struct Pose {
  Quat rotation;   // unit quaternion (w, x, y, z)
  Vec3 position;   // meters

  static Pose identity() { return {}; }

  Vec3 transform_point(const Vec3& v) const { return rotation.rotate(v) + position; }
  Vec3 transform_direction(const Vec3& v) const { return rotation.rotate(v); }

  // this ∘ other: apply `other` first, then this.
  Pose compose(const Pose& other) const {
    return {(rotation * other.rotation).normalized(), rotation.rotate(other.position) + position};
  }
  Pose inverse() const {
    Quat qi = rotation.conjugate();
    return {qi, qi.rotate(position) * -1.0};
  }
  bool is_finite() const { return rotation.is_finite() && afford::is_finite(position); }
  bool is_valid(double tol = 1e-9) const {
    return is_finite() && std::abs(rotation.norm() - 1.0) <= tol;
  }
};

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};

  void expand(const Vec3& p) { lo = comp_min(lo, p); hi = comp_max(hi, p); }
  void expand(const Aabb& b) { lo = comp_min(lo, b.lo); hi = comp_max(hi, b.hi); }
  void inflate(double r) { lo -= Vec3{r, r, r}; hi += Vec3{r, r, r}; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  Vec3 extents() const { return hi - lo; }
  double diagonal() const { return norm(hi - lo); }
  bool contains(const Vec3& p, double tol = 0.0) const {
    return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol &&
           p.y <= hi.y + tol && p.z >= lo.z - tol && p.z <= hi.z + tol;
  }
  bool valid() const { return lo.x <= hi.x; }
};

}  // namespace afford
