#pragma once

// Affine expressions in the stacked fast unknowns f of an assembled system.
// Column 0 holds the constant term, column j+1 the coefficient of f_j. With
// zero unknowns the same types carry plain values, so block equations are
// written once and used both to build the fast system and to evaluate it.

#include "blockdyn/spatial.hpp"

#include <Eigen/Dense>

namespace blockdyn {

struct Lin1;

struct Lin6 {
  Eigen::Matrix<double, 6, Eigen::Dynamic> c;

  Lin6() : c(Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, 1)) {}
  explicit Lin6(int unknowns)
      : c(Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, unknowns + 1)) {}
  Lin6(const Vec6& constant, int unknowns) : Lin6(unknowns) { c.col(0) = constant; }

  /// The unit expression for unknowns [first, first + 6).
  static Lin6 unknown(int first, int unknowns) {
    Lin6 out(unknowns);
    out.c.block<6, 6>(0, first + 1).setIdentity();
    return out;
  }

  int unknowns() const { return static_cast<int>(c.cols()) - 1; }
  Vec6 constant() const { return c.col(0); }
  Vec6 value(const Eigen::VectorXd& f) const {
    if (unknowns() == 0) return c.col(0);
    return c.col(0) + c.rightCols(unknowns()) * f;
  }

  Lin6& operator+=(const Lin6& o) {
    c += o.c;
    return *this;
  }
  Lin6& operator-=(const Lin6& o) {
    c -= o.c;
    return *this;
  }
  Lin6& operator+=(const Vec6& k) {
    c.col(0) += k;
    return *this;
  }
  Lin6& operator-=(const Vec6& k) {
    c.col(0) -= k;
    return *this;
  }
};

struct Lin1 {
  Eigen::RowVectorXd c;

  Lin1() : c(Eigen::RowVectorXd::Zero(1)) {}
  explicit Lin1(int unknowns) : c(Eigen::RowVectorXd::Zero(unknowns + 1)) {}
  Lin1(double constant, int unknowns) : Lin1(unknowns) { c(0) = constant; }

  static Lin1 unknown(int index, int unknowns) {
    Lin1 out(unknowns);
    out.c(index + 1) = 1.0;
    return out;
  }

  int unknowns() const { return static_cast<int>(c.size()) - 1; }
  double value(const Eigen::VectorXd& f) const {
    if (unknowns() == 0) return c(0);
    return c(0) + c.tail(unknowns()).dot(f);
  }
};

inline Lin6 operator+(Lin6 a, const Lin6& b) { return a += b; }
inline Lin6 operator-(Lin6 a, const Lin6& b) { return a -= b; }
inline Lin6 operator+(Lin6 a, const Vec6& k) { return a += k; }
inline Lin6 operator-(Lin6 a, const Vec6& k) { return a -= k; }
inline Lin6 operator-(const Lin6& a) {
  Lin6 out = a;
  out.c = -a.c;
  return out;
}
inline Lin6 operator*(const Mat6& m, const Lin6& a) {
  Lin6 out;
  out.c = m * a.c;
  return out;
}
inline Lin6 operator*(double s, const Lin6& a) {
  Lin6 out;
  out.c = s * a.c;
  return out;
}
/// Direction times scalar expression.
inline Lin6 operator*(const Vec6& dir, const Lin1& s) {
  Lin6 out;
  out.c = dir * s.c;
  return out;
}
/// Projection of an expression on a fixed direction.
inline Lin1 dot(const Vec6& dir, const Lin6& a) {
  Lin1 out;
  out.c = dir.transpose() * a.c;
  return out;
}

inline Lin1 operator+(Lin1 a, const Lin1& b) {
  a.c += b.c;
  return a;
}
inline Lin1 operator-(Lin1 a, const Lin1& b) {
  a.c -= b.c;
  return a;
}
inline Lin1 operator+(Lin1 a, double k) {
  a.c(0) += k;
  return a;
}
inline Lin1 operator*(double s, Lin1 a) {
  a.c *= s;
  return a;
}

/// Applies a kinematic transport to every column.
inline Lin6 apply(const KinematicTransport& t, const Lin6& a) { return t.matrix() * a; }
inline Lin6 apply_transpose(const KinematicTransport& t, const Lin6& a) {
  return t.matrix().transpose() * a;
}

}  // namespace blockdyn
