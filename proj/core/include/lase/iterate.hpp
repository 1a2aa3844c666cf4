#pragma once

#include <Eigen/Core>
#include <cmath>

namespace lase {

// A point z = (x, y) in the product space X x Y. Also used for
// operator/gradient values, which carry the same shape. The joint norm is
// ||z||^2 = ||x||^2 + ||y||^2, computed exactly in that form.
struct Iterate {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  Iterate() = default;
  Iterate(Eigen::VectorXd x_in, Eigen::VectorXd y_in)
      : x(std::move(x_in)), y(std::move(y_in)) {}

  static Iterate Zero(Eigen::Index nx, Eigen::Index ny) {
    return {Eigen::VectorXd::Zero(nx), Eigen::VectorXd::Zero(ny)};
  }

  Eigen::Index dim_x() const { return x.size(); }
  Eigen::Index dim_y() const { return y.size(); }
  Eigen::Index dim() const { return x.size() + y.size(); }

  Eigen::VectorXd flat() const {
    Eigen::VectorXd v(dim());
    v << x, y;
    return v;
  }

  static Iterate from_flat(const Eigen::VectorXd& v, Eigen::Index nx) {
    return {v.head(nx), v.tail(v.size() - nx)};
  }

  double squared_norm() const { return x.squaredNorm() + y.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }

  bool same_shape(const Iterate& o) const {
    return x.size() == o.x.size() && y.size() == o.y.size();
  }

  Iterate& operator+=(const Iterate& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Iterate& operator-=(const Iterate& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Iterate& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend Iterate operator+(Iterate a, const Iterate& b) { return a += b; }
  friend Iterate operator-(Iterate a, const Iterate& b) { return a -= b; }
  friend Iterate operator*(double s, Iterate a) { return a *= s; }
  friend Iterate operator*(Iterate a, double s) { return a *= s; }
  friend Iterate operator/(Iterate a, double s) { return a *= (1.0 / s); }
};

inline double dot(const Iterate& a, const Iterate& b) {
  return a.x.dot(b.x) + a.y.dot(b.y);
}

inline double distance(const Iterate& a, const Iterate& b) {
  return (a - b).norm();
}

inline bool bitwise_equal(const Iterate& a, const Iterate& b) {
  return a.same_shape(b) && a.x == b.x && a.y == b.y;
}

}  // namespace lase
