#pragma once

#include <cmath>

#include <Eigen/Core>

namespace teamnav {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2d = Vec2<double>;

/// Closed axis-aligned rectangle [lo.x, hi.x] x [lo.y, hi.y].
template <typename Scalar>
struct Bounds {
  Vec2<Scalar> lo = Vec2<Scalar>::Zero();
  Vec2<Scalar> hi = Vec2<Scalar>::Ones();

  static Bounds unit() { return Bounds{}; }

  Vec2<Scalar> extent() const { return hi - lo; }
  Scalar diagonal() const { return extent().norm(); }
  bool degenerate() const { return !(hi.x() > lo.x() && hi.y() > lo.y()); }

  bool contains(const Vec2<Scalar>& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }

  bool operator==(const Bounds&) const = default;
};

using Boundsd = Bounds<double>;

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar distance(const Eigen::MatrixBase<DerivedA>& a,
                                   const Eigen::MatrixBase<DerivedB>& b) {
  using std::sqrt;
  const auto dx = a.x() - b.x();
  const auto dy = a.y() - b.y();
  return sqrt(dx * dx + dy * dy);
}

template <typename Scalar>
Vec2<Scalar> clamp_to_bounds(const Vec2<Scalar>& p, const Bounds<Scalar>& bounds) {
  return p.cwiseMax(bounds.lo).cwiseMin(bounds.hi);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace teamnav
