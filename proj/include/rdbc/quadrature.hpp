#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace rdbc {

/// Composite trapezoid rule over uniformly spaced samples with spacing `h`.
template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::MatrixBase<Derived>& f,
                                   typename Derived::Scalar h) {
  const Eigen::Index n = f.size();
  if (n < 2) return typename Derived::Scalar(0);
  return h * (f.sum() - (f(0) + f(n - 1)) / 2);
}

/// Spatial L2 norm (int f^2)^{1/2} with the same trapezoid weights.
template <typename Derived>
typename Derived::Scalar l2_norm(const Eigen::MatrixBase<Derived>& f,
                                 typename Derived::Scalar h) {
  using std::sqrt;
  return sqrt(trapezoid(f.cwiseAbs2(), h));
}

/// Running trapezoid integral; out(0) = 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> cumulative_trapezoid(
    const Eigen::MatrixBase<Derived>& f, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(f.size());
  if (f.size() == 0) return out;
  out(0) = Scalar(0);
  for (Eigen::Index i = 1; i < f.size(); ++i) out(i) = out(i - 1) + h * (f(i - 1) + f(i)) / 2;
  return out;
}

// Second-order finite differences: central in the interior, one-sided at the ends.

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> fd_first(
    const Eigen::MatrixBase<Derived>& f, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = f.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> df = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  if (n < 2) return df;
  if (n == 2) {
    df.setConstant((f(1) - f(0)) / h);
    return df;
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) df(i) = (f(i + 1) - f(i - 1)) / (2 * h);
  df(0) = (-3 * f(0) + 4 * f(1) - f(2)) / (2 * h);
  df(n - 1) = (3 * f(n - 1) - 4 * f(n - 2) + f(n - 3)) / (2 * h);
  return df;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> fd_second(
    const Eigen::MatrixBase<Derived>& f, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = f.size();
  if (n < 4) throw std::invalid_argument("fd_second: need at least 4 samples");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d2f(n);
  const Scalar h2 = h * h;
  for (Eigen::Index i = 1; i + 1 < n; ++i) d2f(i) = (f(i + 1) - 2 * f(i) + f(i - 1)) / h2;
  d2f(0) = (2 * f(0) - 5 * f(1) + 4 * f(2) - f(3)) / h2;
  d2f(n - 1) = (2 * f(n - 1) - 5 * f(n - 2) + 4 * f(n - 3) - f(n - 4)) / h2;
  return d2f;
}

/// Linear interpolation of samples on a uniform grid over [0,1] onto another uniform grid.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> resample_uniform(
    const Eigen::MatrixBase<Derived>& f, Eigen::Index n_to) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n_from = f.size() - 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n_to + 1);
  for (Eigen::Index i = 0; i <= n_to; ++i) {
    // Exact index arithmetic when n_from is a multiple of n_to.
    if ((i * n_from) % n_to == 0) {
      out(i) = f((i * n_from) / n_to);
      continue;
    }
    const Scalar pos = Scalar(i) * Scalar(n_from) / Scalar(n_to);
    const Eigen::Index lo = static_cast<Eigen::Index>(pos);
    const Scalar w = pos - Scalar(lo);
    out(i) = (1 - w) * f(lo) + w * f(lo + 1);
  }
  return out;
}

}  // namespace rdbc
