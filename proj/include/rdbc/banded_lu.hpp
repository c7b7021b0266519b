#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rdbc {

/// Square band matrix in LAPACK general-band layout with `kl` extra rows for pivot fill-in.
/// Entry A(i, j) lives at storage(kl + ku + i - j, j).
template <typename Scalar>
class BandedMatrix {
 public:
  BandedMatrix(Eigen::Index n, Eigen::Index kl, Eigen::Index ku)
      : n_(n), kl_(kl), ku_(ku), ab_(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(2 * kl + ku + 1, n)) {
    if (n <= 0 || kl < 0 || ku < 0) throw std::invalid_argument("BandedMatrix: bad dimensions");
  }

  Eigen::Index size() const { return n_; }
  Eigen::Index lower() const { return kl_; }
  Eigen::Index upper() const { return ku_; }

  bool in_band(Eigen::Index i, Eigen::Index j) const { return i - j <= kl_ && j - i <= ku_; }

  Scalar& operator()(Eigen::Index i, Eigen::Index j) {
    if (!in_band(i, j)) throw std::out_of_range("BandedMatrix: entry outside band");
    return ab_(kl_ + ku_ + i - j, j);
  }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const {
    return in_band(i, j) ? ab_(kl_ + ku_ + i - j, j) : Scalar(0);
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_, n_);
    for (Eigen::Index j = 0; j < n_; ++j)
      for (Eigen::Index i = std::max<Eigen::Index>(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i)
        a(i, j) = (*this)(i, j);
    return a;
  }

 private:
  template <typename>
  friend class BandedLU;

  Eigen::Index n_, kl_, ku_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ab_;
};

/// LU factorization with partial pivoting of a band matrix (the dgbtf2/dgbtrs scheme).
template <typename Scalar>
class BandedLU {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit BandedLU(BandedMatrix<Scalar> a) : lu_(std::move(a)), piv_(lu_.n_) { factorize(); }

  Eigen::Index size() const { return lu_.n_; }

  template <typename Derived>
  Vector solve(const Eigen::MatrixBase<Derived>& rhs) const {
    if (rhs.size() != lu_.n_) throw std::invalid_argument("BandedLU::solve: size mismatch");
    Vector x = rhs;
    const Eigen::Index n = lu_.n_, kl = lu_.kl_, kv = lu_.kl_ + lu_.ku_;
    const auto& ab = lu_.ab_;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index km = std::min(kl, n - 1 - j);
      if (piv_[j] != j) std::swap(x(j), x(piv_[j]));
      for (Eigen::Index r = 1; r <= km; ++r) x(j + r) -= ab(kv + r, j) * x(j);
    }
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      x(j) /= ab(kv, j);
      const Eigen::Index top = std::max<Eigen::Index>(0, j - kv);
      for (Eigen::Index i = top; i < j; ++i) x(i) -= ab(kv + i - j, j) * x(j);
    }
    return x;
  }

 private:
  void factorize() {
    const Eigen::Index n = lu_.n_, kl = lu_.kl_, ku = lu_.ku_, kv = kl + ku;
    auto& ab = lu_.ab_;
    using std::abs;
    Eigen::Index ju = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index km = std::min(kl, n - 1 - j);
      Eigen::Index p = 0;
      Scalar best = abs(ab(kv, j));
      for (Eigen::Index r = 1; r <= km; ++r) {
        if (abs(ab(kv + r, j)) > best) {
          best = abs(ab(kv + r, j));
          p = r;
        }
      }
      piv_[j] = j + p;
      if (best == Scalar(0)) throw std::runtime_error("BandedLU: singular matrix");
      ju = std::max(ju, std::min(j + ku + p, n - 1));
      if (p != 0) {
        for (Eigen::Index c = j; c <= ju; ++c) std::swap(ab(kv + j - c, c), ab(kv + j + p - c, c));
      }
      const Scalar pivot = ab(kv, j);
      for (Eigen::Index r = 1; r <= km; ++r) ab(kv + r, j) /= pivot;
      for (Eigen::Index c = j + 1; c <= ju; ++c) {
        const Scalar ujc = ab(kv + j - c, c);
        if (ujc == Scalar(0)) continue;
        for (Eigen::Index r = 1; r <= km; ++r) ab(kv + j + r - c, c) -= ab(kv + r, j) * ujc;
      }
    }
  }

  BandedMatrix<Scalar> lu_;
  std::vector<Eigen::Index> piv_;
};

}  // namespace rdbc
