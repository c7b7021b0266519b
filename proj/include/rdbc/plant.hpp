#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace rdbc {

/// Raised when plant or trigger constants violate a design requirement.
class InfeasibleParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative solver fails to settle.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which boundary carries the measurement. The actuator always sits at x = 1.
enum class Configuration {
  AntiCollocated,  ///< Neumann at x = 0, measure u(0,t)
  Collocated,      ///< Dirichlet at x = 0, measure u(1,t)
};

/// Constant-coefficient reaction-diffusion plant u_t = eps u_xx + lambda u on (0,1)
/// with theta1 u_x(0) = -theta2 u(0) and u_x(1) = -q u(1) + U.
struct PlantParams {
  double eps = 1.0;
  double lambda = 0.0;
  double q = 1.0;
  int theta1 = 0;
  int theta2 = 1;

  bool operator==(const PlantParams&) const = default;

  Configuration configuration() const {
    return theta1 == 1 ? Configuration::AntiCollocated : Configuration::Collocated;
  }

  /// lambda / eps, the coefficient of the kernel equations.
  double reaction_ratio() const { return lambda / eps; }

  /// Robin coefficient of the control target system, q - lambda/(2 eps).
  double q_bar() const { return q - lambda / (2 * eps); }

  /// Throws InfeasibleParameters when the flags or the Robin margin are invalid.
  void validate() const {
    if (!(eps > 0)) throw InfeasibleParameters("eps must be positive");
    if (lambda < 0) throw InfeasibleParameters("lambda must be non-negative");
    if (!(q > 0)) throw InfeasibleParameters("q must be positive");
    const bool flags_ok = (theta1 == 0 || theta1 == 1) && (theta2 == 0 || theta2 == 1) &&
                          theta1 * theta2 == 0 && theta1 + theta2 == 1;
    if (!flags_ok) throw InfeasibleParameters("exactly one of theta1, theta2 must be 1");
    if (!(q > lambda / (2 * eps) + theta1 / 2.0))
      throw InfeasibleParameters("q must exceed lambda/(2 eps) + theta1/2 (got q = " + std::to_string(q) +
                                 ", bound = " + std::to_string(lambda / (2 * eps) + theta1 / 2.0) + ")");
  }
};

/// Uniform grid x_i = i/nx on [0,1].
struct SpatialGrid {
  int nx = 200;

  SpatialGrid() = default;
  explicit SpatialGrid(int n) : nx(n) {
    if (n < 8) throw std::invalid_argument("SpatialGrid: nx must be at least 8");
  }

  double dx() const { return 1.0 / nx; }
  Eigen::Index points() const { return nx + 1; }
  double x(Eigen::Index i) const { return static_cast<double>(i) / nx; }
  Eigen::VectorXd nodes() const { return Eigen::VectorXd::LinSpaced(nx + 1, 0.0, 1.0); }
};

/// Square node lattice (x_i, y_j), spacing 1/n, on which the triangular kernels live.
struct TriangularGrid {
  int n = 256;

  TriangularGrid() = default;
  explicit TriangularGrid(int subdivisions) : n(subdivisions) {
    if (subdivisions < 2) throw std::invalid_argument("TriangularGrid: n must be at least 2");
  }

  double h() const { return 1.0 / n; }
  double x(Eigen::Index i) const { return static_cast<double>(i) / n; }
};

}  // namespace rdbc
