#pragma once

#include "rdbc/plant.hpp"

#include <Eigen/Core>

#include <iosfwd>

namespace rdbc {

/// Which half of the unit square a kernel is supported on.
enum class Support {
  Lower,  ///< 0 <= y <= x <= 1
  Upper,  ///< 0 <= x <= y <= 1
};

/// Kernel samples at the nodes (x_i, y_j) of a TriangularGrid. Entries outside the support are zero.
struct TriangularKernel {
  TriangularGrid grid;
  Support support = Support::Lower;
  Eigen::MatrixXd values;

  TriangularKernel() = default;
  TriangularKernel(TriangularGrid g, Support s)
      : grid(g), support(s), values(Eigen::MatrixXd::Zero(g.n + 1, g.n + 1)) {}

  bool contains(Eigen::Index i, Eigen::Index j) const { return support == Support::Lower ? j <= i : i <= j; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
  double& operator()(Eigen::Index i, Eigen::Index j) { return values(i, j); }
};

/// Boundary condition imposed on a Goursat kernel along its y = 0 edge.
struct EdgeCondition {
  enum class Kind { Dirichlet, Robin } kind = Kind::Dirichlet;
  double robin = 0.0;  ///< K_y(x,0) = robin * K(x,0); zero gives Neumann

  static EdgeCondition dirichlet() { return {Kind::Dirichlet, 0.0}; }
  static EdgeCondition neumann() { return {Kind::Robin, 0.0}; }
  static EdgeCondition robin_with(double a) { return {Kind::Robin, a}; }
};

struct SuccessiveApproximation {
  double tolerance = 1e-12;
  int max_iterations = 200;
};

/// Solution of K_xx - K_yy = c K on 0 <= y <= x <= 1 with K(x,x) = -c x / 2.
struct GoursatSolution {
  TriangularKernel kernel;
  Eigen::VectorXd dx_at_one;  ///< K_x(1, y_j)
  int iterations = 0;
};

GoursatSolution solve_goursat(double c, EdgeCondition edge, const TriangularGrid& grid,
                              const SuccessiveApproximation& opts = {});

/// Inverse of the Volterra operator f -> f - A f, i.e. B with B = A + A o B.
TriangularKernel invert_volterra(const TriangularKernel& a);

/// Control-side kernels and the feedback gain k(y) with its derivatives, on the kernel grid.
struct ControlGains {
  TriangularKernel K, L;
  Eigen::VectorXd k, dk, d2k;
  double h = 0.0;

  double k0() const { return k(0); }
  double k1() const { return k(k.size() - 1); }
  double dk1() const { return dk(dk.size() - 1); }
};

/// Observer-error kernels and output-injection gains.
struct ObserverGains {
  TriangularKernel P, Q;
  Eigen::VectorXd p1;
  double p10 = 0.0;
};

struct KernelNorms {
  double k = 0.0;        ///< ||k||
  double p1 = 0.0;       ///< ||p1||
  double g = 0.0;        ///< ||g||
  double L_tilde = 1.0;  ///< 1 + ||L|| over its triangle
  double L_check = 0.0;  ///< ||L(1, .)||
  double Omega1 = 1.0;   ///< 1 + ||Q|| over its triangle
  double Omega2 = 0.0;   ///< max |Q(x,x)| + ||Q_x|| over its triangle
  double max_Q_diagonal = 0.0;
};

struct KernelSet {
  PlantParams plant;
  TriangularGrid grid;
  ControlGains control;
  ObserverGains observer;
  Eigen::VectorXd g;  ///< observer-to-target coupling gain on the kernel grid
  KernelNorms norms;
};

ControlGains solve_control_kernel(const PlantParams& p, const TriangularGrid& grid,
                                  const SuccessiveApproximation& opts = {});
ObserverGains solve_observer_kernel(const PlantParams& p, const TriangularGrid& grid,
                                    const SuccessiveApproximation& opts = {});

/// Fills `g` and `norms` from the control and observer parts.
KernelSet derived_norms(KernelSet ks);

/// Solves both kernel problems and evaluates the derived norms.
KernelSet compute_kernels(const PlantParams& p, const TriangularGrid& grid,
                          const SuccessiveApproximation& opts = {});

/// Squared L2 integral of a kernel over its support (2-D trapezoid).
double kernel_square_integral(const TriangularKernel& a);

/// CSV export: "x,y,A,B" rows over the support of `a`, row-major in (i, j).
void write_kernel_csv(std::ostream& os, const TriangularKernel& a, const TriangularKernel& b, const char* name_a,
                      const char* name_b);

}  // namespace rdbc
