#pragma once

#include "rdbc/banded_lu.hpp"
#include "rdbc/kernels.hpp"
#include "rdbc/plant.hpp"
#include "rdbc/trigger_params.hpp"

#include <Eigen/Core>

namespace rdbc {

/// Samples of a profile at x_i = i dx, i = 0..nx.
using StateProfile = Eigen::VectorXd;

/// Feedback and injection gains sampled on the simulation grid.
struct SpatialGains {
  Eigen::VectorXd k;
  Eigen::VectorXd p1;
  double p10 = 0.0;
};

SpatialGains sample_gains(const KernelSet& ks, const SpatialGrid& grid);

/// Plant and observer profiles plus the sampled-data controller memory.
struct SimState {
  double t = 0.0;
  StateProfile u;
  StateProfile uhat;
  double U_held = 0.0;
  double m = 0.0;
  double d = 0.0;
  double last_event_time = 0.0;
  StateProfile uhat_at_event;
};

/// Implicit Euler for the coupled plant/observer system on a fixed (grid, dt).
///
/// Unknowns are interleaved (u_0, uhat_0, u_1, uhat_1, ...), so diffusion, the Robin ghost
/// nodes and the boundary injection p10 stay inside a bandwidth-2 matrix. The distributed
/// injection p1(x) * utilde(boundary) is a rank-one column and is folded in by
/// Sherman-Morrison against the banded factorization, which is computed once.
class CoupledStepper {
 public:
  CoupledStepper(const PlantParams& p, const SpatialGains& gains, const SpatialGrid& grid, double dt);

  /// Advances u, uhat by dt with U_held frozen. Does not touch t, d or m.
  void advance(SimState& s) const;

  double dt() const { return dt_; }
  const SpatialGrid& grid() const { return grid_; }

 private:
  static BandedMatrix<double> assemble(const PlantParams& p, const SpatialGains& gains, const SpatialGrid& grid,
                                       double dt);
  Eigen::VectorXd interleave(const StateProfile& u, const StateProfile& uhat) const;

  PlantParams plant_;
  SpatialGrid grid_;
  double dt_;
  Eigen::Index boundary_;  // node carrying the measurement
  Eigen::VectorXd input_;  // dt * d(rhs)/dU
  Eigen::VectorXd correction_;  // M_band^{-1} w
  double correction_denominator_ = 1.0;
  BandedLU<double> lu_;
};

/// One coupled implicit-Euler step; factors a fresh stepper each call.
SimState step_coupled(const SimState& s, const PlantParams& p, const SpatialGains& gains, const SpatialGrid& grid,
                      double dt);

/// Trapezoid (int_0^1 f^2)^{1/2} on the simulation grid.
double l2_norm(const StateProfile& f, const SpatialGrid& grid);

/// d(t) = int k(y) (uhat(y, t_j) - uhat(y, t)) dy
double holding_error(const SimState& s, const Eigen::VectorXd& k, const SpatialGrid& grid);

/// Quantities of the current state that drive the dynamic variable m.
struct BoundaryTerms {
  double d = 0.0;
  double norm_uhat = 0.0;
  double uhat_1 = 0.0;
  double utilde_0 = 0.0;
  double utilde_1 = 0.0;
};

BoundaryTerms boundary_terms(const SimState& s, const SpatialGrid& grid);

/// Implicit-Euler update of m' = -eta m - rho d^2 + beta1 ||uhat||^2 + beta2 uhat(1)^2
/// + theta1 beta3 utilde(0)^2 + theta2 beta3 utilde(1)^2, forcing taken at the new level.
double step_m(double m, const TriggerParams& tp, const PlantParams& p, double dt, const BoundaryTerms& terms);

/// Event update: U <- int k uhat, snapshot uhat, reset d.
void apply_control(SimState& s, const Eigen::VectorXd& k, const SpatialGrid& grid);

}  // namespace rdbc
