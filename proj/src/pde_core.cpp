#include "rdbc/pde_core.hpp"

#include "rdbc/quadrature.hpp"

#include <stdexcept>

namespace rdbc {

SpatialGains sample_gains(const KernelSet& ks, const SpatialGrid& grid) {
  SpatialGains g;
  g.k = resample_uniform(ks.control.k, grid.nx);
  g.p1 = resample_uniform(ks.observer.p1, grid.nx);
  g.p10 = ks.observer.p10;
  return g;
}

namespace {

Eigen::Index u_index(Eigen::Index i) { return 2 * i; }
Eigen::Index uhat_index(Eigen::Index i) { return 2 * i + 1; }

}  // namespace

BandedMatrix<double> CoupledStepper::assemble(const PlantParams& p, const SpatialGains& gains,
                                              const SpatialGrid& grid, double dt) {
  const Eigen::Index N = grid.nx;
  const double dx = grid.dx();
  const double r = p.eps / (dx * dx);
  const double ghost = 2 * p.eps / dx;  // weight of a flux prescribed through a ghost node
  BandedMatrix<double> M(2 * (N + 1), 2, 2);

  // Semi-discrete operator entries, accumulated into M = I - dt A.
  auto add = [&](Eigen::Index row, Eigen::Index col, double a) { M(row, col) -= dt * a; };

  for (Eigen::Index i = 0; i <= N; ++i) M(2 * i, 2 * i) = M(2 * i + 1, 2 * i + 1) = 1.0;

  for (int block = 0; block < 2; ++block) {
    auto at = [&](Eigen::Index i) { return block == 0 ? u_index(i) : uhat_index(i); };
    for (Eigen::Index i = 1; i < N; ++i) {
      add(at(i), at(i - 1), r);
      add(at(i), at(i), -2 * r + p.lambda);
      add(at(i), at(i + 1), r);
    }
    // x = 1: u_x = -q u + U (+ p10 utilde for the collocated observer).
    add(at(N), at(N - 1), 2 * r);
    add(at(N), at(N), -2 * r - ghost * p.q + p.lambda);
    // x = 0: Neumann via ghost node, Dirichlet imposed strongly (identity row).
    if (p.theta1 == 1) {
      add(at(0), at(0), -2 * r + p.lambda);
      add(at(0), at(1), 2 * r);
    }
  }
  if (p.theta2 == 1) {
    add(uhat_index(N), u_index(N), ghost * gains.p10);
    add(uhat_index(N), uhat_index(N), -ghost * gains.p10);
  } else {
    // uhat_x(0) = p10 utilde(0) enters through the ghost value uhat_{-1} = uhat_1 - 2 dx p10 utilde(0).
    add(uhat_index(0), u_index(0), -ghost * gains.p10);
    add(uhat_index(0), uhat_index(0), ghost * gains.p10);
  }
  return M;
}

CoupledStepper::CoupledStepper(const PlantParams& p, const SpatialGains& gains, const SpatialGrid& grid, double dt)
    : plant_(p),
      grid_(grid),
      dt_(dt),
      boundary_(p.theta2 == 1 ? grid.nx : 0),
      lu_((dt > 0 ? void() : throw std::invalid_argument("CoupledStepper: dt must be positive"),
           assemble(p, gains, grid, dt))) {
  const Eigen::Index N = grid.nx;
  if (gains.k.size() != N + 1 || gains.p1.size() != N + 1)
    throw std::invalid_argument("CoupledStepper: gains not sampled on the simulation grid");

  input_ = Eigen::VectorXd::Zero(2 * (N + 1));
  input_(u_index(N)) = input_(uhat_index(N)) = dt * 2 * p.eps / grid.dx();

  // Rank-one part: row uhat_i gets -dt p1(x_i) (u_b - uhat_b).
  Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * (N + 1));
  for (Eigen::Index i = 0; i <= N; ++i) w(uhat_index(i)) = -dt * gains.p1(i);
  if (p.theta2 == 1) w(uhat_index(0)) = 0.0;
  correction_ = lu_.solve(w);
  correction_denominator_ = 1.0 + correction_(u_index(boundary_)) - correction_(uhat_index(boundary_));
  if (correction_denominator_ == 0.0) throw std::runtime_error("CoupledStepper: singular injection update");
}

Eigen::VectorXd CoupledStepper::interleave(const StateProfile& u, const StateProfile& uhat) const {
  const Eigen::Index n = grid_.points();
  if (u.size() != n || uhat.size() != n) throw std::invalid_argument("CoupledStepper: profile size mismatch");
  Eigen::VectorXd x(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(u_index(i)) = u(i);
    x(uhat_index(i)) = uhat(i);
  }
  return x;
}

void CoupledStepper::advance(SimState& s) const {
  Eigen::VectorXd rhs = interleave(s.u, s.uhat) + s.U_held * input_;
  if (plant_.theta2 == 1) rhs(u_index(0)) = rhs(uhat_index(0)) = 0.0;
  Eigen::VectorXd y = lu_.solve(rhs);
  const double vy = y(u_index(boundary_)) - y(uhat_index(boundary_));
  y -= (vy / correction_denominator_) * correction_;
  const Eigen::Index n = grid_.points();
  for (Eigen::Index i = 0; i < n; ++i) {
    s.u(i) = y(u_index(i));
    s.uhat(i) = y(uhat_index(i));
  }
}

SimState step_coupled(const SimState& s, const PlantParams& p, const SpatialGains& gains, const SpatialGrid& grid,
                      double dt) {
  const CoupledStepper stepper(p, gains, grid, dt);
  SimState next = s;
  stepper.advance(next);
  next.t = s.t + dt;
  return next;
}

double l2_norm(const StateProfile& f, const SpatialGrid& grid) {
  if (f.size() != grid.points()) throw std::invalid_argument("l2_norm: profile size mismatch");
  return rdbc::l2_norm(f, grid.dx());
}

double holding_error(const SimState& s, const Eigen::VectorXd& k, const SpatialGrid& grid) {
  return trapezoid(k.cwiseProduct(s.uhat_at_event - s.uhat), grid.dx());
}

BoundaryTerms boundary_terms(const SimState& s, const SpatialGrid& grid) {
  const Eigen::Index N = grid.nx;
  BoundaryTerms b;
  b.d = s.d;
  b.norm_uhat = l2_norm(s.uhat, grid);
  b.uhat_1 = s.uhat(N);
  b.utilde_0 = s.u(0) - s.uhat(0);
  b.utilde_1 = s.u(N) - s.uhat(N);
  return b;
}

double step_m(double m, const TriggerParams& tp, const PlantParams& p, double dt, const BoundaryTerms& b) {
  const double forcing = -tp.rho * b.d * b.d + tp.beta1 * b.norm_uhat * b.norm_uhat + tp.beta2 * b.uhat_1 * b.uhat_1 +
                         p.theta1 * tp.beta3 * b.utilde_0 * b.utilde_0 + p.theta2 * tp.beta3 * b.utilde_1 * b.utilde_1;
  return (m + dt * forcing) / (1 + tp.eta * dt);
}

void apply_control(SimState& s, const Eigen::VectorXd& k, const SpatialGrid& grid) {
  s.U_held = trapezoid(k.cwiseProduct(s.uhat), grid.dx());
  s.uhat_at_event = s.uhat;
  s.last_event_time = s.t;
  s.d = 0.0;
}

}  // namespace rdbc
