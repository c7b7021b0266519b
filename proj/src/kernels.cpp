#include "rdbc/kernels.hpp"

#include "rdbc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace rdbc {

namespace {

// Running integrals of the characteristic-coordinate solution G(xi, eta) = K((xi+eta)/2, (xi-eta)/2).
// Lattice point (a, b) is (xi, eta) = (a h, b h) with 0 <= b <= min(a, 2n - a).
struct CharacteristicGrid {
  int n;
  double h;
  Eigen::Index last(Eigen::Index a) const { return std::min<Eigen::Index>(a, 2 * n - a); }
};

// S(a, b) = int_0^{eta_b} G(xi_a, s) ds
Eigen::MatrixXd inner_integral(const Eigen::MatrixXd& G, const CharacteristicGrid& cg) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(G.rows(), G.cols());
  for (Eigen::Index a = 0; a <= 2 * cg.n; ++a)
    for (Eigen::Index b = 1; b <= cg.last(a); ++b) S(a, b) = S(a, b - 1) + cg.h * (G(a, b - 1) + G(a, b)) / 2;
  return S;
}

// G(eta, eta), the trace along y = 0, driven by the edge condition.
Eigen::VectorXd edge_trace(const Eigen::MatrixXd& S, double c, const EdgeCondition& edge, const CharacteristicGrid& cg) {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(cg.n + 1);
  if (edge.kind == EdgeCondition::Kind::Dirichlet) return phi;
  const double decay = std::exp(-edge.robin * cg.h);
  auto forcing = [&](Eigen::Index b) { return -c / 2 + c / 2 * S(b, b); };
  for (Eigen::Index b = 1; b <= cg.n; ++b)
    phi(b) = decay * phi(b - 1) + cg.h / 2 * (decay * forcing(b - 1) + forcing(b));
  return phi;
}

}  // namespace

GoursatSolution solve_goursat(double c, EdgeCondition edge, const TriangularGrid& grid,
                              const SuccessiveApproximation& opts) {
  const int n = grid.n;
  const CharacteristicGrid cg{n, grid.h()};
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * n + 1, n + 1);
  Eigen::MatrixXd next = G;

  int iterations = 0;
  bool converged = false;
  while (iterations < opts.max_iterations) {
    ++iterations;
    const Eigen::MatrixXd S = inner_integral(G, cg);
    const Eigen::VectorXd phi = edge_trace(S, c, edge, cg);
    double change = 0.0, scale = 1.0;
    for (Eigen::Index b = 0; b <= n; ++b) {
      double outer = 0.0;  // int_{eta_b}^{xi_a} S(tau, eta_b) dtau
      next(b, b) = phi(b);
      for (Eigen::Index a = b + 1; a <= 2 * n - b; ++a) {
        outer += cg.h * (S(a - 1, b) + S(a, b)) / 2;
        next(a, b) = phi(b) - c / 4 * static_cast<double>(a - b) * cg.h + c / 4 * outer;
      }
      for (Eigen::Index a = b; a <= 2 * n - b; ++a) {
        change = std::max(change, std::abs(next(a, b) - G(a, b)));
        scale = std::max(scale, std::abs(next(a, b)));
      }
    }
    G.swap(next);
    if (!std::isfinite(change)) break;
    if (change <= opts.tolerance * scale) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("kernel successive approximation did not converge after " + std::to_string(iterations) +
                           " iterations (lambda/eps = " + std::to_string(c) + ")");

  GoursatSolution out{TriangularKernel(grid, Support::Lower), Eigen::VectorXd::Zero(n + 1), iterations};
  for (Eigen::Index i = 0; i <= n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) out.kernel(i, j) = G(i + j, i - j);

  // K_x = G_xi + G_eta evaluated on x = 1 through the integral representation.
  const Eigen::MatrixXd S = inner_integral(G, cg);
  const Eigen::VectorXd phi = edge_trace(S, c, edge, cg);
  for (Eigen::Index j = 0; j <= n; ++j) {
    const Eigen::Index a = n + j, b = n - j;
    double along = 0.0;  // int_{eta}^{xi} G(tau, eta) dtau
    for (Eigen::Index t = b + 1; t <= a; ++t) along += cg.h * (G(t - 1, b) + G(t, b)) / 2;
    double dphi = 0.0;
    if (edge.kind == EdgeCondition::Kind::Robin) dphi = -c / 2 + c / 2 * S(b, b) - edge.robin * phi(b);
    out.dx_at_one(j) = c / 4 * S(a, b) + dphi - c / 4 * S(b, b) + c / 4 * along;
  }
  return out;
}

TriangularKernel invert_volterra(const TriangularKernel& a) {
  const Eigen::Index n = a.grid.n;
  const double h = a.grid.h();
  TriangularKernel b(a.grid, a.support);
  if (a.support == Support::Lower) {
    for (Eigen::Index j = 0; j <= n; ++j) {
      b(j, j) = a(j, j);
      for (Eigen::Index i = j + 1; i <= n; ++i) {
        double sum = a(i, j) * b(j, j) / 2;
        const Eigen::Index len = i - j - 1;
        if (len > 0) sum += a.values.row(i).segment(j + 1, len).dot(b.values.col(j).segment(j + 1, len));
        b(i, j) = (a(i, j) + h * sum) / (1 - h * a(i, i) / 2);
      }
    }
  } else {
    for (Eigen::Index j = 0; j <= n; ++j) {
      b(j, j) = a(j, j);
      for (Eigen::Index i = j - 1; i >= 0; --i) {
        double sum = a(i, j) * b(j, j) / 2;
        const Eigen::Index len = j - i - 1;
        if (len > 0) sum += a.values.row(i).segment(i + 1, len).dot(b.values.col(j).segment(i + 1, len));
        b(i, j) = (a(i, j) + h * sum) / (1 - h * a(i, i) / 2);
      }
    }
  }
  return b;
}

ControlGains solve_control_kernel(const PlantParams& p, const TriangularGrid& grid,
                                  const SuccessiveApproximation& opts) {
  p.validate();
  const int n = grid.n;
  const EdgeCondition edge = p.theta1 == 1 ? EdgeCondition::neumann() : EdgeCondition::dirichlet();
  GoursatSolution sol = solve_goursat(p.reaction_ratio(), edge, grid, opts);

  ControlGains out;
  out.h = grid.h();
  out.K = std::move(sol.kernel);
  out.L = invert_volterra(out.K);
  // The q_bar weighting cancels the u(1,t) term of the target boundary condition.
  out.k = sol.dx_at_one + p.q_bar() * out.K.values.row(n).transpose();
  out.dk = fd_first(out.k, out.h);
  out.d2k = fd_second(out.k, out.h);
  return out;
}

ObserverGains solve_observer_kernel(const PlantParams& p, const TriangularGrid& grid,
                                    const SuccessiveApproximation& opts) {
  p.validate();
  const int n = grid.n;
  const double c = p.reaction_ratio();
  ObserverGains out;
  out.p1 = Eigen::VectorXd::Zero(n + 1);

  if (p.configuration() == Configuration::Collocated) {
    // P(x,y) = F(y,x) on x <= y with F(x,0) = 0; target keeps the Robin coefficient q.
    const GoursatSolution f = solve_goursat(c, EdgeCondition::dirichlet(), grid, opts);
    out.P = TriangularKernel(grid, Support::Upper);
    for (Eigen::Index i = 0; i <= n; ++i)
      for (Eigen::Index j = i; j <= n; ++j) out.P(i, j) = f.kernel(j, i);
    for (Eigen::Index i = 0; i <= n; ++i) out.p1(i) = -p.eps * (f.dx_at_one(i) + p.q * f.kernel(n, i));
    out.p10 = p.lambda / (2 * p.eps);
  } else {
    // P(x,y) = F(1-y, 1-x) on y <= x, F Robin along its edge so that P_x(1,y) + q P(1,y) = 0.
    const GoursatSolution f = solve_goursat(c, EdgeCondition::robin_with(p.q), grid, opts);
    out.P = TriangularKernel(grid, Support::Lower);
    for (Eigen::Index i = 0; i <= n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) out.P(i, j) = f.kernel(n - j, n - i);
    for (Eigen::Index i = 0; i <= n; ++i) out.p1(i) = -p.eps * f.dx_at_one(n - i);
    out.p10 = -p.lambda / (2 * p.eps);
  }
  out.Q = invert_volterra(out.P);
  return out;
}

double kernel_square_integral(const TriangularKernel& a) {
  const Eigen::Index n = a.grid.n;
  const double h = a.grid.h();
  Eigen::VectorXd inner(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    if (a.support == Support::Lower)
      inner(i) = trapezoid(a.values.row(i).head(i + 1).transpose().cwiseAbs2(), h);
    else
      inner(i) = trapezoid(a.values.row(i).segment(i, n - i + 1).transpose().cwiseAbs2(), h);
  }
  return trapezoid(inner, h);
}

namespace {

// d/dx of a kernel along each y-column, restricted to the support.
TriangularKernel x_derivative(const TriangularKernel& a) {
  const Eigen::Index n = a.grid.n;
  const double h = a.grid.h();
  TriangularKernel d(a.grid, a.support);
  for (Eigen::Index j = 0; j <= n; ++j) {
    const Eigen::Index start = a.support == Support::Lower ? j : 0;
    const Eigen::Index len = a.support == Support::Lower ? n - j + 1 : j + 1;
    if (len < 2) continue;
    d.values.col(j).segment(start, len) = fd_first(a.values.col(j).segment(start, len), h);
  }
  return d;
}

}  // namespace

KernelSet derived_norms(KernelSet ks) {
  const Eigen::Index n = ks.grid.n;
  const double h = ks.grid.h();
  const PlantParams& p = ks.plant;
  const auto& K = ks.control.K;
  const Eigen::VectorXd& p1 = ks.observer.p1;

  ks.g.resize(n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    const double conv = trapezoid(K.values.row(i).head(i + 1).transpose().cwiseProduct(p1.head(i + 1)), h);
    ks.g(i) = p1(i) - p.theta1 * p.lambda / 2 * K(i, 0) - conv;
  }

  KernelNorms& nm = ks.norms;
  nm.k = l2_norm(ks.control.k, h);
  nm.p1 = l2_norm(p1, h);
  nm.g = l2_norm(ks.g, h);
  nm.L_tilde = 1 + std::sqrt(kernel_square_integral(ks.control.L));
  nm.L_check = l2_norm(ks.control.L.values.row(n).transpose().eval(), h);

  const auto& Q = ks.observer.Q;
  nm.max_Q_diagonal = Q.values.diagonal().cwiseAbs().maxCoeff();
  nm.Omega1 = 1 + std::sqrt(kernel_square_integral(Q));
  nm.Omega2 = nm.max_Q_diagonal + std::sqrt(kernel_square_integral(x_derivative(Q)));
  return ks;
}

KernelSet compute_kernels(const PlantParams& p, const TriangularGrid& grid, const SuccessiveApproximation& opts) {
  KernelSet ks;
  ks.plant = p;
  ks.grid = grid;
  ks.control = solve_control_kernel(p, grid, opts);
  ks.observer = solve_observer_kernel(p, grid, opts);
  return derived_norms(std::move(ks));
}

void write_kernel_csv(std::ostream& os, const TriangularKernel& a, const TriangularKernel& b, const char* name_a,
                      const char* name_b) {
  os << "x,y," << name_a << ',' << name_b << '\n';
  char line[128];
  const Eigen::Index n = a.grid.n;
  for (Eigen::Index i = 0; i <= n; ++i) {
    for (Eigen::Index j = 0; j <= n; ++j) {
      if (!a.contains(i, j)) continue;
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", a.grid.x(i), a.grid.x(j), a(i, j), b(i, j));
      os << line;
    }
  }
}

}  // namespace rdbc
