#include "rdbc/trigger_params.hpp"

#include "rdbc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rdbc {

Alphas compute_alphas(const PlantParams& p, const ControlGains& gains, const Eigen::VectorXd& p1) {
  const double h = gains.h;
  const double k1 = gains.k1();
  const Eigen::VectorXd integrand = p.eps * gains.d2k + (p.eps * k1 + p.lambda) * gains.k;
  Alphas a;
  a.a1 = 4 * trapezoid(integrand.cwiseAbs2(), h);
  a.a2 = 4 * std::pow(p.eps * p.q * k1 + p.eps * gains.dk1(), 2);
  const double boundary = p.lambda * (p.theta1 * gains.k0() + p.theta2 * k1) / 2;
  a.a3 = 4 * std::pow(boundary + trapezoid(gains.k.cwiseProduct(p1), h), 2);
  return a;
}

Alphas compute_alphas(const KernelSet& ks) { return compute_alphas(ks.plant, ks.control, ks.observer.p1); }

Betas compute_betas(const Alphas& alpha, double gamma, double sigma) {
  if (!(sigma > 0 && sigma < 1)) throw InfeasibleParameters("sigma must lie in (0,1)");
  if (!(gamma > 0)) throw InfeasibleParameters("gamma must be positive");
  const double scale = gamma * (1 - sigma);
  return {alpha.a1 / scale, alpha.a2 / scale, alpha.a3 / scale};
}

double dissipation_budget(const PlantParams& p) {
  const double budget = p.eps * std::min(p.q - p.lambda / (2 * p.eps) - p.theta1 / 2.0, 0.5);
  if (!(budget > 0)) throw InfeasibleParameters("q must exceed lambda/(2 eps) + theta1/2");
  return budget;
}

double check_assumption2(const KernelNorms& norms, const PlantParams& p, const Betas& beta, double B, double kappa1,
                         double kappa2, double kappa3) {
  const double bracket = dissipation_budget(p) - p.eps / (2 * kappa1) -
                         p.lambda * (5 * p.theta1 + 2 * p.theta2) / (8 * kappa2) - norms.g * norms.g / kappa3;
  const double beta_side = 2 * beta.b1 * norms.L_tilde * norms.L_tilde + 2 * beta.b2 +
                           4 * beta.b2 * norms.L_check * norms.L_check;
  return B * bracket - beta_side;
}

double compute_rho(const PlantParams& p, double B, double kappa1) { return p.eps * kappa1 * B / 2; }

double compute_rho1(const PlantParams& p, double k1) { return 4 * p.eps * p.eps * k1 * k1; }

double compute_mdt(double a, double gamma_rho, double sigma) {
  return std::log1p(sigma * a / ((1 - sigma) * (a + gamma_rho))) / a;
}

double compute_mdt(const TriggerParams& tp) { return compute_mdt(tp.a, tp.gamma * tp.rho, tp.sigma); }

SuggestedB suggest_B(const KernelNorms& norms, const PlantParams& p, const Betas& beta, double kappa1) {
  const double budget = dissipation_budget(p);
  SuggestedB out;
  const double reaction = p.lambda * (5 * p.theta1 + 2 * p.theta2) / 8;
  out.kappa2 = reaction > 0 ? reaction / (0.25 * budget) : 1.0;
  const double coupling = norms.g * norms.g;
  out.kappa3 = coupling > 0 ? coupling / (0.25 * budget) : 1.0;
  const double bracket = 0.5 * budget - p.eps / (2 * kappa1);
  if (!(bracket > 0))
    throw InfeasibleParameters("kappa1 too small for a positive feasibility bracket (need kappa1 > " +
                               std::to_string(p.eps / budget) + ")");
  const double beta_side = 2 * beta.b1 * norms.L_tilde * norms.L_tilde + 2 * beta.b2 +
                           4 * beta.b2 * norms.L_check * norms.L_check;
  out.B = beta_side > 0 ? 1.1 * beta_side / bracket : 1.0;
  return out;
}

TriggerParams derive_trigger_params(const KernelSet& ks, const TriggerDesign& design) {
  if (!(design.eta > 0)) throw InfeasibleParameters("eta must be positive");
  if (!(design.kappa1 > 0)) throw InfeasibleParameters("kappa1 must be positive");
  if (!(design.m0 > 0)) throw InfeasibleParameters("m0 must be positive");
  const PlantParams& p = ks.plant;

  TriggerParams tp;
  tp.gamma = design.gamma;
  tp.eta = design.eta;
  tp.sigma = design.sigma;
  tp.m0 = design.m0;
  tp.kappa1 = design.kappa1;

  const Alphas alpha = compute_alphas(ks);
  const Betas beta = compute_betas(alpha, design.gamma, design.sigma);
  tp.alpha1 = alpha.a1;
  tp.alpha2 = alpha.a2;
  tp.alpha3 = alpha.a3;
  tp.beta1 = beta.b1;
  tp.beta2 = beta.b2;
  tp.beta3 = beta.b3;

  if (design.B) {
    if (!(*design.B > 0)) throw InfeasibleParameters("B must be positive");
    tp.B = *design.B;
    tp.kappa2 = design.kappa2.value_or(kDefaultKappa);
    tp.kappa3 = design.kappa3.value_or(kDefaultKappa);
  } else {
    const SuggestedB s = suggest_B(ks.norms, p, beta, design.kappa1);
    tp.B = s.B;
    tp.kappa2 = design.kappa2.value_or(s.kappa2);
    tp.kappa3 = design.kappa3.value_or(s.kappa3);
  }
  if (!(tp.kappa2 > 0 && tp.kappa3 > 0)) throw InfeasibleParameters("kappa2, kappa3 must be positive");

  tp.rho = compute_rho(p, tp.B, tp.kappa1);
  tp.rho1 = compute_rho1(p, ks.control.k1());
  tp.a = 1 + tp.rho1 + tp.eta;
  tp.tau = compute_mdt(tp);
  if (!(tp.tau > 0)) throw InfeasibleParameters("minimal dwell time is not positive");
  tp.assumption2_margin = check_assumption2(ks.norms, p, beta, tp.B, tp.kappa1, tp.kappa2, tp.kappa3);
  return tp;
}

void require_feasible(const TriggerParams& tp) {
  if (!(tp.assumption2_margin > 0))
    throw InfeasibleParameters("event-trigger parameters violate the B/kappa feasibility inequality (margin " +
                               std::to_string(tp.assumption2_margin) + ")");
}

}  // namespace rdbc
