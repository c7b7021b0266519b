#pragma once

#include "rdbc/kernels.hpp"
#include "rdbc/plant.hpp"

#include <optional>

namespace rdbc {

/// User-chosen event-trigger constants. B and the kappas are optional; when B is absent
/// it is picked by suggest_B.
struct TriggerDesign {
  double gamma = 1.0;
  double eta = 1.0;
  double sigma = 0.9;
  double kappa1 = 25.0;
  double m0 = 1e-4;
  std::optional<double> B;
  std::optional<double> kappa2;
  std::optional<double> kappa3;
  bool require_assumption2 = true;

  bool operator==(const TriggerDesign&) const = default;
};

/// kappa2/kappa3 used alongside an explicitly supplied B when none are given.
inline constexpr double kDefaultKappa = 1e4;

struct Alphas {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;
};

struct Betas {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
};

/// Every constant the dynamic trigger and its dwell-time bound depend on.
struct TriggerParams {
  double gamma = 1.0, eta = 1.0, sigma = 0.9;
  double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
  double beta1 = 0.0, beta2 = 0.0, beta3 = 0.0;
  double rho = 0.0;
  double rho1 = 0.0;
  double a = 1.0;
  double tau = 0.0;  ///< minimal dwell time (s)
  double B = 0.0, kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0;
  double m0 = 1e-4;
  double assumption2_margin = 0.0;

  Betas betas() const { return {beta1, beta2, beta3}; }
};

/// alpha1 = 4 int (eps k'' + eps k(1) k + lambda k)^2, alpha2 = 4 (eps q k(1) + eps k'(1))^2,
/// alpha3 = 4 (lambda (theta1 k(0) + theta2 k(1)) / 2 + int k p1)^2. All samples share spacing `gains.h`.
Alphas compute_alphas(const PlantParams& p, const ControlGains& gains, const Eigen::VectorXd& p1);
Alphas compute_alphas(const KernelSet& ks);

/// beta_i = alpha_i / (gamma (1 - sigma)).
Betas compute_betas(const Alphas& alpha, double gamma, double sigma);

/// eps * min{q - lambda/(2 eps) - theta1/2, 1/2}, the dissipation budget of the target system.
double dissipation_budget(const PlantParams& p);

/// Left side of the feasibility inequality; positive means feasible.
double check_assumption2(const KernelNorms& norms, const PlantParams& p, const Betas& beta, double B, double kappa1,
                         double kappa2, double kappa3);

/// rho = eps kappa1 B / 2
double compute_rho(const PlantParams& p, double B, double kappa1);

/// rho1 = 4 eps^2 k(1)^2
double compute_rho1(const PlantParams& p, double k1);

/// tau = ln(1 + sigma a / ((1 - sigma)(a + gamma rho))) / a
double compute_mdt(double a, double gamma_rho, double sigma);
double compute_mdt(const TriggerParams& tp);

struct SuggestedB {
  double B = 1.0;
  double kappa2 = 1.0;
  double kappa3 = 1.0;
};

/// Deterministic choice: kappa2, kappa3 make their bracket terms 25% of the budget each,
/// then B leaves a margin of 10% of the beta side.
SuggestedB suggest_B(const KernelNorms& norms, const PlantParams& p, const Betas& beta, double kappa1);

/// Full derivation from kernels and a design. Throws InfeasibleParameters on invalid designs;
/// the Assumption-2 margin is stored, not enforced (see require_feasible).
TriggerParams derive_trigger_params(const KernelSet& ks, const TriggerDesign& design);

/// Throws InfeasibleParameters when the stored margin is not positive.
void require_feasible(const TriggerParams& tp);

}  // namespace rdbc
