#pragma once

#include "rdbc/kernels.hpp"
#include "rdbc/pde_core.hpp"
#include "rdbc/triggering.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace rdbc {

/// Outcome of one check. `passed` iff max_violation <= tolerance.
struct OracleReport {
  std::string name;
  double max_violation = -std::numeric_limits<double>::infinity();
  double t = std::numeric_limits<double>::quiet_NaN();  // where the worst case occurred
  double x = std::numeric_limits<double>::quiet_NaN();
  double y = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.0;
  bool passed = true;
  std::string note;

  void finish() { passed = max_violation <= tolerance; }
};

inline constexpr double kSignSlack = 1e-12;
inline constexpr double kLemmaRelativeSlack = 1e-9;

/// Advances (u, uhat) by dt with the exact exponential of the semi-discrete coupled operator,
/// U_held frozen. Assembles its own dense operator in block order [u; uhat].
std::pair<StateProfile, StateProfile> matexp_reference(const SimState& s, const PlantParams& p,
                                                       const SpatialGains& gains, const SpatialGrid& grid, double dt);

/// Dense semi-discrete operator used by matexp_reference: x' = A x + b U.
struct SemiDiscreteSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};
SemiDiscreteSystem semi_discrete_system(const PlantParams& p, const SpatialGains& gains, const SpatialGrid& grid);

/// max |B - A - A o B| over the support, by direct quadrature at every node.
OracleReport volterra_residual(const TriangularKernel& a, const TriangularKernel& b, const std::string& name,
                               double tolerance = 1e-6);
/// Worst of the control (K, L) and observer (P, Q) pairs.
OracleReport volterra_residual(const KernelSet& ks, double tolerance = 1e-6);

enum class Lemma { Lemma1, Lemma2, Lemma3, Psi0 };
std::string to_string(Lemma l);

/// Evaluates the selected inequality at every recorded step. Throws std::invalid_argument when the
/// bound does not apply to the trace's scheme.
OracleReport lemma_bound_monitor(const SimResult& r, Lemma which);

OracleReport gamma_c_monitor(const SimResult& r);
OracleReport m_positive_monitor(const SimResult& r);
/// CETC/STC: dwell >= tau - dt. PETC: events on the h grid and h <= tau.
OracleReport dwell_monitor(const SimResult& r);
/// events <= T/tau + 1 (CETC, STC) or T/h + 1 (PETC)
OracleReport zeno_monitor(const SimResult& r);

/// Every monitor that applies to the trace's scheme.
std::vector<OracleReport> run_monitors(const SimResult& r);
bool all_passed(const std::vector<OracleReport>& reports);
void write_reports(std::ostream& os, const std::vector<OracleReport>& reports);

struct DecayFit {
  double rate = 0.0;      // b-hat, positive for decay
  double residual = 0.0;  // RMS of the log-linear fit
  double t_begin = 0.0, t_end = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(||u|| + ||uhat||) over the second half of the trace. The window is
/// truncated where the norms reach numerical zero.
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& norm_sum);
DecayFit decay_fit(const SimResult& r);

}  // namespace rdbc
