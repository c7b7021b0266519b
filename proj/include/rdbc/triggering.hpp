#pragma once

#include "rdbc/kernels.hpp"
#include "rdbc/pde_core.hpp"
#include "rdbc/plant.hpp"
#include "rdbc/trigger_params.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rdbc {

enum class Scheme { Cetc, Petc, Stc };

std::string to_string(Scheme s);
/// Accepts "cetc", "petc", "stc"; throws std::invalid_argument otherwise.
Scheme parse_scheme(std::string_view name);

struct EventLog {
  std::vector<double> times;
  std::vector<double> dwell;  // dwell[0] = 0
  std::vector<double> inputs;

  std::size_t size() const { return times.size(); }
};

void write_event_csv(std::ostream& os, const EventLog& log);

/// Constants of the self-triggered wait function.
struct StcConstants {
  double varrho = 0.0;      // lambda + ||p1||^2 / 2
  double sigma_star = 0.0;  // observer-error decay rate, in (0, eps pi^2 / 4]
  double M1 = 0.0;
  double Omega1 = 1.0;
  double Omega2 = 0.0;
  double Psi0 = 0.0;       // |utilde(1,t)| <= Psi0 exp(-sigma_star t)
  double Psi0_star = 0.0;
  double Psi1 = 0.0;       // bound on ||u[0]||
  double Psi2 = 0.0;       // bound on ||u_x[0]||
  // copied so the wait function needs nothing else
  double norm_k = 0.0;
  double eps = 1.0;
  double lambda = 0.0;
};

StcConstants stc_constants(const KernelSet& ks, double psi1, double psi2, double sigma_star,
                           const StateProfile& uhat0, const SpatialGrid& grid);

/// Gamma^c = d^2 - gamma m
double gamma_c(double d, double m, double gamma);
bool cetc_should_fire(const SimState& s, const TriggerParams& tp);

/// Gamma^p = (a + gamma rho) e^{a h} d^2 - gamma rho d^2 - gamma a m
double gamma_p(double d, double m, const TriggerParams& tp, double h);
bool petc_should_fire(const SimState& s, const TriggerParams& tp, double h);

struct StcWait {
  double wait = 0.0;
  double H = 0.0;
  bool capped = false;
};

/// Floor applied to m before it enters the logarithm.
inline constexpr double kStcMinimumM = 1e-30;

double stc_H(double norm_uhat, double t_j, const StcConstants& sc);
StcWait stc_next_wait(double norm_uhat, double m, double t_j, const TriggerParams& tp, const StcConstants& sc,
                      double t_max);
StcWait stc_next_wait(const SimState& s, const TriggerParams& tp, const StcConstants& sc, const SpatialGrid& grid,
                      double t_max);

/// Everything one closed-loop run needs. The kernel set is shared read-only.
struct SimulationSetup {
  PlantParams plant;
  SpatialGrid grid;
  double dt = 1e-3;
  double horizon = 1.0;
  std::shared_ptr<const KernelSet> kernels;
  TriggerParams trigger;
  Scheme scheme = Scheme::Cetc;
  double h = 0.0;  // PETC period; 0 picks the largest dt multiple <= tau
  std::optional<StcConstants> stc;
  double t_max = 0.0;  // STC wait cap; 0 means the horizon
  StateProfile u0;
  StateProfile uhat0;
};

/// Per-step series of a closed-loop run. Row i is time i * dt, recorded after the event decision.
struct SimResult {
  Scheme scheme = Scheme::Cetc;
  PlantParams plant;
  TriggerParams trigger;
  double dt = 0.0;
  long h_steps = 0;  // PETC evaluation period in steps
  std::optional<StcConstants> stc;

  std::vector<double> t, norm_u, norm_uhat, U_held, d, m, gamma_c, gamma_c_pre;
  std::vector<double> uhat_1, utilde_0, utilde_1;
  std::vector<int> event;

  EventLog events;
  std::vector<long> event_steps;
  std::vector<double> stc_H;  // H(t_j) per event, STC only

  StateProfile u_final, uhat_final;

  std::size_t steps() const { return t.size(); }
};

SimResult run_scheme(const SimulationSetup& setup);

/// Columns t,norm_u,norm_uhat,U_held,d,m,gamma_c,event
void write_trace_csv(std::ostream& os, const SimResult& r);

/// Reads a trace written by write_trace_csv. Fields absent from the file stay empty; the event
/// log is rebuilt from the event column.
SimResult read_trace_csv(std::istream& is);

}  // namespace rdbc
