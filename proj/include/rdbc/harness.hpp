#pragma once

#include "rdbc/kernels.hpp"
#include "rdbc/trigger_params.hpp"
#include "rdbc/triggering.hpp"
#include "rdbc/verify.hpp"

#include <json.hpp>

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdbc {

/// Malformed or inconsistent scenario description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process exit codes of the CLI.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitInfeasible = 3, kExitMonitor = 4 };

/// Either a named preset ("baseline", "zero") or explicit samples on the simulation grid.
struct InitialData {
  std::string preset = "baseline";
  std::vector<double> u0, uhat0;

  bool operator==(const InitialData&) const = default;
};

struct StcOptions {
  std::optional<double> sigma_star;  // default eps pi^2 / 4
  std::optional<double> psi1, psi2;  // default: the norms of u[0] and u_x[0]
  double t_max = 0.0;                // 0 means the horizon

  bool operator==(const StcOptions&) const = default;
};

struct Outputs {
  std::string directory = "out";
  bool trace = true;
  bool events = true;
  bool report = true;
  bool kernels = false;

  bool operator==(const Outputs&) const = default;
};

struct Scenario {
  std::string name = "custom";
  PlantParams plant;
  int nx = 200;
  double dt = 1e-3;
  double horizon = 1.0;
  int kernel_n = 200;
  TriggerDesign trigger;
  std::optional<TriggerDesign> trigger_stc;  // replaces `trigger` for the self-triggered run
  Scheme scheme = Scheme::Cetc;
  double h = 0.0;  // PETC period; 0 picks the largest dt multiple <= tau
  StcOptions stc;
  InitialData initial;
  Outputs outputs;

  bool operator==(const Scenario&) const = default;
  /// Throws ConfigError on structural problems (grid, dt, horizon, sample counts).
  void validate() const;
  const TriggerDesign& design_for(Scheme s) const {
    return s == Scheme::Stc && trigger_stc ? *trigger_stc : trigger;
  }
};

Scenario parse_scenario(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& sc);

std::vector<std::string> builtin_names();
Scenario builtin_scenario(const std::string& name);
/// A JSON file path, or the name of a built-in scenario.
Scenario load_scenario(const std::string& path_or_name);

/// Initial profiles on the scenario grid.
std::pair<StateProfile, StateProfile> initial_profiles(const Scenario& sc);

std::shared_ptr<const KernelSet> scenario_kernels(const Scenario& sc);

/// Trigger constants for `scheme`, enforcing the feasibility inequality when the design asks for it.
TriggerParams scenario_trigger(const Scenario& sc, const KernelSet& ks, Scheme scheme);

SimulationSetup make_setup(const Scenario& sc, std::shared_ptr<const KernelSet> ks, Scheme scheme);

struct ScenarioRun {
  Scenario scenario;
  std::shared_ptr<const KernelSet> kernels;
  SimResult result;
  std::vector<OracleReport> reports;
  DecayFit fit;

  bool passed() const { return all_passed(reports); }
};

ScenarioRun run_scenario(const Scenario& sc);
ScenarioRun run_scenario(const Scenario& sc, std::shared_ptr<const KernelSet> ks, Scheme scheme);

struct DwellStats {
  std::size_t count = 0;
  double min = 0.0, median = 0.0, max = 0.0;
};

struct SchemeSummary {
  Scheme scheme = Scheme::Cetc;
  std::size_t events = 0;
  std::array<DwellStats, 4> quartiles;  // dwell statistics of events in each quarter of the horizon
  DecayFit fit;
  double tau = 0.0;
  double h = 0.0;
  bool monitors_passed = true;
};

SchemeSummary summarize(const ScenarioRun& run);

struct Comparison {
  std::vector<ScenarioRun> runs;
  std::vector<SchemeSummary> rows;
};

/// Runs CETC, PETC and STC concurrently on one kernel set and identical initial data.
Comparison compare_schemes(const Scenario& base);
void write_comparison(std::ostream& os, const Comparison& c);

struct ParameterRow {
  std::string name;
  double value = 0.0;
  std::string source;
};

std::vector<ParameterRow> parameter_table(const KernelSet& ks, const TriggerParams& tp,
                                          const std::optional<StcConstants>& stc = std::nullopt);
void write_parameter_table(std::ostream& os, const std::vector<ParameterRow>& rows);

/// trace.csv, events.csv, report.txt, kernels.csv / observer_kernels.csv per the output flags.
void write_outputs(const ScenarioRun& run, const std::string& directory);
void write_kernel_tables(const KernelSet& ks, const std::string& directory);
void write_run_report(std::ostream& os, const ScenarioRun& run);

}  // namespace rdbc
