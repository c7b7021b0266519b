#include "rdbc/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace rdbc;

namespace {

int cmd_params(const std::string& config, const std::string& scheme_name) {
  const Scenario sc = load_scenario(config);
  const Scheme scheme = scheme_name.empty() ? sc.scheme : parse_scheme(scheme_name);
  const auto ks = scenario_kernels(sc);
  const TriggerParams tp = derive_trigger_params(*ks, sc.design_for(scheme));
  std::optional<StcConstants> stc;
  if (scheme == Scheme::Stc) stc = make_setup(sc, ks, scheme).stc;
  write_parameter_table(std::cout, parameter_table(*ks, tp, stc));
  if (sc.design_for(scheme).require_assumption2) require_feasible(tp);
  return kExitOk;
}

int cmd_run(const std::string& config, const std::string& scheme_name, const std::string& out) {
  Scenario sc = load_scenario(config);
  if (!scheme_name.empty()) sc.scheme = parse_scheme(scheme_name);
  const std::string dir = out.empty() ? sc.outputs.directory : out;
  const ScenarioRun run = run_scenario(sc);
  write_outputs(run, dir);
  write_run_report(std::cout, run);
  return run.passed() ? kExitOk : kExitMonitor;
}

int cmd_compare(const std::string& config, const std::string& out) {
  const Scenario sc = load_scenario(config);
  const std::string dir = out.empty() ? sc.outputs.directory : out;
  const Comparison c = compare_schemes(sc);
  bool ok = true;
  for (const ScenarioRun& r : c.runs) {
    write_outputs(r, dir + "/" + to_string(r.result.scheme));
    ok = ok && r.passed();
  }
  std::filesystem::create_directories(dir);
  std::ofstream f(dir + "/comparison.txt");
  write_comparison(f, c);
  write_comparison(std::cout, c);
  return ok ? kExitOk : kExitMonitor;
}

int cmd_verify(const std::string& trace_path, double tau, double h) {
  std::ifstream in(trace_path);
  if (!in) throw ConfigError("cannot open " + trace_path);
  SimResult r = read_trace_csv(in);
  std::vector<OracleReport> reports{gamma_c_monitor(r), m_positive_monitor(r)};
  if (tau > 0 || h > 0) {
    r.trigger.tau = tau > 0 ? tau : h;
    if (h > 0) {
      r.scheme = Scheme::Petc;
      r.h_steps = std::lround(h / r.dt);
    }
    reports.push_back(dwell_monitor(r));
    reports.push_back(zeno_monitor(r));
  }
  write_reports(std::cout, reports);
  const DecayFit fit = decay_fit(r);
  std::cout << "\ndecay rate " << fit.rate << " (fit rms " << fit.residual << ")\n";
  return all_passed(reports) ? kExitOk : kExitMonitor;
}

int cmd_kernels(const std::string& config, const std::string& out) {
  const Scenario sc = load_scenario(config);
  const std::string dir = out.empty() ? sc.outputs.directory : out;
  const auto ks = scenario_kernels(sc);
  write_kernel_tables(*ks, dir);
  const OracleReport res = volterra_residual(*ks);
  write_reports(std::cout, {res});
  std::cout << "wrote " << dir << "/kernels.csv and " << dir << "/observer_kernels.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observer-based event-triggered boundary control of reaction-diffusion PDEs"};
  app.require_subcommand(1);

  std::string config, scheme, out, trace;
  double tau = 0.0, h = 0.0;
  const std::string config_help = "scenario JSON file or built-in name";

  auto* params = app.add_subcommand("params", "print derived trigger constants; exit 3 when infeasible");
  params->add_option("config", config, config_help)->required();
  params->add_option("--scheme", scheme, "cetc, petc or stc");

  auto* run = app.add_subcommand("run", "simulate one scheme and write trace, events and report");
  run->add_option("config", config, config_help)->required();
  run->add_option("--scheme", scheme, "cetc, petc or stc");
  run->add_option("--out", out, "output directory");

  auto* compare = app.add_subcommand("compare", "run all three schemes on the same scenario");
  compare->add_option("config", config, config_help)->required();
  compare->add_option("--out", out, "output directory");

  auto* verify = app.add_subcommand("verify", "check a trace CSV against the sign monitors");
  verify->add_option("trace", trace, "trace.csv")->required();
  verify->add_option("--tau", tau, "dwell-time bound for the dwell and event-count checks");
  verify->add_option("--period", h, "PETC period; event times must be multiples of it");

  auto* kernels = app.add_subcommand("kernels", "export kernel tables");
  kernels->add_option("config", config, config_help)->required();
  kernels->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*params) return cmd_params(config, scheme);
    if (*run) return cmd_run(config, scheme, out);
    if (*compare) return cmd_compare(config, out);
    if (*verify) return cmd_verify(trace, tau, h);
    if (*kernels) return cmd_kernels(config, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleParameters& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
