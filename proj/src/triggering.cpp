#include "rdbc/triggering.hpp"

#include "rdbc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rdbc {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Cetc: return "cetc";
    case Scheme::Petc: return "petc";
    case Scheme::Stc: return "stc";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "cetc") return Scheme::Cetc;
  if (name == "petc") return Scheme::Petc;
  if (name == "stc") return Scheme::Stc;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected cetc, petc or stc)");
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void write_event_csv(std::ostream& os, const EventLog& log) {
  os << "j,t_j,dwell_j,U_j\n";
  for (std::size_t j = 0; j < log.size(); ++j)
    os << j << ',' << fmt(log.times[j]) << ',' << fmt(log.dwell[j]) << ',' << fmt(log.inputs[j]) << '\n';
}

StcConstants stc_constants(const KernelSet& ks, double psi1, double psi2, double sigma_star,
                           const StateProfile& uhat0, const SpatialGrid& grid) {
  const PlantParams& p = ks.plant;
  const double sigma_max = p.eps * std::numbers::pi * std::numbers::pi / 4;
  if (!(sigma_star > 0 && sigma_star <= sigma_max * (1 + 1e-12)))
    throw InfeasibleParameters("sigma_star must lie in (0, eps pi^2/4]");
  if (psi1 < 0 || psi2 < 0) throw InfeasibleParameters("initial-data bounds must be non-negative");

  StcConstants sc;
  sc.sigma_star = sigma_star;
  sc.Psi1 = psi1;
  sc.Psi2 = psi2;
  sc.norm_k = ks.norms.k;
  sc.eps = p.eps;
  sc.lambda = p.lambda;
  sc.varrho = p.lambda + ks.norms.p1 * ks.norms.p1 / 2;
  sc.M1 = 2 * p.q + 2 * p.eps * p.q * p.q / (sigma_max + 2 * p.eps * p.q - sigma_star);
  sc.Omega1 = ks.norms.Omega1;
  sc.Omega2 = ks.norms.Omega2;

  const double norm_uhat0 = l2_norm(uhat0, grid);
  const double norm_uhat0_x = rdbc::l2_norm(fd_first(uhat0, grid.dx()), grid.dx());
  const double weight = (sc.M1 + 1) * sc.Omega1 + sc.Omega2;
  sc.Psi0 = (weight * (psi1 + norm_uhat0) + psi2 + norm_uhat0_x) / std::sqrt(2.0);
  const double p10 = ks.observer.p10;
  const double injection = p.lambda > 0 ? p.eps * p.eps * p10 * p10 / p.lambda : 0.0;
  sc.Psi0_star = sc.Psi0 * std::sqrt(injection + 0.5);
  return sc;
}

double gamma_c(double d, double m, double gamma) { return d * d - gamma * m; }

bool cetc_should_fire(const SimState& s, const TriggerParams& tp) { return gamma_c(s.d, s.m, tp.gamma) > 0; }

double gamma_p(double d, double m, const TriggerParams& tp, double h) {
  const double gr = tp.gamma * tp.rho;
  return (tp.a + gr) * std::exp(tp.a * h) * d * d - gr * d * d - tp.gamma * tp.a * m;
}

bool petc_should_fire(const SimState& s, const TriggerParams& tp, double h) { return gamma_p(s.d, s.m, tp, h) > 0; }

double stc_H(double norm_uhat, double t_j, const StcConstants& sc) {
  const double k2 = sc.norm_k * sc.norm_k;
  const double n2 = norm_uhat * norm_uhat;
  const double held = sc.lambda > 0 ? sc.eps * sc.eps * k2 / (sc.lambda * sc.varrho) * n2 : 0.0;
  const double error = sc.Psi0_star * sc.Psi0_star * std::exp(-2 * sc.sigma_star * t_j) / sc.varrho;
  return 2 * k2 * (2 * n2 + held + error);
}

StcWait stc_next_wait(double norm_uhat, double m, double t_j, const TriggerParams& tp, const StcConstants& sc,
                      double t_max) {
  StcWait w;
  w.H = sc.varrho > 0 ? stc_H(norm_uhat, t_j, sc) : 0.0;
  if (!(w.H > 0)) {
    w.wait = std::max(t_max, tp.tau);
    w.capped = true;
    return w;
  }
  const double rate = 2 * sc.varrho + tp.eta;
  const double drift = tp.gamma * tp.rho * w.H / rate;
  const double mm = std::max(m, kStcMinimumM);
  const double g = std::log((tp.gamma * mm + drift) / (w.H + drift)) / rate;
  w.wait = std::max(tp.tau, g);
  if (t_max > 0 && w.wait > t_max && t_max >= tp.tau) {
    w.wait = t_max;
    w.capped = true;
  }
  return w;
}

StcWait stc_next_wait(const SimState& s, const TriggerParams& tp, const StcConstants& sc, const SpatialGrid& grid,
                      double t_max) {
  return stc_next_wait(l2_norm(s.uhat, grid), s.m, s.t, tp, sc, t_max);
}

namespace {

long steps_for(double duration, double dt) { return std::lround(duration / dt); }

// Records row `i` of the result from the post-decision state.
void record(SimResult& r, const SimState& s, const SpatialGrid& grid, double gamma, double gamma_pre, bool fired) {
  const BoundaryTerms b = boundary_terms(s, grid);
  r.t.push_back(s.t);
  r.norm_u.push_back(l2_norm(s.u, grid));
  r.norm_uhat.push_back(b.norm_uhat);
  r.U_held.push_back(s.U_held);
  r.d.push_back(s.d);
  r.m.push_back(s.m);
  r.gamma_c.push_back(gamma_c(s.d, s.m, gamma));
  r.gamma_c_pre.push_back(gamma_pre);
  r.uhat_1.push_back(b.uhat_1);
  r.utilde_0.push_back(b.utilde_0);
  r.utilde_1.push_back(b.utilde_1);
  r.event.push_back(fired ? 1 : 0);
}

}  // namespace

SimResult run_scheme(const SimulationSetup& su) {
  if (!su.kernels) throw std::invalid_argument("run_scheme: kernel set missing");
  if (!(su.dt > 0)) throw std::invalid_argument("run_scheme: dt must be positive");
  if (!(su.horizon >= 0)) throw std::invalid_argument("run_scheme: horizon must be non-negative");
  if (su.u0.size() != su.grid.points() || su.uhat0.size() != su.grid.points())
    throw std::invalid_argument("run_scheme: initial profiles do not match the grid");
  su.plant.validate();
  const TriggerParams& tp = su.trigger;
  const double dt = su.dt;

  SimResult r;
  r.scheme = su.scheme;
  r.plant = su.plant;
  r.trigger = tp;
  r.dt = dt;

  if (su.scheme == Scheme::Petc) {
    if (su.h > 0) {
      r.h_steps = steps_for(su.h, dt);
      if (r.h_steps < 1 || std::abs(r.h_steps * dt - su.h) > 1e-9 * su.h)
        throw std::invalid_argument("run_scheme: PETC period must be a multiple of dt");
      if (su.h > tp.tau * (1 + 1e-12))
        throw InfeasibleParameters("PETC period " + fmt(su.h) + " exceeds the dwell-time bound " + fmt(tp.tau));
    } else {
      r.h_steps = static_cast<long>(std::floor(tp.tau / dt + 1e-9));
      if (r.h_steps < 1) throw InfeasibleParameters("dt exceeds the dwell-time bound; no admissible PETC period");
    }
  }
  if (su.scheme == Scheme::Stc) {
    if (su.plant.configuration() != Configuration::Collocated)
      throw std::invalid_argument("run_scheme: self-triggering needs collocated sensing (theta2 = 1)");
    if (!su.stc) throw std::invalid_argument("run_scheme: self-triggering constants missing");
    r.stc = su.stc;
  }
  const double t_max = su.t_max > 0 ? su.t_max : std::max(su.horizon, tp.tau);

  const SpatialGains gains = sample_gains(*su.kernels, su.grid);
  const CoupledStepper stepper(su.plant, gains, su.grid, dt);

  SimState s;
  s.t = 0.0;
  s.u = su.u0;
  s.uhat = su.uhat0;
  s.m = tp.m0;
  if (su.plant.theta2 == 1) s.u(0) = s.uhat(0) = 0.0;
  long next_stc_step = 0;

  auto fire = [&](long step) {
    const double prev = r.events.size() ? r.events.times.back() : s.t;
    apply_control(s, gains.k, su.grid);
    r.events.times.push_back(s.t);
    r.events.dwell.push_back(s.t - prev);
    r.events.inputs.push_back(s.U_held);
    r.event_steps.push_back(step);
    if (su.scheme == Scheme::Stc) {
      const StcWait w = stc_next_wait(s, tp, *su.stc, su.grid, t_max);
      r.stc_H.push_back(w.H);
      next_stc_step = step + std::max(1L, static_cast<long>(std::ceil(w.wait / dt - 1e-9)));
    }
  };

  const double gamma0 = gamma_c(s.d, s.m, tp.gamma);
  fire(0);
  record(r, s, su.grid, tp.gamma, gamma0, true);

  const long n_steps = steps_for(su.horizon, dt);
  for (long n = 1; n <= n_steps; ++n) {
    stepper.advance(s);
    s.t = n * dt;
    s.d = holding_error(s, gains.k, su.grid);
    s.m = step_m(s.m, tp, su.plant, dt, boundary_terms(s, su.grid));
    const double pre = gamma_c(s.d, s.m, tp.gamma);

    bool due = false;
    switch (su.scheme) {
      case Scheme::Cetc: due = cetc_should_fire(s, tp); break;
      case Scheme::Petc: due = n % r.h_steps == 0 && petc_should_fire(s, tp, r.h_steps * dt); break;
      case Scheme::Stc: due = n == next_stc_step; break;
    }
    if (due) fire(n);
    record(r, s, su.grid, tp.gamma, pre, due);
  }
  r.u_final = s.u;
  r.uhat_final = s.uhat;
  return r;
}

void write_trace_csv(std::ostream& os, const SimResult& r) {
  os << "t,norm_u,norm_uhat,U_held,d,m,gamma_c,event\n";
  for (std::size_t i = 0; i < r.steps(); ++i) {
    os << fmt(r.t[i]) << ',' << fmt(r.norm_u[i]) << ',' << fmt(r.norm_uhat[i]) << ',' << fmt(r.U_held[i]) << ','
       << fmt(r.d[i]) << ',' << fmt(r.m[i]) << ',' << fmt(r.gamma_c[i]) << ',' << r.event[i] << '\n';
  }
}

SimResult read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trace: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  SimResult r;
  const std::map<std::string, std::vector<double>*> columns = {
      {"t", &r.t},         {"norm_u", &r.norm_u}, {"norm_uhat", &r.norm_uhat}, {"U_held", &r.U_held},
      {"d", &r.d},         {"m", &r.m},           {"gamma_c", &r.gamma_c},
  };
  for (const char* required : {"t", "d", "m", "gamma_c", "event"})
    if (std::find(header.begin(), header.end(), required) == header.end())
      throw std::runtime_error(std::string("trace: missing column '") + required + "'");

  long row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    for (; std::getline(ss, cell, ','); ++c) {
      if (c >= header.size()) throw std::runtime_error("trace: too many fields on row " + std::to_string(row + 1));
      double v = 0.0;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("trace: bad number '" + cell + "' on row " + std::to_string(row + 1));
      }
      if (header[c] == "event") {
        r.event.push_back(v != 0.0 ? 1 : 0);
      } else if (auto it = columns.find(header[c]); it != columns.end()) {
        it->second->push_back(v);
      }
    }
    if (c != header.size()) throw std::runtime_error("trace: short row " + std::to_string(row + 1));
    ++row;
  }
  if (r.t.size() >= 2) r.dt = r.t[1] - r.t[0];
  for (std::size_t i = 0; i < r.event.size(); ++i) {
    if (!r.event[i]) continue;
    const double prev = r.events.size() ? r.events.times.back() : r.t[i];
    r.events.times.push_back(r.t[i]);
    r.events.dwell.push_back(r.t[i] - prev);
    r.events.inputs.push_back(r.U_held.empty() ? 0.0 : r.U_held[i]);
    r.event_steps.push_back(static_cast<long>(i));
  }
  return r;
}

}  // namespace rdbc
