#include "rdbc/verify.hpp"

#include "rdbc/quadrature.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace rdbc {

SemiDiscreteSystem semi_discrete_system(const PlantParams& p, const SpatialGains& gains, const SpatialGrid& grid) {
  const Eigen::Index n = grid.points();
  const Eigen::Index N = grid.nx;
  const double dx = grid.dx();
  const double r = p.eps / (dx * dx);
  const double flux = 2 * p.eps / dx;
  const bool dirichlet = p.theta2 == 1;

  SemiDiscreteSystem sys;
  sys.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  sys.b = Eigen::VectorXd::Zero(2 * n);
  for (Eigen::Index off : {Eigen::Index(0), n}) {
    auto A = sys.A.block(off, off, n, n);
    for (Eigen::Index i = 1; i < N; ++i) {
      A(i, i - 1) = r;
      A(i, i) = -2 * r + p.lambda;
      A(i, i + 1) = r;
    }
    A(N, N - 1) = 2 * r;
    A(N, N) = -2 * r - flux * p.q + p.lambda;
    if (!dirichlet) {
      A(0, 0) = -2 * r + p.lambda;
      A(0, 1) = 2 * r;
    }
    sys.b(off + N) = flux;
  }
  // Output injection acts on observer rows through utilde at the sensed boundary.
  const Eigen::Index sensed = dirichlet ? N : 0;
  for (Eigen::Index i = dirichlet ? 1 : 0; i < n; ++i) {
    sys.A(n + i, sensed) += gains.p1(i);
    sys.A(n + i, n + sensed) -= gains.p1(i);
  }
  if (dirichlet) {
    sys.A(n + N, N) += flux * gains.p10;
    sys.A(n + N, n + N) -= flux * gains.p10;
  } else {
    sys.A(n, 0) -= flux * gains.p10;
    sys.A(n, n) += flux * gains.p10;
  }
  return sys;
}

std::pair<StateProfile, StateProfile> matexp_reference(const SimState& s, const PlantParams& p,
                                                       const SpatialGains& gains, const SpatialGrid& grid, double dt) {
  const Eigen::Index n = grid.points();
  const SemiDiscreteSystem sys = semi_discrete_system(p, gains, grid);
  // Constant forcing folded in by augmenting the state with a unit entry.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * n + 1, 2 * n + 1);
  aug.topLeftCorner(2 * n, 2 * n) = sys.A * dt;
  aug.topRightCorner(2 * n, 1) = sys.b * (s.U_held * dt);
  Eigen::VectorXd x(2 * n + 1);
  x << s.u, s.uhat, 1.0;
  if (p.theta2 == 1) x(0) = x(n) = 0.0;
  const Eigen::MatrixXd E = aug.exp();
  const Eigen::VectorXd y = E * x;
  return {y.head(n), y.segment(n, n)};
}

OracleReport volterra_residual(const TriangularKernel& a, const TriangularKernel& b, const std::string& name,
                               double tolerance) {
  OracleReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  rep.max_violation = 0.0;
  const Eigen::Index n = a.grid.n;
  const double h = a.grid.h();
  const bool lower = a.support == Support::Lower;
  for (Eigen::Index i = 0; i <= n; ++i) {
    for (Eigen::Index j = 0; j <= n; ++j) {
      if (!a.contains(i, j)) continue;
      const Eigen::Index lo = lower ? j : i, hi = lower ? i : j;
      double integral = 0.0;
      for (Eigen::Index s = lo; s <= hi; ++s) {
        const double w = (s == lo || s == hi) ? 0.5 : 1.0;
        integral += w * a(i, s) * b(s, j);
      }
      if (hi == lo) integral = 0.0;
      const double res = std::abs(b(i, j) - a(i, j) - h * integral);
      if (res > rep.max_violation) {
        rep.max_violation = res;
        rep.x = a.grid.x(i);
        rep.y = a.grid.x(j);
      }
    }
  }
  rep.finish();
  return rep;
}

OracleReport volterra_residual(const KernelSet& ks, double tolerance) {
  OracleReport c = volterra_residual(ks.control.K, ks.control.L, "volterra_control", tolerance);
  OracleReport o = volterra_residual(ks.observer.P, ks.observer.Q, "volterra_observer", tolerance);
  OracleReport& worst = o.max_violation > c.max_violation ? o : c;
  worst.name = "volterra";
  return worst;
}

std::string to_string(Lemma l) {
  switch (l) {
    case Lemma::Lemma1: return "lemma1";
    case Lemma::Lemma2: return "lemma2";
    case Lemma::Lemma3: return "lemma3";
    case Lemma::Psi0: return "psi0";
  }
  return "?";
}

namespace {

OracleReport make_report(const char* name, double tolerance) {
  OracleReport r;
  r.name = name;
  r.tolerance = tolerance;
  return r;
}

// Signed relative excess of lhs over rhs.
double relative_excess(double lhs, double rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return (lhs - rhs) / scale;
}

void observe(OracleReport& rep, double violation, double t) {
  if (violation > rep.max_violation) {
    rep.max_violation = violation;
    rep.t = t;
  }
}

bool has_boundary_series(const SimResult& r) {
  return r.uhat_1.size() == r.steps() && r.utilde_0.size() == r.steps() && r.utilde_1.size() == r.steps();
}

OracleReport lemma1(const SimResult& r) {
  if (!has_boundary_series(r) || r.norm_uhat.size() != r.steps())
    throw std::invalid_argument("lemma1: trace lacks boundary series");
  OracleReport rep = make_report("lemma1", kLemmaRelativeSlack);
  const TriggerParams& tp = r.trigger;
  const PlantParams& p = r.plant;
  const std::size_t n = r.steps();
  // Backward-difference rate of d over (i-1, i]; unusable across an event at i.
  std::vector<double> rate(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < n; ++i)
    if (!r.event[i]) rate[i] = (r.d[i] - r.d[i - 1]) / r.dt;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::isnan(rate[i])) continue;
    const double ut = p.theta1 * r.utilde_0[i] * r.utilde_0[i] + p.theta2 * r.utilde_1[i] * r.utilde_1[i];
    const double rhs = tp.rho1 * r.d[i] * r.d[i] + tp.alpha1 * r.norm_uhat[i] * r.norm_uhat[i] +
                       tp.alpha2 * r.uhat_1[i] * r.uhat_1[i] + tp.alpha3 * ut;
    const double lhs = rate[i] * rate[i];
    // The inequality holds for the exact rate; a backward difference is off by O(dt d''),
    // estimated from the change of the squared rate to the neighbouring steps.
    double rough = 0.0;
    if (i > 1 && !std::isnan(rate[i - 1])) rough = std::max(rough, std::abs(lhs - rate[i - 1] * rate[i - 1]));
    if (i + 1 < n && !std::isnan(rate[i + 1])) rough = std::max(rough, std::abs(lhs - rate[i + 1] * rate[i + 1]));
    observe(rep, relative_excess(lhs - rough, rhs), r.t[i]);
  }
  if (rep.max_violation == -std::numeric_limits<double>::infinity()) rep.max_violation = 0.0;
  rep.finish();
  return rep;
}

OracleReport lemma2(const SimResult& r) {
  if (r.scheme != Scheme::Petc || r.h_steps < 1) throw std::invalid_argument("lemma2 applies to PETC traces only");
  OracleReport rep = make_report("lemma2", kLemmaRelativeSlack);
  const TriggerParams& tp = r.trigger;
  const double gr = tp.gamma * tp.rho;
  for (std::size_t i = 0; i < r.steps(); ++i) {
    const std::size_t anchor = (i / r.h_steps) * r.h_steps;
    const double s = (i - anchor) * r.dt;
    const double d0 = r.d[anchor], m0 = r.m[anchor];
    const double bound =
        ((tp.a + gr) * d0 * d0 * std::exp(tp.a * s) - gr * d0 * d0 - tp.gamma * tp.a * m0) * std::exp(-tp.eta * s) /
        tp.a;
    observe(rep, relative_excess(r.gamma_c[i], bound), r.t[i]);
  }
  rep.finish();
  return rep;
}

OracleReport lemma3(const SimResult& r) {
  if (r.scheme != Scheme::Stc || !r.stc || r.stc_H.size() != r.event_steps.size())
    throw std::invalid_argument("lemma3 applies to STC traces only");
  OracleReport rep = make_report("lemma3", kLemmaRelativeSlack);
  const TriggerParams& tp = r.trigger;
  const double vr = r.stc->varrho;
  const double rate = 2 * vr + tp.eta;
  for (std::size_t j = 0; j < r.event_steps.size(); ++j) {
    const std::size_t begin = r.event_steps[j];
    const std::size_t end = j + 1 < r.event_steps.size() ? r.event_steps[j + 1] : r.steps();
    const double H = r.stc_H[j];
    const double mj = r.m[begin];
    for (std::size_t i = begin; i < end; ++i) {
      const double s = (i - begin) * r.dt;
      const double d2_bound = H * std::exp(2 * vr * s);
      observe(rep, relative_excess(r.d[i] * r.d[i], d2_bound), r.t[i]);
      const double m_bound = mj * std::exp(-tp.eta * s) -
                             tp.rho * H / rate * std::exp(-tp.eta * s) * std::expm1(rate * s);
      observe(rep, relative_excess(m_bound, r.m[i]), r.t[i]);
    }
  }
  rep.finish();
  return rep;
}

OracleReport psi0(const SimResult& r) {
  if (!r.stc || r.plant.theta2 != 1 || r.utilde_1.size() != r.steps())
    throw std::invalid_argument("psi0 needs a collocated trace with self-trigger constants");
  OracleReport rep = make_report("psi0", kLemmaRelativeSlack);
  for (std::size_t i = 0; i < r.steps(); ++i) {
    const double bound = r.stc->Psi0 * std::exp(-r.stc->sigma_star * r.t[i]);
    observe(rep, relative_excess(std::abs(r.utilde_1[i]), bound), r.t[i]);
  }
  rep.finish();
  return rep;
}

}  // namespace

OracleReport lemma_bound_monitor(const SimResult& r, Lemma which) {
  switch (which) {
    case Lemma::Lemma1: return lemma1(r);
    case Lemma::Lemma2: return lemma2(r);
    case Lemma::Lemma3: return lemma3(r);
    case Lemma::Psi0: return psi0(r);
  }
  throw std::invalid_argument("unknown lemma");
}

OracleReport gamma_c_monitor(const SimResult& r) {
  OracleReport rep = make_report("gamma_c", kSignSlack);
  for (std::size_t i = 0; i < r.steps(); ++i) observe(rep, r.gamma_c[i], r.t[i]);
  rep.finish();
  return rep;
}

OracleReport m_positive_monitor(const SimResult& r) {
  OracleReport rep = make_report("m_positive", kSignSlack);
  for (std::size_t i = 0; i < r.steps(); ++i) observe(rep, -r.m[i], r.t[i]);
  // m > 0 is strict; an exact zero fails even though it sits inside the slack.
  rep.finish();
  if (std::any_of(r.m.begin(), r.m.end(), [](double m) { return m == 0.0; })) rep.passed = false;
  return rep;
}

OracleReport dwell_monitor(const SimResult& r) {
  OracleReport rep = make_report("dwell", kSignSlack);
  const double tau = r.trigger.tau;
  if (r.scheme == Scheme::Petc) {
    const double h = r.h_steps * r.dt;
    observe(rep, h - tau, 0.0);
    for (std::size_t j = 0; j < r.event_steps.size(); ++j)
      observe(rep, r.event_steps[j] % r.h_steps == 0 ? -h : 1.0, r.events.times[j]);
    rep.note = "events on multiples of h";
  } else {
    for (std::size_t j = 1; j < r.events.size(); ++j) observe(rep, (tau - r.dt) - r.events.dwell[j], r.events.times[j]);
    rep.note = "dwell >= tau - dt";
  }
  if (rep.max_violation == -std::numeric_limits<double>::infinity()) rep.max_violation = 0.0;
  rep.finish();
  return rep;
}

OracleReport zeno_monitor(const SimResult& r) {
  OracleReport rep = make_report("zeno", 0.0);
  const double T = r.t.empty() ? 0.0 : r.t.back();
  const double period = r.scheme == Scheme::Petc ? r.h_steps * r.dt : r.trigger.tau;
  const double bound = T / period + 1;
  rep.max_violation = static_cast<double>(r.events.size()) - bound;
  rep.t = T;
  rep.note = std::to_string(r.events.size()) + " events";
  rep.finish();
  return rep;
}

std::vector<OracleReport> run_monitors(const SimResult& r) {
  std::vector<OracleReport> out{gamma_c_monitor(r), m_positive_monitor(r), dwell_monitor(r), zeno_monitor(r)};
  if (has_boundary_series(r)) out.push_back(lemma1(r));
  if (r.scheme == Scheme::Petc) out.push_back(lemma2(r));
  if (r.scheme == Scheme::Stc && r.stc) {
    out.push_back(lemma3(r));
    out.push_back(psi0(r));
  }
  return out;
}

bool all_passed(const std::vector<OracleReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const OracleReport& r) { return r.passed; });
}

void write_reports(std::ostream& os, const std::vector<OracleReport>& reports) {
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-6s %14s %10s %12s\n", "check", "result", "max_violation", "tolerance",
                "where");
  os << line;
  for (const OracleReport& r : reports) {
    char where[64] = "-";
    if (!std::isnan(r.t))
      std::snprintf(where, sizeof where, "t=%.6g", r.t);
    else if (!std::isnan(r.x))
      std::snprintf(where, sizeof where, "(%.4g,%.4g)", r.x, r.y);
    std::snprintf(line, sizeof line, "%-18s %-6s %14.6e %10.3g %12s", r.name.c_str(), r.passed ? "pass" : "FAIL",
                  r.max_violation, r.tolerance, where);
    os << line;
    if (!r.note.empty()) os << "  " << r.note;
    os << '\n';
  }
}

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& norm_sum) {
  if (t.size() != norm_sum.size()) throw std::invalid_argument("decay_fit: series length mismatch");
  DecayFit fit;
  const std::size_t n = t.size();
  if (n < 4) return fit;
  const std::size_t begin = n / 2;
  std::size_t end = begin;
  // Numerical zero ends the window.
  while (end < n && norm_sum[end] > 1e-280 && std::isfinite(norm_sum[end])) ++end;
  if (end - begin < 2) return fit;
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double count = static_cast<double>(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const double y = std::log(norm_sum[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  const double tm = st / count, ym = sy / count;
  const double slope = (sty - count * tm * ym) / (stt - count * tm * tm);
  double ss = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const double e = std::log(norm_sum[i]) - (ym + slope * (t[i] - tm));
    ss += e * e;
  }
  fit.rate = -slope;
  fit.residual = std::sqrt(ss / count);
  fit.t_begin = t[begin];
  fit.t_end = t[end - 1];
  fit.points = end - begin;
  return fit;
}

DecayFit decay_fit(const SimResult& r) {
  std::vector<double> sum(r.steps());
  for (std::size_t i = 0; i < r.steps(); ++i) sum[i] = r.norm_u[i] + r.norm_uhat[i];
  return decay_fit(r.t, sum);
}

}  // namespace rdbc
