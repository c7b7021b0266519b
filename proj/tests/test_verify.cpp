#include "rdbc/harness.hpp"
#include "rdbc/verify.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace rdbc;

namespace {

struct FastRuns {
  Scenario sc = [] {
    Scenario s = builtin_scenario("fast-ci");
    s.horizon = 1.0;
    return s;
  }();
  std::shared_ptr<const KernelSet> ks = scenario_kernels(sc);
  SimResult cetc = run_scheme(make_setup(sc, ks, Scheme::Cetc));
  SimResult petc = run_scheme(make_setup(sc, ks, Scheme::Petc));
  SimResult stc = run_scheme(make_setup(sc, ks, Scheme::Stc));
};

const FastRuns& runs() {
  static const FastRuns r;
  return r;
}

std::size_t mid_interval_step(const SimResult& r) {
  REQUIRE(r.event_steps.size() >= 2);
  return static_cast<std::size_t>((r.event_steps[0] + r.event_steps[1]) / 2);
}

}  // namespace

TEST_CASE("matrix exponential reference") {
  const PlantParams p = rdbc::test::baseline_plant();
  const SpatialGrid grid(40);
  const KernelSet ks = compute_kernels(p, TriangularGrid(64));
  const SpatialGains gains = sample_gains(ks, grid);

  SimState zero;
  zero.u = StateProfile::Zero(grid.points());
  zero.uhat = zero.u;
  const auto [u0, uh0] = matexp_reference(zero, p, gains, grid, 1e-3);
  CHECK(u0.cwiseAbs().maxCoeff() == 0.0);
  CHECK(uh0.cwiseAbs().maxCoeff() == 0.0);

  SimState s = rdbc::test::baseline_state(grid);
  s.U_held = 0.3;
  const auto [u1, uh1] = matexp_reference(s, p, gains, grid, 1e-2);
  SimState half = s;
  std::tie(half.u, half.uhat) = matexp_reference(s, p, gains, grid, 5e-3);
  const auto [u2, uh2] = matexp_reference(half, p, gains, grid, 5e-3);
  CHECK((u1 - u2).norm() / u1.norm() < 1e-12);
  CHECK((uh1 - uh2).norm() / uh1.norm() < 1e-12);

  // first-order consistency with the operator it exponentiates
  const SemiDiscreteSystem sys = semi_discrete_system(p, gains, grid);
  const Eigen::Index n = grid.points();
  Eigen::VectorXd x(2 * n);
  x << s.u, s.uhat;
  const double dt = 1e-7;
  const auto [u3, uh3] = matexp_reference(s, p, gains, grid, dt);
  Eigen::VectorXd y(2 * n);
  y << u3, uh3;
  const Eigen::VectorXd euler = x + dt * (sys.A * x + sys.b * s.U_held);
  CHECK((y - euler).norm() / (y - x).norm() < 1e-3);
}

TEST_CASE("composition residual") {
  const KernelSet zero = compute_kernels({1.0, 0.0, 2.0, 0, 1}, TriangularGrid(32));
  CHECK(volterra_residual(zero).max_violation == 0.0);
  CHECK(volterra_residual(zero).passed);

  KernelSet ks = compute_kernels(rdbc::test::fast_plant(), TriangularGrid(64));
  CHECK(volterra_residual(ks).passed);
  ks.control.L(40, 20) += 1e-3;
  const OracleReport bad = volterra_residual(ks);
  CHECK(bad.max_violation >= 1e-3);
  CHECK_FALSE(bad.passed);
  CHECK(bad.x == doctest::Approx(40.0 / 64));
  CHECK(bad.y == doctest::Approx(20.0 / 64));
}

TEST_CASE("monitors pass on faithful runs") {
  const FastRuns& f = runs();
  CHECK(all_passed(run_monitors(f.cetc)));
  CHECK(all_passed(run_monitors(f.petc)));
  CHECK(all_passed(run_monitors(f.stc)));
  CHECK(lemma_bound_monitor(f.petc, Lemma::Lemma2).passed);
  CHECK(lemma_bound_monitor(f.stc, Lemma::Lemma3).passed);
  CHECK(lemma_bound_monitor(f.stc, Lemma::Psi0).passed);
  CHECK(lemma_bound_monitor(f.cetc, Lemma::Lemma1).passed);
}

TEST_CASE("monitors reject seeded violations") {
  const FastRuns& f = runs();
  {
    SimResult r = f.cetc;
    r.gamma_c[mid_interval_step(r)] = 1e-6;
    CHECK_FALSE(gamma_c_monitor(r).passed);
  }
  {
    SimResult r = f.cetc;
    r.m[mid_interval_step(r)] = -1e-9;
    CHECK_FALSE(m_positive_monitor(r).passed);
    r = f.cetc;
    r.m[mid_interval_step(r)] = 0.0;
    CHECK_FALSE(m_positive_monitor(r).passed);
  }
  {
    SimResult r = f.cetc;
    r.events.dwell[1] = 0.1 * r.trigger.tau;
    CHECK_FALSE(dwell_monitor(r).passed);
  }
  {
    SimResult r = f.petc;
    r.h_steps = static_cast<long>(std::ceil(2 * r.trigger.tau / r.dt));
    CHECK_FALSE(dwell_monitor(r).passed);

    SimResult off_grid;
    off_grid.scheme = Scheme::Petc;
    off_grid.dt = 1e-3;
    off_grid.h_steps = 3;
    off_grid.trigger.tau = 0.01;
    off_grid.event_steps = {0, 3, 7};
    off_grid.events.times = {0.0, 0.003, 0.007};
    off_grid.events.dwell = {0.0, 0.003, 0.004};
    CHECK_FALSE(dwell_monitor(off_grid).passed);
    off_grid.event_steps[2] = 6;
    CHECK(dwell_monitor(off_grid).passed);
  }
  {
    SimResult r = f.cetc;
    const double T = r.t.back();
    const std::size_t extra = static_cast<std::size_t>(T / r.trigger.tau) + 2;
    for (std::size_t j = 0; j < extra; ++j) {
      r.events.times.push_back(T);
      r.events.dwell.push_back(0.0);
      r.events.inputs.push_back(0.0);
    }
    CHECK_FALSE(zeno_monitor(r).passed);
  }
  {
    SimResult r = f.petc;
    const std::size_t i = static_cast<std::size_t>(r.h_steps) + 1;
    r.gamma_c[i] = std::abs(r.gamma_c[i]) + 1.0;
    CHECK_FALSE(lemma_bound_monitor(r, Lemma::Lemma2).passed);
  }
  {
    SimResult r = f.stc;
    const std::size_t i = r.event_steps[0] + 1;
    r.d[i] = 10 * std::sqrt(r.stc_H[0]) + 1.0;
    CHECK_FALSE(lemma_bound_monitor(r, Lemma::Lemma3).passed);
    r = f.stc;
    r.m[r.event_steps[0] + 1] = -1e6;
    CHECK_FALSE(lemma_bound_monitor(r, Lemma::Lemma3).passed);
  }
  {
    SimResult r = f.stc;
    r.utilde_1[10] = 2 * r.stc->Psi0;
    CHECK_FALSE(lemma_bound_monitor(r, Lemma::Psi0).passed);
  }
  {
    SimResult r = f.cetc;
    // a steep ramp over one inter-event interval: |d'| far above what the state supports
    for (long i = r.event_steps[0] + 1; i < r.event_steps[1]; ++i) r.d[i] += 1e3 * (r.t[i] - r.t[r.event_steps[0]]);
    CHECK_FALSE(lemma_bound_monitor(r, Lemma::Lemma1).passed);
  }
}

TEST_CASE("lemma bounds that do not apply throw") {
  const FastRuns& f = runs();
  CHECK_THROWS_AS(lemma_bound_monitor(f.cetc, Lemma::Lemma2), std::invalid_argument);
  CHECK_THROWS_AS(lemma_bound_monitor(f.cetc, Lemma::Lemma3), std::invalid_argument);
  CHECK_THROWS_AS(lemma_bound_monitor(f.petc, Lemma::Psi0), std::invalid_argument);
  SimResult stripped = f.cetc;
  stripped.uhat_1.clear();
  CHECK_THROWS_AS(lemma_bound_monitor(stripped, Lemma::Lemma1), std::invalid_argument);
}

TEST_CASE("zero-state trace satisfies every bound") {
  const FastRuns& f = runs();
  for (Scheme scheme : {Scheme::Cetc, Scheme::Petc, Scheme::Stc}) {
    // m0 / (1 + eta dt)^n with eta = 1e4 underflows to an exact zero after ~0.3 s
    SimulationSetup su = make_setup(f.sc, f.ks, scheme);
    su.horizon = 0.05;
    su.u0.setZero();
    su.uhat0.setZero();
    const SimResult r = run_scheme(su);
    for (const OracleReport& rep : run_monitors(r)) {
      CAPTURE(rep.name);
      CHECK(rep.passed);
      CHECK(rep.max_violation <= 0.0);
    }
  }
}

TEST_CASE("decay fit") {
  std::vector<double> t, y;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(i * 1e-3);
    y.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  const DecayFit fit = decay_fit(t, y);
  CHECK(fit.rate == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fit.residual < 1e-9);
  CHECK(fit.t_begin == doctest::Approx(0.5));

  // numerical zero truncates the window
  for (std::size_t i = 900; i < y.size(); ++i) y[i] = 0.0;
  const DecayFit cut = decay_fit(t, y);
  CHECK(cut.rate == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(cut.t_end < 0.9);

  CHECK_THROWS_AS(decay_fit(t, std::vector<double>(3, 1.0)), std::invalid_argument);
  CHECK(decay_fit(runs().cetc).rate > 0);
}

TEST_CASE("report output names each check") {
  std::ostringstream os;
  write_reports(os, run_monitors(runs().petc));
  CHECK(os.str().find("gamma_c") != std::string::npos);
  CHECK(os.str().find("lemma2") != std::string::npos);
  CHECK(to_string(Lemma::Psi0) == "psi0");
}
