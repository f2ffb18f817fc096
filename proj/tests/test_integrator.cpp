#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include <fsi_beam/setup.hpp>
#include <fsi_beam/verify.hpp>

using namespace fsi_beam;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(FSI_BEAM_SOURCE_DIR) / "configs";

SimConfig config(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return load_config(kConfigs / (name + ".json"), overrides);
}

RunOutcome run_model(const Model& m, double dt, double t_end) {
  return run(*m.integrator, m.start, m.start_ledger(), RunSettings{dt, t_end, true});
}

}  // namespace

TEST(Integrator, StepCount) {
  EXPECT_EQ(step_count(0.5, 1e-3), 500);
  EXPECT_EQ(step_count(0.3, 0.1), 3);
  EXPECT_EQ(step_count(0.25, 0.1), 3);
  EXPECT_EQ(step_count(10.0, 1e-3), 10000);
}

TEST(Integrator, FlatRestIsStationary) {
  const Model m = build_model(config("flat"));
  const RunOutcome out = run_model(m, 1e-3, 0.2);
  ASSERT_EQ(out.status, RunOutcome::Status::Completed);
  EXPECT_EQ(out.last.step, 200);
  EXPECT_EQ(out.last.alpha.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(out.last.g_coeffs.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(out.last.g_mean, 1.0);
  EXPECT_EQ(out.last_ledger.E_total, 0.0);
}

TEST(Integrator, SineRunConservesTheEnergyBudget) {
  const Model m = build_model(config("sine"));
  const RunOutcome out = run_model(m, 1e-3, 0.05);
  ASSERT_EQ(out.status, RunOutcome::Status::Completed);
  ASSERT_EQ(out.states.size(), 51u);
  EXPECT_EQ(out.last.t, 0.05);
  for (std::size_t k = 1; k < out.states.size(); ++k) {
    EXPECT_EQ(out.states[k].step, static_cast<long>(k));
    EXPECT_GE(out.ledger[k].dissipation_cum, out.ledger[k - 1].dissipation_cum);
    EXPECT_LT(std::abs(out.ledger[k].balance_residual), 1e-8);
    EXPECT_LE(out.reports[k - 1].picard_residual, m.integrator->settings().picard_tol);
  }
  // energy moves out of the elastic store
  EXPECT_LT(out.last_ledger.E_elastic, out.ledger.front().E_elastic);
  EXPECT_GT(out.last_ledger.dissipation_cum, 0.0);
}

TEST(Integrator, BalanceResidualIsSecondOrder) {
  const Model coarse = build_model(config("sine"));
  double res[2];
  int k = 0;
  for (double dt : {4e-3, 2e-3}) {
    const RunOutcome out = run_model(coarse, dt, 0.1);
    res[k++] = std::abs(out.last_ledger.balance_residual);
  }
  EXPECT_GT(std::log2(res[0] / res[1]), 1.8);
}

TEST(Integrator, ResumeIsBitIdentical) {
  const Model m = build_model(config("sine"));
  const RunSettings half{1e-3, 0.02, false}, full{1e-3, 0.04, false};
  const RunOutcome straight = run(*m.integrator, m.start, m.start_ledger(), full);
  const RunOutcome first = run(*m.integrator, m.start, m.start_ledger(), half);
  const RunOutcome second = run(*m.integrator, first.last, first.last_ledger, full);
  EXPECT_EQ(second.last.t, straight.last.t);
  EXPECT_EQ(second.last.step, straight.last.step);
  EXPECT_EQ(second.last.alpha, straight.last.alpha);
  EXPECT_EQ(second.last.g_coeffs, straight.last.g_coeffs);
  EXPECT_EQ(second.last_ledger.balance_residual, straight.last_ledger.balance_residual);
}

TEST(Integrator, ContactIsDetectedWithACrossingTime) {
  // the predictor sweep may dip below h_floor on the last step; that is contact, not divergence
  for (const char* name : {"contact_a", "contact_b", "contact_c"}) {
    const SimConfig cfg = config(name);
    const Model m = build_model(cfg);
    const RunOutcome out = run_model(m, cfg.time.dt, cfg.time.t_end);
    ASSERT_EQ(out.status, RunOutcome::Status::Contact) << name << ": " << out.message;
    EXPECT_EQ(out.failed_step, out.last.step + 1) << name;
    EXPECT_GT(m.integrator->min_height(out.last), cfg.time.h_floor) << name;
    EXPECT_GT(out.contact_time, out.last.t) << name;
    EXPECT_LE(out.contact_time, out.last.t + cfg.time.dt * (1 + 1e-12)) << name;
  }
}

TEST(Integrator, OversizedStepReportsPicardDivergence) {
  const Model m = build_model(config("dt_too_large"));
  const RunOutcome out = run_model(m, 0.1, 0.5);
  EXPECT_EQ(out.status, RunOutcome::Status::PicardDivergence);
  EXPECT_EQ(out.failed_step, 1);
  EXPECT_EQ(out.last.step, 0);
}

TEST(Integrator, StepHalvingRecoversFromDivergence) {
  const Model m = build_model(config("dt_too_large", {"time.dt_halving=true"}));
  const RunOutcome out = run_model(m, 0.1, 0.5);
  // the halved steps converge and the beam reaches the floor inside the first step
  EXPECT_EQ(out.status, RunOutcome::Status::Contact) << out.message;
  EXPECT_GT(out.contact_time, 0.0);
  EXPECT_LT(out.contact_time, 0.1);
}

TEST(Integrator, DifferentiatedResidualNeedsAUniformWindow) {
  const Model m = build_model(config("sine"));
  const RunOutcome out = run_model(m, 1e-3, 0.004);
  const Physics& p = m.config.physics;
  const std::vector<StateVector> two(out.states.begin(), out.states.begin() + 2);
  EXPECT_THROW(differentiated_residual(*m.tables, p, two), Error);
  std::vector<StateVector> gappy = {out.states[0], out.states[1], out.states[3]};
  try {
    differentiated_residual(*m.tables, p, gappy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientWindow);
  }
  EXPECT_EQ(differentiated_residual(*m.tables, p, out.states).size(), out.states.size() - 2);
}

TEST(Integrator, DifferentiatedResidualShrinksWithDt) {
  const Model m = build_model(config("sine"));
  double worst[2] = {};
  int k = 0;
  for (double dt : {2e-3, 1e-3}) {
    const RunOutcome out = run_model(m, dt, 0.02);
    for (double r : differentiated_residual(*m.tables, m.config.physics, out.states)) worst[k] = std::max(worst[k], r);
    ++k;
  }
  EXPECT_LT(worst[1], 0.6 * worst[0]);
}

TEST(InitialAcceleration, VanishesForFlatRest) {
  const Model m = build_model(config("flat"));
  const InitialAcceleration a = initial_acceleration(*m.tables, m.config.physics, m.start);
  EXPECT_EQ(a.rate.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.dt_u_norm, 0.0);
  EXPECT_EQ(a.dtt_g_norm, 0.0);
}

TEST(InitialAcceleration, SolvesTheSystemForBundledData) {
  for (const char* name : {"sine", "contact_a", "contact_b", "contact_c"}) {
    const Model m = build_model(config(name));
    const InitialAcceleration a = initial_acceleration(*m.tables, m.config.physics, m.start);
    EXPECT_LT(a.residual, 1e-10) << name;
    EXPECT_TRUE(std::isfinite(a.dt_u_norm)) << name;
    EXPECT_GT(a.dtt_g_norm, 0.0) << name;
  }
}

TEST(Integrator, MinimumHeightUsesRefinedSampling) {
  const Model m = build_model(config("sine"));
  EXPECT_NEAR(m.integrator->min_height(m.start), 0.9, 1e-12);
}
