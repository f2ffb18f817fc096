#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <fsi_beam/io.hpp>
#include <fsi_beam/parallel.hpp>
#include <fsi_beam/setup.hpp>
#include <fsi_beam/verify.hpp>

namespace fs = std::filesystem;
using namespace fsi_beam;

namespace {

enum Exit { kOk = 0, kFailure = 1, kContact = 2, kDivergence = 3, kConfig = 4 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::SchemaError:
    case ErrorKind::VersionMismatch:
    case ErrorKind::CompatibilityViolation:
    case ErrorKind::InvalidResolution:
    case ErrorKind::NonPositiveInput:
      return kConfig;
    case ErrorKind::ContactReached:
    case ErrorKind::NonPositiveHeight:
      return kContact;
    case ErrorKind::PicardDivergence:
      return kDivergence;
    default:
      return kFailure;
  }
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void say(const Common& c, const std::string& line) {
  if (!c.quiet) std::cout << line << '\n';
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

int print_suites(const std::vector<std::string>& names, bool quiet) {
  bool ok = true;
  for (const auto& name : names) {
    const verify::SuiteResult r = verify::run_suite(name);
    ok = ok && r.passed();
    std::printf("[%s] %s (%.2f s)\n", r.passed() ? "PASS" : "FAIL", r.suite.c_str(), r.seconds);
    if (quiet) continue;
    for (const auto& c : r.checks)
      std::printf("  %-4s %-40s %.3e (tol %.1e) %s\n", c.passed ? "ok" : "FAIL", c.name.c_str(), c.value,
                  c.tolerance, c.detail.c_str());
  }
  return ok ? kOk : kFailure;
}

int cmd_verify(const std::string& suite, bool quiet) {
  if (suite == "all") return print_suites(verify::suite_names(), quiet);
  return print_suites({suite}, quiet);
}

int cmd_run(const Common& opt, const std::string& resume) {
  const SimConfig cfg = load_config(opt.config, opt.overrides);
  const Model m = build_model(cfg);
  const std::string hash = hash_hex(config_hash(cfg));
  const fs::path dir = cfg.output.directory;
  fs::create_directories(dir);
  if (cfg.output.snapshots) fs::create_directories(dir / "snapshots");

  StateVector start = m.start;
  EnergyLedger ledger0 = m.start_ledger();
  const bool resuming = !resume.empty();
  if (resuming) {
    const Checkpoint c = read_checkpoint(resume, hash);
    if (c.state.alpha.size() != m.start.alpha.size() || c.state.g_coeffs.size() != m.start.g_coeffs.size())
      throw Error(ErrorKind::VersionMismatch, "checkpoint dimensions do not match the configured basis");
    start = c.state;
    ledger0 = c.ledger;
  }
  {
    std::ofstream(dir / "config.json") << to_json(cfg).dump(2) << '\n';
  }
  say(opt, "config " + cfg.name + " hash " + hash + ", N=" + std::to_string(m.basis->size()) + ", grid " +
               std::to_string(m.tables->grid.nx()) + "x" + std::to_string(m.tables->grid.nz()));

  const InitialAcceleration seed = initial_acceleration(*m.tables, cfg.physics, m.start, cfg.time.h_floor);
  const double c0 = compute_C0(m.data, cfg.physics.length);
  const double delta = m.integrator->min_height(m.start);

  const long stride = std::lround(cfg.output.output_dt / cfg.time.dt);
  TimeseriesWriter ts(dir / "timeseries.csv", resuming);
  std::vector<StateVector> outputs;
  double worst_balance = 0.0;
  CompatibilityResiduals worst_compat;
  bool dissipation_monotone = true;
  double last_dissipation = ledger0.dissipation_cum;

  auto emit = [&](const StateVector& s, const StepReport* rep, const EnergyLedger& l) {
    worst_balance = std::max(worst_balance, std::abs(l.balance_residual));
    dissipation_monotone = dissipation_monotone && l.dissipation_cum >= last_dissipation;
    last_dissipation = l.dissipation_cum;
    if (s.step % stride != 0 || (resuming && rep == nullptr)) return;
    const Frame f = make_frame(*m.tables, geometry_of(s), cfg.time.h_floor);
    TimeseriesRow row;
    row.step = s.step;
    row.ledger = l;
    row.min_height = m.integrator->min_height(s);
    if (rep) {
      row.picard_iterations = rep->picard_iterations;
      row.picard_residual = rep->picard_residual;
      row.dt = rep->dt;
    }
    row.compat = compatibility_residuals(*m.tables, s, f);
    worst_compat.mean_dtg = std::max(worst_compat.mean_dtg, row.compat.mean_dtg);
    worst_compat.kinematic = std::max(worst_compat.kinematic, row.compat.kinematic);
    worst_compat.divergence = std::max(worst_compat.divergence, row.compat.divergence);
    worst_compat.noslip = std::max(worst_compat.noslip, row.compat.noslip);
    ts.write(row);
    outputs.push_back(s);
    if (cfg.output.snapshots) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%08ld.csv", s.step);
      write_snapshot(dir / "snapshots" / name, *m.basis, s, cfg.output.snapshot_nx, cfg.output.snapshot_nz);
    }
    if (!opt.quiet)
      std::printf("t=%.6f E=%.9e balance=%.3e min_h=%.6f\n", s.t, l.E_total, l.balance_residual, row.min_height);
  };

  RunSettings rs{cfg.time.dt, cfg.time.t_end, false};
  const RunOutcome out = run(*m.integrator, start, ledger0, rs, emit);

  if (cfg.output.checkpoint) write_checkpoint(dir / "checkpoint.json", Checkpoint{out.last, out.last_ledger, hash});

  BudgetSettings bs;
  bs.h_floor = cfg.time.h_floor;
  const NormBudget nb = norm_budget(*m.basis, *m.tables, cfg.physics, outputs, bs);

  const char* status = out.status == RunOutcome::Status::Completed ? "completed"
                       : out.status == RunOutcome::Status::Contact ? "contact"
                                                                   : "picard_divergence";
  Json summary = {{"status", status},
                  {"message", out.message},
                  {"config_hash", hash},
                  {"final_t", out.last.t},
                  {"final_step", out.last.step},
                  {"failed_step", out.failed_step},
                  {"contact_time", std::isfinite(out.contact_time) ? Json(out.contact_time) : Json()},
                  {"delta", delta},
                  {"C0", c0},
                  {"contact_bound", contact_bound(delta, c0)},
                  {"max_balance_residual", worst_balance},
                  {"dissipation_monotone", dissipation_monotone},
                  {"initial_acceleration",
                   {{"residual", seed.residual}, {"dt_u_norm", seed.dt_u_norm}, {"dtt_g_norm", seed.dtt_g_norm}}},
                  {"compatibility",
                   {{"mean_dtg", worst_compat.mean_dtg},
                    {"kinematic", worst_compat.kinematic},
                    {"divergence", worst_compat.divergence},
                    {"noslip", worst_compat.noslip}}},
                  {"norm_budget",
                   {{"dt_u_sup", nb.dt_u_sup},
                    {"grad_dt_u_int", nb.grad_dt_u_int},
                    {"dtt_g_sup", nb.dtt_g_sup},
                    {"dtt_g_sup_system", nb.dtt_g_sup_system},
                    {"dt_g_h2_sup", nb.dt_g_h2_sup},
                    {"u_h1_sup", nb.u_h1_sup},
                    {"min_height", nb.min_height},
                    {"blow_up", nb.blow_up},
                    {"unmonitored", nb.unmonitored}}}};
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

  say(opt, std::string("status ") + status + " at t=" + num(out.last.t) + ", max balance residual " +
               num(worst_balance));
  if (out.status == RunOutcome::Status::Contact) {
    std::cerr << "contact: " << out.message << " (estimated crossing t=" << out.contact_time << ")\n";
    return kContact;
  }
  if (out.status == RunOutcome::Status::PicardDivergence) {
    std::cerr << "picard divergence: " << out.message << '\n';
    return kDivergence;
  }
  return kOk;
}

int cmd_contact_study(const Common& opt) {
  const SimConfig cfg = load_config(opt.config, opt.overrides);
  const Model m = build_model(cfg);
  const double delta = m.integrator->min_height(m.start);
  const double c0 = compute_C0(m.data, cfg.physics.length);
  const double bound = contact_bound(delta, c0);
  RunSettings rs{cfg.time.dt, cfg.time.t_end, false};
  const RunOutcome out = run(*m.integrator, m.start, m.start_ledger(), rs);
  std::printf("delta=%.6e C0=%.6e bound=%.6e\n", delta, c0, bound);
  if (out.status == RunOutcome::Status::Completed) {
    std::printf("no contact up to t=%.6f\n", out.last.t);
    return kOk;
  }
  if (out.status == RunOutcome::Status::PicardDivergence) {
    std::fprintf(stderr, "picard divergence before contact: %s\n", out.message.c_str());
    return kDivergence;
  }
  const bool holds = out.contact_time >= bound * (1.0 - 0.05);
  std::printf("contact at t=%.6e (h_floor=%.3e), bound %s\n", out.contact_time, cfg.time.h_floor,
              holds ? "holds" : "VIOLATED");
  return holds ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled viscous channel flow / elastic beam solver"};
  app.require_subcommand(0, 1);
  Common common;
  unsigned threads = 1;
  std::string verify_suite;
  app.add_option("--threads", threads, "Worker threads for tabulation")->check(CLI::PositiveNumber);
  app.add_option("--verify", verify_suite, "Run a verification suite and exit")
      ->check(CLI::IsMember({"geometry", "basis", "assembly", "correction", "energy", "all"}));
  app.add_flag("--quiet,-q", common.quiet, "Only print summaries");

  auto* run_cmd = app.add_subcommand("run", "Integrate a configuration");
  std::string resume;
  run_cmd->add_option("--config,-c", common.config, "JSON config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--set", common.overrides, "Override a config entry, key=value (dotted keys)");
  run_cmd->add_option("--resume", resume, "Continue from a checkpoint file")->check(CLI::ExistingFile);

  auto* verify_cmd = app.add_subcommand("verify", "Run verification suites");
  std::string suite = "all";
  verify_cmd->add_option("suite", suite, "geometry|basis|assembly|correction|energy|all")
      ->check(CLI::IsMember({"geometry", "basis", "assembly", "correction", "energy", "all"}));

  auto* contact_cmd = app.add_subcommand("contact-study", "Compare a contact time with the a-priori bound");
  contact_cmd->add_option("--config,-c", common.config, "JSON config file")->required()->check(CLI::ExistingFile);
  contact_cmd->add_option("--set", common.overrides, "Override a config entry, key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }
  set_thread_count(threads);

  try {
    if (!verify_suite.empty()) return cmd_verify(verify_suite, common.quiet);
    if (*run_cmd) return cmd_run(common, resume);
    if (*verify_cmd) return cmd_verify(suite, common.quiet);
    if (*contact_cmd) return cmd_contact_study(common);
    std::cout << app.help();
    return kConfig;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
