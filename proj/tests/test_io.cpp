#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>

#include <gtest/gtest.h>

#include <fsi_beam/io.hpp>
#include <fsi_beam/setup.hpp>
#include <fsi_beam/verify.hpp>

namespace fs = std::filesystem;
using namespace fsi_beam;

namespace {

const fs::path kConfigs = fs::path(FSI_BEAM_SOURCE_DIR) / "configs";

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fsi_beam_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Json sine_doc() { return read_json_file(kConfigs / "sine.json"); }

std::optional<ErrorKind> parse_error(const Json& doc, std::string* message = nullptr) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  return std::nullopt;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Config, BundledSineMatchesTheBuiltInCase) {
  const SimConfig c = load_config(kConfigs / "sine.json");
  EXPECT_EQ(c.name, "sine");
  EXPECT_EQ(c.disc.pairs, 16);
  EXPECT_EQ(c.time.dt, 1e-3);
  EXPECT_EQ(c.physics.rho_s, 10.0);
  EXPECT_EQ(config_hash(c), config_hash(verify::sine_config()));
}

TEST(Config, AllBundledConfigsParse) {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
  }
}

TEST(Config, UnknownFieldNamesItsPath) {
  Json doc = sine_doc();
  doc["physics"]["nu"] = 1.0;
  std::string msg;
  EXPECT_EQ(parse_error(doc, &msg), ErrorKind::SchemaError);
  EXPECT_NE(msg.find("physics.nu"), std::string::npos) << msg;
}

TEST(Config, WrongTypeNamesItsPath) {
  Json doc = sine_doc();
  doc["time"]["dt"] = "fast";
  std::string msg;
  EXPECT_EQ(parse_error(doc, &msg), ErrorKind::SchemaError);
  EXPECT_NE(msg.find("time.dt"), std::string::npos) << msg;

  doc = sine_doc();
  doc["initial"]["h0"]["terms"][0].erase("wavenumber");
  EXPECT_EQ(parse_error(doc, &msg), ErrorKind::SchemaError);
  EXPECT_NE(msg.find("initial.h0.terms[0]"), std::string::npos) << msg;
}

TEST(Config, RejectsBadValues) {
  Json doc = sine_doc();
  doc["physics"]["mu"] = -1.0;
  EXPECT_EQ(parse_error(doc), ErrorKind::SchemaError);
  doc = sine_doc();
  doc["version"] = 2;
  EXPECT_EQ(parse_error(doc), ErrorKind::SchemaError);
  doc = sine_doc();
  doc["time"]["dt"] = 3e-3;  // 0.01 is not a multiple
  EXPECT_EQ(parse_error(doc), ErrorKind::SchemaError);
  doc = sine_doc();
  doc["initial"]["u0"] = {{"type", "vortex"}};
  EXPECT_EQ(parse_error(doc), ErrorKind::SchemaError);
}

TEST(Config, OverridesUseDottedKeys) {
  const SimConfig c = load_config(kConfigs / "sine.json", {"time.dt=2e-3", "name=other", "time.dt_halving=true",
                                                          "output.directory=somewhere/else"});
  EXPECT_EQ(c.time.dt, 2e-3);
  EXPECT_EQ(c.name, "other");
  EXPECT_TRUE(c.time.dt_halving);
  EXPECT_EQ(c.output.directory, "somewhere/else");
  EXPECT_THROW(load_config(kConfigs / "sine.json", {"time.dt"}), Error);
  EXPECT_THROW(load_config(kConfigs / "sine.json", {"physics..mu=1"}), Error);
}

TEST(Config, HashTracksTheTrajectoryOnly) {
  const auto base = config_hash(load_config(kConfigs / "sine.json"));
  EXPECT_EQ(base, config_hash(load_config(kConfigs / "sine.json", {"time.t_end=2", "output.output_dt=0.05",
                                                                   "name=x"})));
  EXPECT_NE(base, config_hash(load_config(kConfigs / "sine.json", {"physics.mu=0.2"})));
  EXPECT_NE(base, config_hash(load_config(kConfigs / "sine.json", {"discretization.pairs=12"})));
  EXPECT_NE(base, config_hash(load_config(kConfigs / "sine.json", {"time.dt=2e-3"})));
  EXPECT_EQ(hash_hex(base).size(), 16u);
}

TEST(Config, JsonRoundTrip) {
  const SimConfig c = load_config(kConfigs / "contact_c.json");
  const SimConfig back = parse_config(to_json(c), c.base_dir);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, SampledProfileMatchesFourier) {
  const fs::path dir = scratch_dir("sampled");
  {
    std::ofstream out(dir / "h0.txt");
    out.precision(17);
    for (int i = 0; i < 64; ++i) {
      const double x = i / 64.0;
      out << 1.0 + 0.1 * std::cos(2 * std::numbers::pi * x) + 0.05 * std::sin(4 * std::numbers::pi * x) << '\n';
    }
  }
  const auto sampled = make_profile(Json{{"type", "sampled"}, {"path", "h0.txt"}}, 1.0, dir);
  const FourierProfile exact(1.0, 1.0, {{1, 0.1, 0.0}, {2, 0.0, 0.05}});
  for (double x : {0.0, 0.013, 0.5, 0.77})
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(sampled->derivative(x, d), exact.derivative(x, d), 1e-10) << x << " " << d;
  EXPECT_THROW(make_profile(Json{{"type", "sampled"}, {"path", "missing.txt"}}, 1.0, dir), Error);
}

TEST(Config, LiftedVelocityNeedsFourierH1) {
  SimConfig c = load_config(kConfigs / "contact_b.json");
  c.h1 = {{"type", "exp_sine"}, {"mean", 0.0}, {"amplitude", 0.1}};
  EXPECT_THROW(make_initial_data(c), Error);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.010000000000000002}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Io, TimeseriesLayout) {
  const fs::path dir = scratch_dir("timeseries");
  {
    TimeseriesWriter w(dir / "ts.csv");
    TimeseriesRow r;
    r.step = 3;
    r.ledger.t = 0.003;
    r.ledger.E_total = 1.25;
    r.picard_iterations = 4;
    w.write(r);
  }
  {
    TimeseriesWriter w(dir / "ts.csv", true);
    w.write(TimeseriesRow{});
  }
  const auto l = lines(dir / "ts.csv");
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0].rfind("t,step,E_kinetic_fluid", 0), 0u);
  EXPECT_EQ(std::count(l[0].begin(), l[0].end(), ','), static_cast<long>(timeseries_columns().size()) - 1);
  EXPECT_EQ(std::count(l[1].begin(), l[1].end(), ','), static_cast<long>(timeseries_columns().size()) - 1);
  EXPECT_EQ(l[1].rfind("0.003,3,0,0,0,1.25,", 0), 0u) << l[1];
}

TEST(Io, SnapshotOfTheSineStart) {
  const Model m = build_model(load_config(kConfigs / "sine.json"));
  const fs::path dir = scratch_dir("snapshot");
  write_snapshot(dir / "s.csv", *m.basis, m.start, 8, 5);
  const auto l = lines(dir / "s.csv");
  ASSERT_EQ(l.size(), 1u + 8 * 5);
  EXPECT_EQ(l[0], "x,z,y,u1,u2,h,dth");
  // first row: x = 0, z = 0; h(0) = 1.1 and the fluid is at rest
  double v[7];
  std::sscanf(l[1].c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6]);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_NEAR(v[5], 1.1, 1e-12);
  EXPECT_EQ(v[3], 0.0);
  EXPECT_EQ(v[6], 0.0);
  std::sscanf(l[5].c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6]);
  EXPECT_EQ(v[1], 1.0);
  EXPECT_NEAR(v[2], 1.1, 1e-12);
}

TEST(Io, CheckpointRoundTripIsBitExact) {
  const Model m = build_model(load_config(kConfigs / "contact_c.json"));
  const RunOutcome out = run(*m.integrator, m.start, m.start_ledger(), RunSettings{5e-4, 0.01, false});
  const fs::path dir = scratch_dir("checkpoint");
  write_checkpoint(dir / "c.json", Checkpoint{out.last, out.last_ledger, "abc"});
  const Checkpoint c = read_checkpoint(dir / "c.json", "abc");
  EXPECT_EQ(c.state.t, out.last.t);
  EXPECT_EQ(c.state.step, out.last.step);
  EXPECT_EQ(c.state.g_mean, out.last.g_mean);
  EXPECT_EQ(c.state.alpha, out.last.alpha);
  EXPECT_EQ(c.state.g_coeffs, out.last.g_coeffs);
  EXPECT_EQ(c.ledger.dissipation_cum, out.last_ledger.dissipation_cum);
  EXPECT_EQ(c.ledger.E_initial, out.last_ledger.E_initial);
  EXPECT_EQ(c.ledger.balance_residual, out.last_ledger.balance_residual);
}

TEST(Io, CheckpointMismatchesAreRejected) {
  const fs::path dir = scratch_dir("checkpoint_bad");
  StateVector s;
  s.alpha = Eigen::VectorXd::Zero(2);
  s.g_coeffs = Eigen::VectorXd::Zero(1);
  write_checkpoint(dir / "c.json", Checkpoint{s, {}, "abc"});
  auto kind_of = [&](auto&& f) -> std::optional<ErrorKind> {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  EXPECT_EQ(kind_of([&] { read_checkpoint(dir / "c.json", "def"); }), ErrorKind::VersionMismatch);

  Json j = read_json_file(dir / "c.json");
  j["version"] = 99;
  EXPECT_EQ(kind_of([&] { checkpoint_from_json(j); }), ErrorKind::VersionMismatch);
  j = read_json_file(dir / "c.json");
  j["format"] = "something-else";
  EXPECT_EQ(kind_of([&] { checkpoint_from_json(j); }), ErrorKind::VersionMismatch);
  j = read_json_file(dir / "c.json");
  j.erase("alpha");
  EXPECT_EQ(kind_of([&] { checkpoint_from_json(j); }), ErrorKind::SchemaError);
}
