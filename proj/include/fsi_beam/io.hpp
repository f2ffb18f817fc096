#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "basis.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "state.hpp"

namespace fsi_beam {

inline constexpr int kCheckpointVersion = 1;

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct TimeseriesRow {
  long step = 0;
  EnergyLedger ledger;
  double min_height = 0.0;
  int picard_iterations = 0;
  double picard_residual = 0.0;
  double dt = 0.0;
  CompatibilityResiduals compat;
};

inline const std::vector<std::string>& timeseries_columns() {
  static const std::vector<std::string> cols = {
      "t",           "step",          "E_kinetic_fluid",   "E_kinetic_beam",  "E_elastic",
      "E_total",     "dissipation_cum", "balance_residual", "min_height",      "picard_iterations",
      "picard_residual", "dt",         "mean_dtg",          "kinematic_residual", "divergence_residual",
      "noslip_residual"};
  return cols;
}

class TimeseriesWriter {
 public:
  // append=true continues an existing file (resumed runs) without a new header.
  TimeseriesWriter(const std::filesystem::path& path, bool append = false)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw Error(ErrorKind::SchemaError, "cannot write '" + path.string() + "'");
    if (!append) {
      const auto& cols = timeseries_columns();
      for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
      out_ << '\n';
    }
  }

  void write(const TimeseriesRow& r) {
    const EnergyLedger& l = r.ledger;
    const double vals[] = {l.E_kinetic_fluid, l.E_kinetic_beam, l.E_elastic, l.E_total, l.dissipation_cum,
                           l.balance_residual, r.min_height};
    out_ << format_double(l.t) << ',' << r.step;
    for (double v : vals) out_ << ',' << format_double(v);
    out_ << ',' << r.picard_iterations << ',' << format_double(r.picard_residual) << ',' << format_double(r.dt);
    for (double v : {r.compat.mean_dtg, r.compat.kinematic, r.compat.divergence, r.compat.noslip})
      out_ << ',' << format_double(v);
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

// Velocity and geometry on a uniform (x, z) grid: x in [0, L), z in [0, 1];
// y = z h is the physical height of the point.
inline void write_snapshot(const std::filesystem::path& path, const BasisSet& basis, const StateVector& s, int n_x,
                           int n_z) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::SchemaError, "cannot write '" + path.string() + "'");
  out << "x,z,y,u1,u2,h,dth\n";
  const double L = basis.length;
  const Eigen::VectorXd rate = beam_part(s.alpha);
  for (int i = 0; i < n_x; ++i) {
    const double x = L * i / n_x;
    double h = s.g_mean, hx = 0.0, hxx = 0.0, ht = 0.0;
    for (int b = 0; b < basis.beam_size(); ++b) {
      h += s.g_coeffs[b] * basis.beam[b].value(x);
      hx += s.g_coeffs[b] * basis.beam[b].derivative(x, 1);
      hxx += s.g_coeffs[b] * basis.beam[b].derivative(x, 2);
      ht += rate[b] * basis.beam[b].value(x);
    }
    const FrameScalars f = frame_scalars(h, hx, hxx, 0, 0, 0, 0, 0);
    for (int q = 0; q < n_z; ++q) {
      const double z = static_cast<double>(q) / (n_z - 1);
      Vec2 v = Vec2::Zero();
      for (int j = 0; j < basis.size(); ++j) v += s.alpha[j] * basis.fluid[j].eval(x, z).value;
      const double u1 = f.r * v[0], u2 = z * f.q * v[0] + v[1];
      out << format_double(x) << ',' << format_double(z) << ',' << format_double(z * h) << ','
          << format_double(u1) << ',' << format_double(u2) << ',' << format_double(h) << ',' << format_double(ht)
          << '\n';
    }
  }
}

struct Checkpoint {
  StateVector state;
  EnergyLedger ledger;
  std::string config_hash;
};

inline Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Eigen::VectorXd json_vector(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Json checkpoint_json(const Checkpoint& c) {
  const EnergyLedger& l = c.ledger;
  return Json{{"format", "fsi_beam-checkpoint"},
              {"version", kCheckpointVersion},
              {"config_hash", c.config_hash},
              {"t", c.state.t},
              {"step", c.state.step},
              {"g_mean", c.state.g_mean},
              {"g_coeffs", vector_json(c.state.g_coeffs)},
              {"alpha", vector_json(c.state.alpha)},
              {"ledger",
               {{"t", l.t},
                {"E_kinetic_fluid", l.E_kinetic_fluid},
                {"E_kinetic_beam", l.E_kinetic_beam},
                {"E_elastic", l.E_elastic},
                {"E_total", l.E_total},
                {"E_initial", l.E_initial},
                {"dissipation_cum", l.dissipation_cum},
                {"balance_residual", l.balance_residual}}}};
}

inline Checkpoint checkpoint_from_json(const Json& j) {
  if (j.value("format", "") != "fsi_beam-checkpoint")
    throw Error(ErrorKind::VersionMismatch, "not a checkpoint document");
  if (j.value("version", -1) != kCheckpointVersion)
    throw Error(ErrorKind::VersionMismatch, "checkpoint version " + std::to_string(j.value("version", -1)) +
                                                ", expected " + std::to_string(kCheckpointVersion));
  Checkpoint c;
  try {
    c.config_hash = j.at("config_hash").get<std::string>();
    c.state.t = j.at("t").get<double>();
    c.state.step = j.at("step").get<long>();
    c.state.g_mean = j.at("g_mean").get<double>();
    c.state.g_coeffs = json_vector(j.at("g_coeffs"));
    c.state.alpha = json_vector(j.at("alpha"));
    const Json& l = j.at("ledger");
    c.ledger.t = l.at("t").get<double>();
    c.ledger.E_kinetic_fluid = l.at("E_kinetic_fluid").get<double>();
    c.ledger.E_kinetic_beam = l.at("E_kinetic_beam").get<double>();
    c.ledger.E_elastic = l.at("E_elastic").get<double>();
    c.ledger.E_total = l.at("E_total").get<double>();
    c.ledger.E_initial = l.at("E_initial").get<double>();
    c.ledger.dissipation_cum = l.at("dissipation_cum").get<double>();
    c.ledger.balance_residual = l.at("balance_residual").get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("checkpoint: ") + e.what());
  }
  return c;
}

inline void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::SchemaError, "cannot write '" + path.string() + "'");
  out << checkpoint_json(c).dump(1) << '\n';
}

// Reads a checkpoint; a non-empty expected_hash must match the stored one.
inline Checkpoint read_checkpoint(const std::filesystem::path& path, const std::string& expected_hash = {}) {
  Checkpoint c = checkpoint_from_json(read_json_file(path));
  if (!expected_hash.empty() && c.config_hash != expected_hash)
    throw Error(ErrorKind::VersionMismatch,
                "checkpoint was written for config " + c.config_hash + ", current config is " + expected_hash);
  return c;
}

}  // namespace fsi_beam
