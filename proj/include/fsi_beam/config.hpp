#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/FFT>

#include "assembly.hpp"
#include "basis.hpp"
#include "errors.hpp"
#include "initial_data.hpp"

namespace fsi_beam {

using Json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

struct Discretization {
  int pairs = 16;
  int n_x = 0;  // 0: automatic
  int n_z = 0;  // 0: automatic
  double oversampling = 2.0;
  BeamPairing pairing = BeamPairing::L2;
  int interior_max_wavenumber = -1;
  int interior_profiles = -1;
};

struct TimeSettings {
  double dt = 1e-3;
  double t_end = 1.0;
  double picard_tol = 1e-10;
  int picard_max_iter = 25;
  double h_floor = kDefaultHeightFloor;
  bool dt_halving = false;
  double dt_min = 1e-8;
};

struct OutputSettings {
  std::string directory = "out";
  double output_dt = 0.01;
  bool snapshots = true;
  int snapshot_nx = 64;
  int snapshot_nz = 17;
  bool checkpoint = true;
};

struct SimConfig {
  std::string name = "run";
  Physics physics;
  Discretization disc;
  TimeSettings time;
  Json h0 = {{"type", "constant"}, {"value", 1.0}};
  Json h1 = {{"type", "constant"}, {"value", 0.0}};
  Json u0 = {{"type", "zero"}};
  double compatibility_tol = 1e-8;
  OutputSettings output;
  std::filesystem::path base_dir = ".";  // sampled-profile paths are relative to this
};

namespace detail {

// Typed access into a JSON object that tracks its path and rejects unknown keys.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::SchemaError, (path.empty() ? "<root>" : path) + ": " + what);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& raw(const std::string& key) const {
    if (!has(key)) fail(at(key), "missing required field");
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  double number(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }
  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<int>();
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }
  std::string string(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  Section object(const std::string& key) const { return Section(has(key) ? j_.at(key) : empty(), at(key)); }

  void only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items()) {
      bool known = false;
      for (const char* a : keys) known = known || k == a;
      if (!known) fail(at(k), "unknown field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  static const Json& empty() {
    static const Json e = Json::object();
    return e;
  }
  const Json& j_;
  std::string path_;
};

inline double positive(const Section& s, const std::string& key, double fallback) {
  const double v = s.number(key, fallback);
  if (!(v > 0.0)) Section::fail(s.at(key), "must be positive");
  return v;
}

inline double non_negative(const Section& s, const std::string& key, double fallback) {
  const double v = s.number(key, fallback);
  if (!(v >= 0.0)) Section::fail(s.at(key), "must be non-negative");
  return v;
}

inline void check_profile(const Json& j, const std::string& path) {
  const Section s(j, path);
  const std::string type = s.string("type");
  if (type == "constant") {
    s.only({"type", "value"});
    s.number("value");
  } else if (type == "fourier") {
    s.only({"type", "mean", "terms"});
    s.number("mean", 0.0);
    const Json& terms = s.has("terms") ? s.raw("terms") : Json::array();
    if (!terms.is_array()) Section::fail(s.at("terms"), "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const Section t(terms[i], s.at("terms") + "[" + std::to_string(i) + "]");
      t.only({"wavenumber", "cos", "sin"});
      if (t.integer("wavenumber", 0) < 1) Section::fail(t.at("wavenumber"), "must be an integer >= 1");
      t.number("cos", 0.0);
      t.number("sin", 0.0);
    }
  } else if (type == "exp_sine") {
    s.only({"type", "mean", "amplitude", "wavenumber"});
    s.number("mean", 0.0);
    s.number("amplitude");
    if (s.integer("wavenumber", 1) < 1) Section::fail(s.at("wavenumber"), "must be an integer >= 1");
  } else if (type == "sampled") {
    s.only({"type", "path"});
    s.string("path");
  } else {
    Section::fail(s.at("type"), "unknown profile type '" + type + "'");
  }
}

inline void check_velocity(const Json& j, const std::string& path) {
  const Section s(j, path);
  const std::string type = s.string("type");
  if (type == "zero") {
    s.only({"type"});
  } else if (type == "lifted") {
    s.only({"type", "stirring"});
    const Json& st = s.has("stirring") ? s.raw("stirring") : Json::array();
    if (!st.is_array()) Section::fail(s.at("stirring"), "expected an array");
    for (std::size_t i = 0; i < st.size(); ++i) {
      const Section t(st[i], s.at("stirring") + "[" + std::to_string(i) + "]");
      t.only({"wavenumber", "parity", "amplitude"});
      if (t.integer("wavenumber", 0) < 0) Section::fail(t.at("wavenumber"), "must be >= 0");
      const std::string p = t.string("parity", "sin");
      if (p != "sin" && p != "cos") Section::fail(t.at("parity"), "expected 'sin' or 'cos'");
      t.number("amplitude");
    }
  } else {
    Section::fail(s.at("type"), "unknown velocity type '" + type + "'");
  }
}

}  // namespace detail

// Sets a dotted key ("time.dt") to a value parsed as JSON, or as a bare string
// when it does not parse.
inline void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorKind::SchemaError, "override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::string path;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorKind::SchemaError, "override key '" + key + "' has an empty component");
    path += (path.empty() ? "" : ".") + part;
    if (!node->is_object()) throw Error(ErrorKind::SchemaError, path + ": cannot descend into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

inline SimConfig parse_config(const Json& doc, std::filesystem::path base_dir = ".") {
  using detail::Section;
  const Section root(doc, "");
  root.only({"version", "name", "physics", "discretization", "time", "initial", "output"});
  if (root.integer("version", kConfigVersion) != kConfigVersion)
    Section::fail("version", "unsupported config version " + std::to_string(root.integer("version", 0)));

  SimConfig c;
  c.base_dir = std::move(base_dir);
  c.name = root.string("name", c.name);

  const Section ph = root.object("physics");
  ph.only({"length", "rho_f", "rho_s", "mu", "tension", "bending"});
  c.physics.length = detail::positive(ph, "length", 1.0);
  c.physics.rho_f = detail::positive(ph, "rho_f", 1.0);
  c.physics.rho_s = detail::positive(ph, "rho_s", 1.0);
  c.physics.mu = detail::positive(ph, "mu", 1.0);
  c.physics.tension = detail::non_negative(ph, "tension", 1.0);
  c.physics.bending = detail::positive(ph, "bending", 1.0);

  const Section di = root.object("discretization");
  di.only({"pairs", "n_x", "n_z", "oversampling", "beam_pairing", "interior_max_wavenumber", "interior_profiles"});
  c.disc.pairs = di.integer("pairs", c.disc.pairs);
  if (c.disc.pairs < 2) Section::fail(di.at("pairs"), "need at least 2 pairs");
  c.disc.n_x = di.integer("n_x", 0);
  c.disc.n_z = di.integer("n_z", 0);
  if (c.disc.n_x < 0 || c.disc.n_z < 0) Section::fail(di.path(), "n_x and n_z must be >= 0 (0 selects automatically)");
  c.disc.oversampling = detail::positive(di, "oversampling", 2.0);
  const std::string pairing = di.string("beam_pairing", "L2");
  if (pairing == "L2") c.disc.pairing = BeamPairing::L2;
  else if (pairing == "H2") c.disc.pairing = BeamPairing::H2;
  else Section::fail(di.at("beam_pairing"), "expected 'L2' or 'H2'");
  c.disc.interior_max_wavenumber = di.integer("interior_max_wavenumber", -1);
  c.disc.interior_profiles = di.integer("interior_profiles", -1);

  const Section tm = root.object("time");
  tm.only({"dt", "t_end", "picard_tol", "picard_max_iter", "h_floor", "dt_halving", "dt_min"});
  c.time.dt = detail::positive(tm, "dt", c.time.dt);
  c.time.t_end = detail::positive(tm, "t_end", c.time.t_end);
  c.time.picard_tol = detail::positive(tm, "picard_tol", c.time.picard_tol);
  c.time.picard_max_iter = tm.integer("picard_max_iter", c.time.picard_max_iter);
  if (c.time.picard_max_iter < 1) Section::fail(tm.at("picard_max_iter"), "must be >= 1");
  c.time.h_floor = detail::positive(tm, "h_floor", c.time.h_floor);
  c.time.dt_halving = tm.boolean("dt_halving", false);
  c.time.dt_min = detail::positive(tm, "dt_min", c.time.dt_min);

  const Section in = root.object("initial");
  in.only({"h0", "h1", "u0", "compatibility_tol"});
  if (in.has("h0")) c.h0 = in.raw("h0");
  if (in.has("h1")) c.h1 = in.raw("h1");
  if (in.has("u0")) c.u0 = in.raw("u0");
  detail::check_profile(c.h0, in.at("h0"));
  detail::check_profile(c.h1, in.at("h1"));
  detail::check_velocity(c.u0, in.at("u0"));
  c.compatibility_tol = detail::positive(in, "compatibility_tol", c.compatibility_tol);

  const Section out = root.object("output");
  out.only({"directory", "output_dt", "snapshots", "snapshot_nx", "snapshot_nz", "checkpoint"});
  c.output.directory = out.string("directory", c.output.directory);
  c.output.output_dt = detail::positive(out, "output_dt", c.output.output_dt);
  const double ratio = c.output.output_dt / c.time.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    Section::fail(out.at("output_dt"), "must be an integer multiple of time.dt");
  c.output.snapshots = out.boolean("snapshots", true);
  c.output.snapshot_nx = out.integer("snapshot_nx", c.output.snapshot_nx);
  c.output.snapshot_nz = out.integer("snapshot_nz", c.output.snapshot_nz);
  if (c.output.snapshot_nx < 1 || c.output.snapshot_nz < 2)
    Section::fail(out.path(), "snapshot grid needs snapshot_nx >= 1 and snapshot_nz >= 2");
  c.output.checkpoint = out.boolean("checkpoint", true);
  return c;
}

inline Json to_json(const SimConfig& c) {
  return Json{
      {"version", kConfigVersion},
      {"name", c.name},
      {"physics",
       {{"length", c.physics.length},
        {"rho_f", c.physics.rho_f},
        {"rho_s", c.physics.rho_s},
        {"mu", c.physics.mu},
        {"tension", c.physics.tension},
        {"bending", c.physics.bending}}},
      {"discretization",
       {{"pairs", c.disc.pairs},
        {"n_x", c.disc.n_x},
        {"n_z", c.disc.n_z},
        {"oversampling", c.disc.oversampling},
        {"beam_pairing", c.disc.pairing == BeamPairing::L2 ? "L2" : "H2"},
        {"interior_max_wavenumber", c.disc.interior_max_wavenumber},
        {"interior_profiles", c.disc.interior_profiles}}},
      {"time",
       {{"dt", c.time.dt},
        {"t_end", c.time.t_end},
        {"picard_tol", c.time.picard_tol},
        {"picard_max_iter", c.time.picard_max_iter},
        {"h_floor", c.time.h_floor},
        {"dt_halving", c.time.dt_halving},
        {"dt_min", c.time.dt_min}}},
      {"initial", {{"h0", c.h0}, {"h1", c.h1}, {"u0", c.u0}, {"compatibility_tol", c.compatibility_tol}}},
      {"output",
       {{"directory", c.output.directory},
        {"output_dt", c.output.output_dt},
        {"snapshots", c.output.snapshots},
        {"snapshot_nx", c.output.snapshot_nx},
        {"snapshot_nz", c.output.snapshot_nz},
        {"checkpoint", c.output.checkpoint}}},
  };
}

// FNV-1a over the fields that determine the trajectory; name, t_end and output
// settings are excluded so a run can be extended from its checkpoint.
inline std::uint64_t config_hash(const SimConfig& c) {
  Json j = to_json(c);
  j.erase("output");
  j.erase("name");
  j["time"].erase("t_end");
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
  }
}

inline SimConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
  Json doc = read_json_file(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc, path.parent_path());
}

// Trigonometric interpolant of equispaced samples f(i L / n), i = 0..n-1.
inline std::shared_ptr<FourierProfile> fourier_from_samples(double length, const std::vector<double>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 4) throw Error(ErrorKind::SchemaError, "sampled profile needs at least 4 samples");
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, samples);
  std::vector<FourierTerm> terms;
  for (int k = 1; 2 * k < n; ++k) terms.push_back({k, 2.0 * spec[k].real() / n, -2.0 * spec[k].imag() / n});
  return std::make_shared<FourierProfile>(length, spec[0].real() / n, std::move(terms));
}

inline std::shared_ptr<const Profile> make_profile(const Json& j, double length,
                                                   const std::filesystem::path& base_dir) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant")
    return std::make_shared<FourierProfile>(length, j.at("value").get<double>(), std::vector<FourierTerm>{});
  if (type == "fourier") {
    std::vector<FourierTerm> terms;
    for (const auto& t : j.value("terms", Json::array()))
      terms.push_back({t.at("wavenumber").get<int>(), t.value("cos", 0.0), t.value("sin", 0.0)});
    return std::make_shared<FourierProfile>(length, j.value("mean", 0.0), std::move(terms));
  }
  if (type == "exp_sine")
    return std::make_shared<ExpSineProfile>(length, j.value("mean", 0.0), j.at("amplitude").get<double>(),
                                            j.value("wavenumber", 1));
  // sampled
  const std::filesystem::path p = base_dir / j.at("path").get<std::string>();
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open sampled profile '" + p.string() + "'");
  std::vector<double> v;
  for (double x; in >> x;) v.push_back(x);
  if (!in.eof()) throw Error(ErrorKind::SchemaError, "non-numeric entry in '" + p.string() + "'");
  return fourier_from_samples(length, v);
}

inline InitialData make_initial_data(const SimConfig& c) {
  const double L = c.physics.length;
  InitialData d;
  d.h0 = make_profile(c.h0, L, c.base_dir);
  d.h1 = make_profile(c.h1, L, c.base_dir);
  if (c.u0.at("type") == "zero") {
    d.u0 = std::make_shared<ZeroVelocity>();
    return d;
  }
  const auto* h1 = dynamic_cast<const FourierProfile*>(d.h1.get());
  if (!h1) throw Error(ErrorKind::SchemaError, "initial.u0: lifted velocity needs a constant or fourier h1");
  std::vector<FluidMode> modes;
  std::vector<double> coefs;
  for (const auto& s : c.u0.value("stirring", Json::array())) {
    modes.push_back(stirring_mode(L, s.at("wavenumber").get<int>(),
                                  s.value("parity", "sin") == "sin" ? Parity::Sin : Parity::Cos));
    coefs.push_back(s.at("amplitude").get<double>());
  }
  d.u0 = lifted_velocity(L, d.h0, *h1, std::move(modes), std::move(coefs));
  return d;
}

}  // namespace fsi_beam
