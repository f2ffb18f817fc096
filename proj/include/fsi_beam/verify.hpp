#pragma once

#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "basis.hpp"
#include "geometry.hpp"
#include "oracle.hpp"
#include "quadrature.hpp"
#include "setup.hpp"
#include "spectral.hpp"

namespace fsi_beam::verify {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
  // value <= tolerance
  void at_most(std::string name, double value, double tolerance, std::string detail = {}) {
    checks.push_back({std::move(name), value, tolerance, value <= tolerance, std::move(detail)});
  }
  // value >= tolerance
  void at_least(std::string name, double value, double tolerance, std::string detail = {}) {
    checks.push_back({std::move(name), value, tolerance, value >= tolerance, std::move(detail)});
  }
};

inline SuiteResult timed(const std::string& name, const std::function<void(SuiteResult&)>& body) {
  SuiteResult r;
  r.suite = name;
  const auto t0 = std::chrono::steady_clock::now();
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Random smooth periodic height h(t, x) = mean + sum a_k(t) cos + b_k(t) sin
// with exact space/time derivatives.
struct ManufacturedHeight {
  double length = 1.0, mean = 1.0;
  std::vector<double> a, b, wa, wb;  // amplitudes and temporal frequencies

  // d^i/dx^i d^j/dt^j h at (t, x)
  double d(double t, double x, int ix, int it) const {
    double s = (ix == 0 && it == 0) ? mean : 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double kap = 2.0 * std::numbers::pi * (k + 1) / length;
      s += a[k] * std::pow(kap, ix) * std::pow(wa[k], it) * detail::trig_derivative(Parity::Cos, kap * x, ix) *
           detail::trig_derivative(Parity::Cos, wa[k] * t, it);
      s += b[k] * std::pow(kap, ix) * std::pow(wb[k], it) * detail::trig_derivative(Parity::Sin, kap * x, ix) *
           detail::trig_derivative(Parity::Cos, wb[k] * t, it);
    }
    return s;
  }
};

inline ManufacturedHeight random_height(std::mt19937_64& rng, double length, int modes) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), freq(0.5, 3.0);
  ManufacturedHeight h;
  h.length = length;
  h.mean = 1.0 + 0.5 * amp(rng);
  for (int k = 0; k < modes; ++k) {
    const double scale = 0.15 / (k + 1);
    h.a.push_back(scale * amp(rng));
    h.b.push_back(scale * amp(rng));
    h.wa.push_back(freq(rng));
    h.wb.push_back(freq(rng));
  }
  return h;
}

// Spectral divergence of a field sampled on a (Fourier x Gauss-Legendre) grid,
// values stored as f[i * nz + q].
inline Eigen::VectorXd spectral_divergence(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                                           const QuadratureGrid& g, const Eigen::MatrixXd& dz) {
  const int nx = g.nx(), nz = g.nz();
  Eigen::VectorXd div(nx * nz);
  for (int q = 0; q < nz; ++q) {
    Eigen::VectorXd row(nx);
    for (int i = 0; i < nx; ++i) row[i] = f1[g.index(i, q)];
    const Eigen::VectorXd dx = fourier_derivative(row, g.length);
    for (int i = 0; i < nx; ++i) div[g.index(i, q)] = dx[i];
  }
  for (int i = 0; i < nx; ++i) div.segment(i * nz, nz) += dz * f2.segment(i * nz, nz);
  return div;
}

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline double max_ratio(const Eigen::MatrixXd& diff, double scale) {
  return diff.cwiseAbs().maxCoeff() / std::max(scale, std::numeric_limits<double>::min());
}

// Closed-form transformation identities at random samples, plus the spectral
// identity dt h = div(B^T dt chi) on random manufactured geometries.
inline SuiteResult geometry_suite(int samples = 10000, unsigned seed = 1) {
  return timed("geometry", [&](SuiteResult& r) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uh(0.2, 3.0), uhx(-2.0, 2.0), uz(0.0, 1.0), ut(-2.0, 2.0);
    double det = 0, a = 0, inv = 0, skew = 0;
    for (int n = 0; n < samples; ++n) {
      GeometrySample s{uh(rng), uhx(rng), uhx(rng), ut(rng), ut(rng), uz(rng)};
      const TransformMatrices m = transform_matrices(s);
      det = std::max(det, std::abs(m.B.determinant() - s.h) / (eps * m.B.cwiseAbs().maxCoeff() *
                                                                m.B.cwiseAbs().maxCoeff()));
      const Mat2 btb = m.B.transpose() * m.B / s.h;
      a = std::max(a, max_ratio(m.A - btb, eps * std::max(m.A.cwiseAbs().maxCoeff(), btb.cwiseAbs().maxCoeff())));
      const Mat2 id = m.B * m.B_invT.transpose();
      inv = std::max(inv, max_ratio(id - Mat2::Identity(),
                                    eps * m.B.cwiseAbs().maxCoeff() * m.B_invT.cwiseAbs().maxCoeff()));
      const Mat2 lhs = m.B_invT * m.dtB.transpose(), rhs = -m.dtB_invT * m.B.transpose();
      skew = std::max(skew, max_ratio(lhs - rhs, eps * std::max(m.B_invT.cwiseAbs().maxCoeff() *
                                                                      m.dtB.cwiseAbs().maxCoeff(),
                                                                  m.dtB_invT.cwiseAbs().maxCoeff() *
                                                                      m.B.cwiseAbs().maxCoeff())));
    }
    const std::string per = "max error in machine epsilons over " + std::to_string(samples) + " samples";
    r.at_most("det B = h", det, 8.0, per);
    r.at_most("A = B^T B / h", a, 8.0, per);
    r.at_most("B (B^{-T})^T = I", inv, 8.0, per);
    r.at_most("B^{-T} dt B^T = -dt B^{-T} B^T", skew, 8.0, per);

    const QuadratureGrid g = build_quadrature(1.0, 64, 32);
    const Eigen::MatrixXd dz = differentiation_matrix(g.z);
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
      const ManufacturedHeight mh = random_height(rng, g.length, 4);
      const double t = ut(rng);
      Eigen::VectorXd w1(g.nodes()), w2(g.nodes()), ht(g.nodes());
      for (int i = 0; i < g.nx(); ++i)
        for (int q = 0; q < g.nz(); ++q) {
          const double x = g.x[i], z = g.z[q];
          const GeometrySample s{mh.d(t, x, 0, 0), mh.d(t, x, 1, 0), mh.d(t, x, 2, 0), mh.d(t, x, 0, 1),
                                 mh.d(t, x, 1, 1), z};
          const TransformMatrices m = transform_matrices(s);
          const Vec2 w = m.B.transpose() * m.chi_dt;
          w1[g.index(i, q)] = w[0];
          w2[g.index(i, q)] = w[1];
          ht[g.index(i, q)] = s.dt_h;
        }
      const Eigen::VectorXd div = spectral_divergence(w1, w2, g, dz);
      worst = std::max(worst, (div - ht).cwiseAbs().maxCoeff() / ht.cwiseAbs().maxCoeff());
    }
    r.at_most("dt h = div(B^T dt chi)", worst, 1e-8, "max relative residual, 20 geometries, 64x32 grid");
  });
}

// div(dt B^T (dt u + G)) = div(B^T phi) on manufactured field/geometry pairs.
inline SuiteResult correction_suite(int pairs = 20, unsigned seed = 2) {
  return timed("correction", [&](SuiteResult& r) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const QuadratureGrid g = build_quadrature(1.0, 64, 32);
    const Eigen::MatrixXd dz = differentiation_matrix(g.z);
    double worst = 0.0, top = 0.0;
    for (int n = 0; n < pairs; ++n) {
      const ManufacturedHeight mh = random_height(rng, g.length, 3);
      const double t = u(rng);
      // u1 = z^2 (1-z)^2 P(z) T(x), dt u1 = z^2 (1-z) Q(z) S(x); only the first
      // component enters either side of the identity
      const double p0 = u(rng), p1 = u(rng), q0 = u(rng), q1 = u(rng), c1 = u(rng), s1 = u(rng), c2 = u(rng),
                   s2 = u(rng);
      Eigen::VectorXd l1(g.nodes()), l2(g.nodes()), r1(g.nodes()), r2(g.nodes());
      for (int i = 0; i < g.nx(); ++i)
        for (int q = 0; q < g.nz(); ++q) {
          const double x = g.x[i], z = g.z[q], kx = 2.0 * std::numbers::pi * x;
          const double u1 = z * z * (1 - z) * (1 - z) * (p0 + p1 * z) * (c1 * std::cos(kx) + s1 * std::sin(kx));
          const double du1 = z * z * (1 - z) * (q0 + q1 * z) * (c2 * std::cos(2 * kx) + s2 * std::sin(kx));
          const GeometrySample s{mh.d(t, x, 0, 0), mh.d(t, x, 1, 0), mh.d(t, x, 2, 0), mh.d(t, x, 0, 1),
                                 mh.d(t, x, 1, 1), z};
          const TransformMatrices m = transform_matrices(s);
          const Vec2 uu{u1, 0.3 * u1}, du{du1, -du1};
          const Vec2 lhs = m.dtB.transpose() * (du + correction_field(uu, s));
          const Vec2 rhs = m.B.transpose() * pressure_test_field(uu, du, s);
          const int p = g.index(i, q);
          l1[p] = lhs[0];
          l2[p] = lhs[1];
          r1[p] = rhs[0];
          r2[p] = rhs[1];
          if (q == g.nz() - 1) {
            const GeometrySample st{s.h, s.dx_h, s.dxx_h, s.dt_h, s.dtdx_h, 1.0};
            top = std::max(top, pressure_test_field({0.0, 0.3}, {0.0, -1.0}, st).cwiseAbs().maxCoeff());
          }
        }
      const Eigen::VectorXd dl = spectral_divergence(l1, l2, g, dz), dr = spectral_divergence(r1, r2, g, dz);
      worst = std::max(worst, (dl - dr).cwiseAbs().maxCoeff() / std::max(dl.cwiseAbs().maxCoeff(), 1e-300));
    }
    r.at_most("div(dt B^T (dt u + G)) = div(B^T phi)", worst, 1e-8,
              "max relative residual over " + std::to_string(pairs) + " pairs, 64x32 grid");
    r.at_most("phi = 0 where u1 = dt u1 = 0", top, 0.0);
  });
}

// Traces, solenoidality and Gram structure of the basis, with Grams computed
// on a grid twice as fine as the automatic one.
inline SuiteResult basis_suite(const std::vector<int>& sizes = {4, 16, 32, 64}, double length = 1.0) {
  return timed("basis", [&](SuiteResult& r) {
    double trace = 0, sol = 0, beam = 0, interior = 0, cross = 0;
    for (int n : sizes) {
      const BasisSet b = build_basis_set(length, n);
      const Resolution res = auto_resolution(b, 4.0);
      const BasisTables t = tabulate(b, build_quadrature(length, res.n_x, res.n_z));
      for (int j = 0; j < n; ++j) {
        const bool lifted = BasisSet::is_lifted(j);
        for (int i = 0; i < t.grid.nx(); ++i) {
          trace = std::max({trace, std::abs(t.bottom1(i, j)), std::abs(t.bottom2(i, j)), std::abs(t.top1(i, j)),
                            std::abs(t.top2(i, j) - (lifted ? t.beam(i, j) : 0.0))});
          if (!lifted) trace = std::max(trace, std::abs(t.beam(i, j)));
        }
        sol = std::max(sol, (t.psi1_x.col(j) + t.psi2_z.col(j)).cwiseAbs().maxCoeff() /
                                std::max(1.0, t.psi1_x.col(j).cwiseAbs().maxCoeff()));
      }
      const Eigen::MatrixXd gb = detail::weighted_gram(t.beam_modes, t.grid.wx, t.beam_modes);
      beam = std::max(beam, (gb - Eigen::MatrixXd::Identity(gb.rows(), gb.cols())).cwiseAbs().maxCoeff());
      const Eigen::MatrixXd gv = gram_v1(t);
      for (int j = 1; j < n; j += 2) {
        for (int k = 1; k < n; k += 2) interior = std::max(interior, std::abs(gv(j, k) - (j == k ? 1.0 : 0.0)));
        for (int k = 0; k < n; k += 2) cross = std::max(cross, std::abs(gv(j, k)));
      }
    }
    std::string sz;
    for (int n : sizes) sz += (sz.empty() ? "" : ",") + std::to_string(n);
    const std::string d = "N in {" + sz + "}";
    r.at_most("boundary traces", trace, 1e-10, d);
    r.at_most("solenoidality", sol, 1e-10, d);
    r.at_most("beam L2 orthonormality", beam, 1e-10, d);
    r.at_most("interior V1 orthonormality", interior, 1e-10, d);
    r.at_most("lifted-interior V1 Gram", cross, 1e-10, d);
  });
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
}

inline double relative_error(const Tensor3& a, const Tensor3& ref) {
  double err = 0.0, scale = 1e-300;
  for (std::size_t l = 0; l < ref.size(); ++l) {
    err = std::max(err, (a[l] - ref[l]).cwiseAbs().maxCoeff());
    scale = std::max(scale, ref[l].cwiseAbs().maxCoeff());
  }
  return err / scale;
}

// Production assembly against the direct per-entry quadrature oracle on a
// random moving geometry.
inline SuiteResult assembly_suite(const std::vector<int>& sizes = {2, 4, 6}, unsigned seed = 3) {
  return timed("assembly", [&](SuiteResult& r) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Physics p{1.0, 1.3, 2.0, 0.7, 1.1, 0.05};
    double worst[9] = {};
    const char* names[9] = {"M", "S", "F_geo", "A", "B", "C", "C3", "D", "E"};
    for (int n : sizes) {
      const BasisSet b = build_basis_set(p.length, n);
      const Resolution res = auto_resolution(b);
      const QuadratureGrid grid = build_quadrature(p.length, res.n_x, res.n_z);
      const BasisTables t = tabulate(b, grid);
      GeometryState g;
      g.mean = 1.0 + 0.3 * u(rng);
      const int nb = b.beam_size();
      g.coeffs.resize(nb);
      g.rate.resize(nb);
      g.accel.resize(nb);
      for (int k = 0; k < nb; ++k) {
        g.coeffs[k] = 0.05 * u(rng);
        g.rate[k] = 0.3 * u(rng);
        g.accel[k] = 0.5 * u(rng);
      }
      AssemblyOptions opt;
      opt.differentiated = true;
      const GalerkinOperators ops = assemble_first_order(t, g, p, opt);
      const oracle::Operators o = oracle::evaluate(b, grid, g, p);
      const double errs[9] = {relative_error(ops.M, o.M),      relative_error(ops.S, o.S),
                              relative_error(ops.F_geo, o.F_geo), relative_error(ops.T2->A, o.A),
                              relative_error(ops.T2->B, o.B),  relative_error(ops.T2->C, o.C),
                              relative_error(ops.C3, o.C3),    relative_error(ops.T2->D, o.D),
                              relative_error(ops.T2->E, o.E)};
      for (int k = 0; k < 9; ++k) worst[k] = std::max(worst[k], errs[k]);
    }
    for (int k = 0; k < 9; ++k) r.at_most(names[k], worst[k], 1e-10, "max-entry relative error vs oracle");
  });
}

// The bundled sine-perturbation case (also shipped as configs/sine.json).
inline SimConfig sine_config() {
  SimConfig c;
  c.name = "sine";
  c.physics = Physics{1.0, 1.0, 10.0, 0.1, 10.0, 0.01};
  c.disc.pairs = 16;
  c.time.dt = 1e-3;
  c.time.t_end = 0.5;
  c.h0 = Json{{"type", "fourier"}, {"mean", 1.0}, {"terms", Json::array({{{"wavenumber", 1}, {"cos", 0.1}}})}};
  c.h1 = Json{{"type", "constant"}, {"value", 0.0}};
  c.u0 = Json{{"type", "zero"}};
  c.output.output_dt = 0.01;
  return c;
}

struct EnergyStudy {
  std::vector<double> dts, residuals;  // max_t |balance residual| per dt
  double order = 0.0;                  // least-squares slope in log-log
  bool completed = true;
};

inline double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    const double x = std::log(h[k]), y = std::log(e[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline EnergyStudy energy_study(const SimConfig& base, const std::vector<double>& dts) {
  EnergyStudy s;
  for (double dt : dts) {
    SimConfig c = base;
    c.time.dt = dt;
    const Model m = build_model(c);
    RunSettings rs{dt, c.time.t_end, false};
    double worst = 0.0;
    const RunOutcome out = run(*m.integrator, m.start, m.start_ledger(), rs,
                               [&](const StateVector&, const StepReport*, const EnergyLedger& l) {
                                 worst = std::max(worst, std::abs(l.balance_residual));
                               });
    s.completed = s.completed && out.status == RunOutcome::Status::Completed;
    s.dts.push_back(dt);
    s.residuals.push_back(worst);
  }
  s.order = fitted_order(s.dts, s.residuals);
  return s;
}

inline SuiteResult energy_suite(const SimConfig& c = sine_config()) {
  return timed("energy", [&](SuiteResult& r) {
    const EnergyStudy s = energy_study(c, {4e-3, 2e-3, 1e-3});
    r.at_least("runs completed", s.completed ? 1.0 : 0.0, 1.0);
    r.at_most("balance residual at dt=1e-3", s.residuals.back(), 1e-6, "max over the run");
    r.at_least("observed order", s.order, 2.0,
               "residuals " + sci(s.residuals[0]) + ", " + sci(s.residuals[1]) + ", " + sci(s.residuals[2]));
  });
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"geometry", "basis", "assembly", "correction", "energy"};
  return names;
}

inline SuiteResult run_suite(const std::string& name) {
  if (name == "geometry") return geometry_suite();
  if (name == "basis") return basis_suite();
  if (name == "assembly") return assembly_suite();
  if (name == "correction") return correction_suite();
  if (name == "energy") return energy_suite();
  throw Error(ErrorKind::SchemaError, "unknown verify suite '" + name + "'");
}

}  // namespace fsi_beam::verify
