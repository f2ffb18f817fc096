#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"

namespace fsi_beam {

enum class Parity { Sin, Cos };

inline const char* to_string(Parity p) { return p == Parity::Sin ? "sin" : "cos"; }

namespace detail {
// n-th derivative of sin(theta) or cos(theta) without shifting the argument.
inline double trig_derivative(Parity p, double theta, int n) {
  const double s = std::sin(theta), c = std::cos(theta);
  const int k = (n + (p == Parity::Cos ? 1 : 0)) % 4;
  switch (k) {
    case 0: return s;
    case 1: return c;
    case 2: return -s;
    default: return -c;
  }
}

// P_n, P_n', P_n'' at t in [-1,1] for n = 0..count-1.
inline void legendre_table(int count, double t, std::vector<double>& p, std::vector<double>& dp,
                           std::vector<double>& ddp) {
  p.assign(count, 0.0);
  dp.assign(count, 0.0);
  ddp.assign(count, 0.0);
  if (count == 0) return;
  p[0] = 1.0;
  if (count == 1) return;
  p[1] = t;
  dp[1] = 1.0;
  for (int n = 1; n + 1 < count; ++n) {
    p[n + 1] = ((2 * n + 1) * t * p[n] - n * p[n - 1]) / (n + 1);
    dp[n + 1] = dp[n - 1] + (2 * n + 1) * p[n];
    ddp[n + 1] = ddp[n - 1] + (2 * n + 1) * dp[n];
  }
}
}  // namespace detail

// psi(x) = amplitude * sin|cos(kappa x), kappa = 2 pi m / L.
struct BeamMode {
  int index = 1;  // 1-based position in the beam basis
  int wavenumber = 1;
  double kappa = 0.0;
  Parity parity = Parity::Sin;
  double amplitude = 0.0;

  double derivative(double x, int order) const {
    return amplitude * std::pow(kappa, order) * detail::trig_derivative(parity, kappa * x, order);
  }
  double value(double x) const { return derivative(x, 0); }
};

inline std::vector<BeamMode> build_beam_basis(double length, int count) {
  if (!(length > 0.0) || count < 1) throw Error(ErrorKind::NonPositiveInput, "beam basis needs L > 0, K >= 1");
  std::vector<BeamMode> modes;
  for (int k = 1; k <= count; ++k) {
    BeamMode m;
    m.index = k;
    m.wavenumber = (k + 1) / 2;
    m.kappa = 2.0 * std::numbers::pi * m.wavenumber / length;
    m.parity = k % 2 == 1 ? Parity::Sin : Parity::Cos;
    m.amplitude = std::sqrt(2.0 / length);
    modes.push_back(m);
  }
  return modes;
}

struct ProfileValue {
  double s = 0.0, ds = 0.0, dds = 0.0;
};

// Vertical factor f(z) of a streamfunction s = X(x) f(z).
//   Clamped: f = z^2 (1-z)^2 sum_n c_n P_n(2z-1)
//   Shear:   x-independent flow, f' = z (1-z) sum_n c_n P_n(2z-1); f itself is
//            never needed because X' = 0, and is reported as 0.
//   Lifted:  f = sum of c_i e_i with e = {e^{k(z-1)}, e^{-kz}, z e^{k(z-1)}, z e^{-kz}}
struct VerticalProfile {
  enum class Kind { Clamped, Shear, Lifted };
  Kind kind = Kind::Clamped;
  Eigen::VectorXd coeffs;
  double kappa = 0.0;

  // Polynomial degree of the velocity components (0 for the exponential family).
  int degree() const {
    const int n = static_cast<int>(coeffs.size()) - 1;
    switch (kind) {
      case Kind::Clamped: return n + 4;
      case Kind::Shear: return n + 2;
      default: return 0;
    }
  }

  ProfileValue eval(double z) const {
    ProfileValue v;
    if (kind == Kind::Lifted) {
      const double k = kappa;
      const double a = std::exp(k * (z - 1.0)), b = std::exp(-k * z);
      const double c0 = coeffs[0], c1 = coeffs[1], c2 = coeffs[2], c3 = coeffs[3];
      v.s = c0 * a + c1 * b + c2 * z * a + c3 * z * b;
      v.ds = c0 * k * a - c1 * k * b + c2 * (1.0 + k * z) * a + c3 * (1.0 - k * z) * b;
      v.dds = c0 * k * k * a + c1 * k * k * b + c2 * (2.0 * k + k * k * z) * a + c3 * (-2.0 * k + k * k * z) * b;
      return v;
    }
    thread_local std::vector<double> p, dp, ddp;
    const int count = static_cast<int>(coeffs.size());
    detail::legendre_table(count, 2.0 * z - 1.0, p, dp, ddp);
    double q = 0.0, dq = 0.0, ddq = 0.0;
    for (int n = 0; n < count; ++n) {
      q += coeffs[n] * p[n];
      dq += coeffs[n] * 2.0 * dp[n];
      ddq += coeffs[n] * 4.0 * ddp[n];
    }
    if (kind == Kind::Clamped) {
      const double w = z * z - 2.0 * z * z * z + z * z * z * z;
      const double dw = 2.0 * z - 6.0 * z * z + 4.0 * z * z * z;
      const double ddw = 2.0 - 12.0 * z + 12.0 * z * z;
      v.s = w * q;
      v.ds = dw * q + w * dq;
      v.dds = ddw * q + 2.0 * dw * dq + w * ddq;
    } else {
      const double w = z - z * z, dw = 1.0 - 2.0 * z;
      v.ds = w * q;
      v.dds = dw * q + w * dq;
    }
    return v;
  }
};

enum class ModeKind { Interior, Lifted };

// Velocity value and gradient; grad(c, 0) = d/dx of component c, grad(c, 1) = d/dz.
struct ModeValue {
  Eigen::Vector2d value;
  Eigen::Matrix2d grad;
};

// Solenoidal mode Psi = (X f', -X' f) from s = X(x) f(z), X = coef * sin|cos(kappa x).
struct FluidMode {
  ModeKind kind = ModeKind::Interior;
  int wavenumber = 0;
  double kappa = 0.0;
  Parity parity = Parity::Sin;  // trig factor of X
  double x_coef = 1.0;
  VerticalProfile profile;
  int beam_index = -1;   // 0-based beam mode carried at z = 1 (lifted only)
  int block_rank = 0;    // position inside its (wavenumber, parity) block
  double rayleigh = 0.0; // |Psi|_{V1}^2 / |Psi|_{L2}^2

  double x_factor(double x, int order) const {
    if (wavenumber == 0) return order == 0 ? x_coef : 0.0;
    return x_coef * std::pow(kappa, order) * detail::trig_derivative(parity, kappa * x, order);
  }

  ModeValue eval(double x, double z) const { return combine(x, profile.eval(z)); }

  ModeValue combine(double x, const ProfileValue& f) const {
    const double X = x_factor(x, 0), X1 = x_factor(x, 1), X2 = x_factor(x, 2);
    ModeValue m;
    m.value << X * f.ds, -X1 * f.s;
    m.grad << X1 * f.ds, X * f.dds, -X2 * f.s, -X1 * f.ds;
    return m;
  }
};

namespace detail {
// Lifted vertical profile: (D^2 - k^2)^2 f = 0, f(0) = f'(0) = 0, f(1) = 1, f'(1) = 0.
inline VerticalProfile lifted_profile(double k) {
  const double e = std::exp(-k);
  Eigen::Matrix4d sys;
  sys << e, 1.0, 0.0, 0.0,
         k * e, -k, e, 1.0,
         1.0, e, 1.0, e,
         k, -k * e, 1.0 + k, e * (1.0 - k);
  const Eigen::Vector4d rhs(0.0, 0.0, 1.0, 0.0);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(sys);
  const auto& sv = svd.singularValues();
  if (!(sv[3] > 1e-14 * sv[0]))
    throw Error(ErrorKind::SingularLift, "boundary system singular for kappa=" + std::to_string(k));
  VerticalProfile p;
  p.kind = VerticalProfile::Kind::Lifted;
  p.kappa = k;
  p.coeffs = sys.fullPivLu().solve(rhs);
  return p;
}
}  // namespace detail

inline FluidMode build_lifted_mode(const BeamMode& beam) {
  if (!(beam.kappa > 0.0)) throw Error(ErrorKind::SingularLift, "lifted mode needs nonzero wavenumber");
  FluidMode m;
  m.kind = ModeKind::Lifted;
  m.wavenumber = beam.wavenumber;
  m.kappa = beam.kappa;
  m.beam_index = beam.index - 1;
  // -X' must equal psi: sin-beam -> X = (a/k) cos, cos-beam -> X = -(a/k) sin
  m.parity = beam.parity == Parity::Sin ? Parity::Cos : Parity::Sin;
  m.x_coef = (beam.parity == Parity::Sin ? 1.0 : -1.0) * beam.amplitude / beam.kappa;
  m.profile = detail::lifted_profile(beam.kappa);
  return m;
}

namespace detail {
// One (wavenumber, parity) block of interior modes, V1-orthonormalized.
inline std::vector<FluidMode> interior_block(double length, int wavenumber, Parity parity, int profiles) {
  const double k = 2.0 * std::numbers::pi * wavenumber / length;
  const bool shear = wavenumber == 0;
  const auto kind = shear ? VerticalProfile::Kind::Shear : VerticalProfile::Kind::Clamped;
  const auto rule = gauss_legendre(profiles + 8);

  // Raw profile values at the 1D nodes.
  const int nq = static_cast<int>(rule.nodes.size());
  Eigen::MatrixXd f(nq, profiles), df(nq, profiles), ddf(nq, profiles);
  for (int n = 0; n < profiles; ++n) {
    VerticalProfile raw{kind, Eigen::VectorXd::Unit(profiles, n), k};
    for (int q = 0; q < nq; ++q) {
      const auto v = raw.eval(rule.nodes[q]);
      f(q, n) = v.s;
      df(q, n) = v.ds;
      ddf(q, n) = v.dds;
    }
  }
  const auto W = rule.weights.asDiagonal();
  Eigen::MatrixXd gram_v1, gram_l2;
  if (shear) {
    gram_v1 = length * ddf.transpose() * W * ddf;
    gram_l2 = length * df.transpose() * W * df;
  } else {
    const double half = 0.5 * length;
    gram_v1 = half * (ddf.transpose() * W * ddf + 2.0 * k * k * df.transpose() * W * df +
                      k * k * k * k * f.transpose() * W * f);
    gram_l2 = half * (df.transpose() * W * df + k * k * f.transpose() * W * f);
  }

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(profiles, profiles);
  std::vector<FluidMode> modes;
  for (int n = 0; n < profiles; ++n) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(profiles, n);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < n; ++i) v -= basis.col(i).dot(gram_v1 * v) * basis.col(i);
    const double norm = std::sqrt(std::max(0.0, v.dot(gram_v1 * v)));
    if (!(norm > 1e-12 * std::sqrt(gram_v1(n, n))))
      throw Error(ErrorKind::RankDeficiency, "interior block m=" + std::to_string(wavenumber) +
                                                 " profile " + std::to_string(n) + " is degenerate");
    basis.col(n) = v / norm;

    FluidMode m;
    m.kind = ModeKind::Interior;
    m.wavenumber = wavenumber;
    m.kappa = k;
    m.parity = parity;
    m.profile = VerticalProfile{kind, basis.col(n), k};
    m.block_rank = n;
    m.rayleigh = 1.0 / basis.col(n).dot(gram_l2 * basis.col(n));
    modes.push_back(m);
  }
  return modes;
}
}  // namespace detail

// All interior modes for wavenumbers 0..max_wavenumber with the given number
// of vertical profiles, block by block (m = 0 first, then sin/cos pairs).
inline std::vector<FluidMode> build_interior_basis(double length, int max_wavenumber, int profiles) {
  if (max_wavenumber < 0 || profiles < 1)
    throw Error(ErrorKind::NonPositiveInput, "interior basis needs M >= 0 and N_z >= 1");
  std::vector<FluidMode> all = detail::interior_block(length, 0, Parity::Cos, profiles);
  for (int m = 1; m <= max_wavenumber; ++m)
    for (Parity p : {Parity::Sin, Parity::Cos}) {
      auto block = detail::interior_block(length, m, p, profiles);
      all.insert(all.end(), block.begin(), block.end());
    }
  return all;
}

// Picks `count` modes by increasing Rayleigh quotient while keeping each
// block's selection a prefix of that block.
inline std::vector<FluidMode> select_interior(const std::vector<FluidMode>& pool, int count) {
  std::vector<std::vector<const FluidMode*>> blocks;
  for (const auto& m : pool) {
    if (m.block_rank == 0) blocks.emplace_back();
    blocks.back().push_back(&m);
  }
  std::vector<std::size_t> next(blocks.size(), 0);
  std::vector<FluidMode> out;
  while (static_cast<int>(out.size()) < count) {
    int best = -1;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (next[b] >= blocks[b].size()) continue;
      if (best < 0) {
        best = static_cast<int>(b);
        continue;
      }
      const double lb = blocks[b][next[b]]->rayleigh, lbest = blocks[best][next[best]]->rayleigh;
      // sin/cos twins are equal up to roundoff; keep block order there
      if (lb < lbest * (1.0 - 1e-9)) best = static_cast<int>(b);
    }
    if (best < 0)
      throw Error(ErrorKind::InvalidResolution, "interior pool too small for " + std::to_string(count) + " modes");
    out.push_back(*blocks[best][next[best]++]);
  }
  return out;
}

struct BasisOptions {
  int interior_max_wavenumber = -1;  // < 0: automatic
  int interior_profiles = -1;        // < 0: automatic
};

// Coupled pairs (Psi_j, psi_j). Even 0-based j: lifted mode over beam mode
// j/2; odd j: interior mode with psi_j = 0.
struct BasisSet {
  double length = 1.0;
  std::vector<BeamMode> beam;
  std::vector<FluidMode> fluid;
  Eigen::MatrixXd gram_l2, gram_v1;

  int size() const { return static_cast<int>(fluid.size()); }
  int beam_size() const { return static_cast<int>(beam.size()); }
  static bool is_lifted(int j) { return j % 2 == 0; }
  static int beam_slot(int j) { return j / 2; }
  static int global_of_beam(int b) { return 2 * b; }

  int max_wavenumber() const {
    int m = 0;
    for (const auto& f : fluid) m = std::max(m, f.wavenumber);
    return m;
  }
  int max_z_degree() const {
    int d = 0;
    for (const auto& f : fluid) d = std::max(d, f.profile.degree());
    return d;
  }
  double max_lifted_kappa() const {
    double k = 0.0;
    for (const auto& f : fluid)
      if (f.kind == ModeKind::Lifted) k = std::max(k, f.kappa);
    return k;
  }
};

struct Resolution {
  int n_x = 0, n_z = 0;
};

inline Resolution auto_resolution(const BasisSet& basis, double oversampling = 2.0, int n_x_min = 0,
                                   int n_z_min = 0) {
  Resolution r;
  const int m = std::max(1, basis.max_wavenumber());
  r.n_x = static_cast<int>(std::ceil(oversampling * 4 * m));
  r.n_x = std::max({r.n_x + r.n_x % 2, 16, n_x_min + n_x_min % 2});
  const int poly = 2 * basis.max_z_degree() + 2;
  const int expo = static_cast<int>(std::ceil(0.5 * oversampling * (0.5 * basis.max_lifted_kappa() + 12.0)));
  r.n_z = std::max({poly, expo, 12, n_z_min});
  return r;
}

// Mode values at every node of a grid; matrices are (nodes x N) for fluid
// quantities and (n_x x N) for beam quantities (zero columns on interior pairs).
struct BasisTables {
  QuadratureGrid grid;
  Eigen::MatrixXd psi1, psi2, psi1_x, psi1_z, psi2_x, psi2_z;
  Eigen::MatrixXd beam, beam_x, beam_xx;
  Eigen::MatrixXd beam_modes, beam_modes_x, beam_modes_xx;  // (n_x x beam count), beam-index order
  Eigen::MatrixXd top1, top2, bottom1, bottom2;  // traces at z = 1 and z = 0, (n_x x N)
};

inline BasisTables tabulate(const BasisSet& basis, const QuadratureGrid& grid) {
  const int n = basis.size(), nodes = grid.nodes(), nx = grid.nx(), nz = grid.nz();
  BasisTables t;
  t.grid = grid;
  for (auto* m : {&t.psi1, &t.psi2, &t.psi1_x, &t.psi1_z, &t.psi2_x, &t.psi2_z}) m->setZero(nodes, n);
  for (auto* m : {&t.beam, &t.beam_x, &t.beam_xx, &t.top1, &t.top2, &t.bottom1, &t.bottom2}) m->setZero(nx, n);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    const FluidMode& mode = basis.fluid[j];
    std::vector<ProfileValue> prof(nz);
    for (int q = 0; q < nz; ++q) prof[q] = mode.profile.eval(grid.z[q]);
    const ProfileValue top = mode.profile.eval(1.0), bottom = mode.profile.eval(0.0);
    for (int i = 0; i < nx; ++i) {
      for (int q = 0; q < nz; ++q) {
        const ModeValue v = mode.combine(grid.x[i], prof[q]);
        const int p = grid.index(i, q);
        t.psi1(p, j) = v.value[0];
        t.psi2(p, j) = v.value[1];
        t.psi1_x(p, j) = v.grad(0, 0);
        t.psi1_z(p, j) = v.grad(0, 1);
        t.psi2_x(p, j) = v.grad(1, 0);
        t.psi2_z(p, j) = v.grad(1, 1);
      }
      const ModeValue vt = mode.combine(grid.x[i], top), vb = mode.combine(grid.x[i], bottom);
      t.top1(i, j) = vt.value[0];
      t.top2(i, j) = vt.value[1];
      t.bottom1(i, j) = vb.value[0];
      t.bottom2(i, j) = vb.value[1];
    }
    if (BasisSet::is_lifted(j)) {
      const BeamMode& b = basis.beam[BasisSet::beam_slot(j)];
      for (int i = 0; i < nx; ++i) {
        t.beam(i, j) = b.derivative(grid.x[i], 0);
        t.beam_x(i, j) = b.derivative(grid.x[i], 1);
        t.beam_xx(i, j) = b.derivative(grid.x[i], 2);
      }
    }
  });
  const int nb = basis.beam_size();
  t.beam_modes.resize(nx, nb);
  t.beam_modes_x.resize(nx, nb);
  t.beam_modes_xx.resize(nx, nb);
  for (int b = 0; b < nb; ++b) {
    t.beam_modes.col(b) = t.beam.col(BasisSet::global_of_beam(b));
    t.beam_modes_x.col(b) = t.beam_x.col(BasisSet::global_of_beam(b));
    t.beam_modes_xx.col(b) = t.beam_xx.col(BasisSet::global_of_beam(b));
  }
  return t;
}

namespace detail {
inline Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd& b) {
  return a.transpose() * (b.array().colwise() * w.array()).matrix();
}
}  // namespace detail

inline Eigen::MatrixXd gram_l2(const BasisTables& t) {
  const auto& w = t.grid.weight;
  return detail::weighted_gram(t.psi1, w, t.psi1) + detail::weighted_gram(t.psi2, w, t.psi2);
}

inline Eigen::MatrixXd gram_v1(const BasisTables& t) {
  const auto& w = t.grid.weight;
  return detail::weighted_gram(t.psi1_x, w, t.psi1_x) + detail::weighted_gram(t.psi1_z, w, t.psi1_z) +
         detail::weighted_gram(t.psi2_x, w, t.psi2_x) + detail::weighted_gram(t.psi2_z, w, t.psi2_z);
}

inline BasisSet build_basis_set(double length, int pairs, const BasisOptions& opt = {}) {
  if (pairs < 2) throw Error(ErrorKind::NonPositiveInput, "need at least 2 basis pairs");
  BasisSet set;
  set.length = length;
  const int n_beam = (pairs + 1) / 2, n_interior = pairs / 2;
  set.beam = build_beam_basis(length, n_beam);

  std::vector<FluidMode> interior;
  if (n_interior > 0) {
    const int m_pool = opt.interior_max_wavenumber >= 0 ? opt.interior_max_wavenumber
                                                        : std::max(1, set.beam.back().wavenumber);
    const int z_pool = opt.interior_profiles > 0 ? opt.interior_profiles
                                                 : std::clamp(n_interior, 4, 16);
    interior = select_interior(build_interior_basis(length, m_pool, z_pool), n_interior);
  }
  for (int j = 0; j < pairs; ++j) {
    if (BasisSet::is_lifted(j))
      set.fluid.push_back(build_lifted_mode(set.beam[BasisSet::beam_slot(j)]));
    else
      set.fluid.push_back(interior[j / 2]);
  }

  const Resolution r = auto_resolution(set);
  const BasisTables t = tabulate(set, build_quadrature(length, r.n_x, r.n_z));
  set.gram_l2 = gram_l2(t);
  set.gram_v1 = gram_v1(t);
  return set;
}

enum class BeamPairing { L2, H2 };

struct BeamProjection {
  double mean = 0.0;
  Eigen::VectorXd coeffs;  // beam-index order
};

// Projection of equispaced periodic samples of a height profile.
inline BeamProjection project_initial_beam(const Eigen::VectorXd& samples, const BasisSet& basis,
                                           BeamPairing pairing = BeamPairing::L2) {
  const int n = static_cast<int>(samples.size());
  const double L = basis.length, dx = L / n;
  BeamProjection out;
  out.mean = samples.mean();
  out.coeffs.setZero(basis.beam_size());
  Eigen::VectorXd curvature;
  if (pairing == BeamPairing::H2) curvature = fourier_derivative(samples, L, 2);
  for (int b = 0; b < basis.beam_size(); ++b) {
    const BeamMode& m = basis.beam[b];
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = i * dx;
      if (pairing == BeamPairing::L2)
        s += (samples[i] - out.mean) * m.value(x);
      else
        s += curvature[i] * m.derivative(x, 2);
    }
    s *= dx;
    out.coeffs[b] = pairing == BeamPairing::L2 ? s : s / std::pow(m.kappa, 4);
  }
  return out;
}

inline int default_projection_samples(const BasisSet& basis) {
  return std::max(256, 16 * basis.beam.back().wavenumber);
}

inline BeamProjection project_initial_beam(const std::function<double(double)>& h0, const BasisSet& basis,
                                           BeamPairing pairing = BeamPairing::L2, int samples = 0) {
  const int n = samples > 0 ? samples : default_projection_samples(basis);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = h0(basis.length * i / n);
  return project_initial_beam(v, basis, pairing);
}

}  // namespace fsi_beam
