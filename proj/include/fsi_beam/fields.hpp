#pragma once

#include <limits>

#include <Eigen/Dense>

#include "basis.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace fsi_beam {

// Beam configuration in beam-index coordinates: g = mean + sum c_b psi_b,
// with first and second time derivatives of the coefficients.
struct GeometryState {
  double mean = 1.0;
  Eigen::VectorXd coeffs, rate, accel;
};

// Beam-slot selection: rate = beam_part(alpha) keeps the lifted entries.
inline Eigen::VectorXd beam_part(const Eigen::VectorXd& alpha) {
  Eigen::VectorXd b((alpha.size() + 1) / 2);
  for (int i = 0; i < b.size(); ++i) b[i] = alpha[BasisSet::global_of_beam(i)];
  return b;
}

inline Eigen::VectorXd embed_beam(const Eigen::VectorXd& beam, int pairs) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(pairs);
  for (int i = 0; i < beam.size(); ++i) a[BasisSet::global_of_beam(i)] = beam[i];
  return a;
}

inline GeometryField sample_geometry(const BasisTables& t, const GeometryState& g) {
  const int nb = static_cast<int>(t.beam_modes.cols());
  auto pick = [nb](const Eigen::VectorXd& v) { return v.size() == nb ? v : Eigen::VectorXd::Zero(nb).eval(); };
  const Eigen::VectorXd c = pick(g.coeffs), r = pick(g.rate), a = pick(g.accel);
  GeometryField f;
  f.h = (t.beam_modes * c).array() + g.mean;
  f.hx = t.beam_modes_x * c;
  f.hxx = t.beam_modes_xx * c;
  f.ht = t.beam_modes * r;
  f.htx = t.beam_modes_x * r;
  f.htxx = t.beam_modes_xx * r;
  f.htt = t.beam_modes * a;
  f.httx = t.beam_modes_x * a;
  return f;
}

// Mapped modes Phi_j = B^{-T} Psi_j and their derivatives at every node
// (nodes x N), plus per-node geometry and metric entries.
struct MappedModes {
  Eigen::MatrixXd phi1, phi2, phi1_x, phi1_z, phi2_x, phi2_z;
  Eigen::MatrixXd dphi1, dphi2, dphi1_x, dphi1_z, dphi2_x, dphi2_z;  // time derivative
  Eigen::MatrixXd ddphi1, ddphi2;                                      // second time derivative
  Eigen::VectorXd h, hx, ht, htx, htt, z;                              // per node
  Eigen::VectorXd a11, a12, a22, da11, da12, da22;                     // A and dA/dt per node
};

inline MappedModes map_modes(const BasisTables& t, const GeometryField& geo, double h_floor = kDefaultHeightFloor) {
  const QuadratureGrid& g = t.grid;
  const int nodes = g.nodes(), nz = g.nz();
  if (!(geo.min_height() > h_floor))
    throw Error(ErrorKind::NonPositiveHeight,
                "min height " + std::to_string(geo.min_height()) + " at or below floor " + std::to_string(h_floor));

  MappedModes m;
  Eigen::VectorXd r(nodes), zq(nodes), rx(nodes), zqx(nodes), rt(nodes), q(nodes), zqt(nodes), qt(nodes),
      rtx(nodes), zqtx(nodes), rtt(nodes), zqtt(nodes);
  for (auto* v : {&m.h, &m.hx, &m.ht, &m.htx, &m.htt, &m.z, &m.a11, &m.a12, &m.a22, &m.da11, &m.da12, &m.da22})
    v->resize(nodes);
  for (int i = 0; i < g.nx(); ++i) {
    const FrameScalars f = frame_scalars(geo.h[i], geo.hx[i], geo.hxx[i], geo.ht[i], geo.htx[i], geo.htxx[i],
                                         geo.htt[i], geo.httx[i]);
    const double h = geo.h[i], hx = geo.hx[i], ht = geo.ht[i], htx = geo.htx[i];
    for (int qi = 0; qi < nz; ++qi) {
      const int p = g.index(i, qi);
      const double z = g.z[qi];
      r[p] = f.r;
      q[p] = f.q;
      zq[p] = z * f.q;
      rx[p] = f.rx;
      zqx[p] = z * f.qx;
      rt[p] = f.rt;
      qt[p] = f.qt;
      zqt[p] = z * f.qt;
      rtx[p] = f.rtx;
      zqtx[p] = z * f.qtx;
      rtt[p] = f.rtt;
      zqtt[p] = z * f.qtt;
      m.h[p] = h;
      m.hx[p] = hx;
      m.ht[p] = ht;
      m.htx[p] = htx;
      m.htt[p] = geo.htt[i];
      m.z[p] = z;
      m.a11[p] = h;
      m.a12[p] = -z * hx;
      m.a22[p] = (1.0 + z * z * hx * hx) / h;
      m.da11[p] = ht;
      m.da12[p] = -z * htx;
      m.da22[p] = 2.0 * z * z * hx * htx / h - (1.0 + z * z * hx * hx) * ht / (h * h);
    }
  }

  auto col = [](const Eigen::MatrixXd& a, const Eigen::VectorXd& s) -> Eigen::MatrixXd {
    return (a.array().colwise() * s.array()).matrix();
  };
  m.phi1 = col(t.psi1, r);
  m.phi2 = col(t.psi1, zq) + t.psi2;
  m.phi1_x = col(t.psi1, rx) + col(t.psi1_x, r);
  m.phi1_z = col(t.psi1_z, r);
  m.phi2_x = col(t.psi1, zqx) + col(t.psi1_x, zq) + t.psi2_x;
  m.phi2_z = col(t.psi1, q) + col(t.psi1_z, zq) + t.psi2_z;
  m.dphi1 = col(t.psi1, rt);
  m.dphi2 = col(t.psi1, zqt);
  m.dphi1_x = col(t.psi1, rtx) + col(t.psi1_x, rt);
  m.dphi1_z = col(t.psi1_z, rt);
  m.dphi2_x = col(t.psi1, zqtx) + col(t.psi1_x, zqt);
  m.dphi2_z = col(t.psi1, qt) + col(t.psi1_z, zqt);
  m.ddphi1 = col(t.psi1, rtt);
  m.ddphi2 = col(t.psi1, zqtt);

  const double smallest = m.h.minCoeff() * g.weight.minCoeff();
  if (!(smallest > std::numeric_limits<double>::min() * 1e6) || !m.phi2_z.allFinite())
    throw Error(ErrorKind::QuadratureUnderflow, "quadrature weights collapsed under the current geometry");
  return m;
}

}  // namespace fsi_beam
