#pragma once

// Entry-by-entry reference evaluation of the Galerkin operators. Shares only
// the node positions and weights with the production assembly; modes are
// evaluated pointwise and all frame derivatives come from generic 2x2 matrix
// calculus on B rather than the closed-form scalars of fields.hpp.

#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "basis.hpp"
#include "quadrature.hpp"

namespace fsi_beam::oracle {

struct Operators {
  Eigen::MatrixXd M, S, F_geo, A, B, C;
  Tensor3 C3, D, E;
};

namespace detail {

struct Local {
  double h, hx, hxx, ht, htx, htxx, htt, httx, z;
  Mat2 A, dA;
  Vec2 chi_t, chi_tt;
  Mat2 Bt, dBt;  // B^T and dt B^T
};

struct ModeAt {
  Vec2 psi, phi, dphi, ddphi;
  Mat2 gpsi, gphi, gdphi;  // gradients, (component, direction)
};

inline Mat2 b_matrix(double a, double b, double z) {
  Mat2 m;
  m << a, -z * b, 0.0, 0.0;
  return m;
}

}  // namespace detail

inline Operators evaluate(const BasisSet& basis, const QuadratureGrid& grid, const GeometryState& g,
                          const Physics& p) {
  using namespace detail;
  const int n = basis.size();
  const int nodes = grid.nodes();
  auto beam_sum = [&](const Eigen::VectorXd& c, double x, int order) {
    double s = 0.0;
    for (int b = 0; b < basis.beam_size(); ++b)
      if (c.size() == basis.beam_size()) s += c[b] * basis.beam[b].derivative(x, order);
    return s;
  };

  std::vector<Local> loc(nodes);
  std::vector<std::vector<ModeAt>> md(nodes, std::vector<ModeAt>(n));
  for (int node = 0; node < nodes; ++node) {
    const double x = grid.node_x[node], z = grid.node_z[node];
    Local& l = loc[node];
    l.z = z;
    l.h = g.mean + beam_sum(g.coeffs, x, 0);
    l.hx = beam_sum(g.coeffs, x, 1);
    l.hxx = beam_sum(g.coeffs, x, 2);
    l.ht = beam_sum(g.rate, x, 0);
    l.htx = beam_sum(g.rate, x, 1);
    l.htxx = beam_sum(g.rate, x, 2);
    l.htt = beam_sum(g.accel, x, 0);
    l.httx = beam_sum(g.accel, x, 1);

    Mat2 B;
    B << l.h, -z * l.hx, 0.0, 1.0;
    const Mat2 Bx = b_matrix(l.hx, l.hxx, z);
    Mat2 Bz;
    Bz << 0.0, -l.hx, 0.0, 0.0;
    const Mat2 Bt = b_matrix(l.ht, l.htx, z);
    const Mat2 Btt = b_matrix(l.htt, l.httx, z);
    const Mat2 Bxt = b_matrix(l.htx, l.htxx, z);
    Mat2 Bzt;
    Bzt << 0.0, -l.htx, 0.0, 0.0;

    const Mat2 Q = B.transpose().inverse();
    auto d1 = [&](const Mat2& Ba) -> Mat2 { return -Q * Ba.transpose() * Q; };
    auto d2 = [&](const Mat2& Ba, const Mat2& Bb, const Mat2& Bab) -> Mat2 {
      return Q * Ba.transpose() * Q * Bb.transpose() * Q + Q * Bb.transpose() * Q * Ba.transpose() * Q -
             Q * Bab.transpose() * Q;
    };
    const Mat2 Qx = d1(Bx), Qz = d1(Bz), Qt = d1(Bt);
    const Mat2 Qtt = d2(Bt, Bt, Btt), Qxt = d2(Bx, Bt, Bxt), Qzt = d2(Bz, Bt, Bzt);

    l.Bt = B.transpose();
    l.dBt = Bt.transpose();
    l.A = B.transpose() * B / l.h;
    l.dA = (Bt.transpose() * B + B.transpose() * Bt) / l.h - B.transpose() * B * l.ht / (l.h * l.h);
    l.chi_t << 0.0, l.ht * z;
    l.chi_tt << 0.0, l.htt * z;

    for (int j = 0; j < n; ++j) {
      const ModeValue v = basis.fluid[j].eval(x, z);
      ModeAt& m = md[node][j];
      m.psi = v.value;
      m.gpsi = v.grad;
      m.phi = Q * v.value;
      m.dphi = Qt * v.value;
      m.ddphi = Qtt * v.value;
      m.gphi.col(0) = Qx * v.value + Q * v.grad.col(0);
      m.gphi.col(1) = Qz * v.value + Q * v.grad.col(1);
      m.gdphi.col(0) = Qxt * v.value + Qt * v.grad.col(0);
      m.gdphi.col(1) = Qzt * v.value + Qt * v.grad.col(1);
    }
  }

  // beam data on x-nodes
  const int nx = grid.nx();
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(nx, n), psi_x = psi, psi_xx = psi;
  Eigen::VectorXd ht_col(nx), htt_col(nx);
  for (int i = 0; i < nx; ++i) {
    const double x = grid.x[i];
    ht_col[i] = beam_sum(g.rate, x, 0);
    htt_col[i] = beam_sum(g.accel, x, 0);
    for (int j = 0; j < n; j += 2) {
      const BeamMode& b = basis.beam[j / 2];
      psi(i, j) = b.derivative(x, 0);
      psi_x(i, j) = b.derivative(x, 1);
      psi_xx(i, j) = b.derivative(x, 2);
    }
  }

  const double rf = p.rho_f, mu = p.mu;
  Operators o;
  for (auto* m : {&o.M, &o.S, &o.F_geo, &o.A, &o.B, &o.C}) m->setZero(n, n);
  o.C3.assign(n, Eigen::MatrixXd::Zero(n, n));
  o.D = o.C3;
  o.E = o.C3;

  auto frob = [](const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); };

  for (int node = 0; node < nodes; ++node) {
    const double w = grid.weight[node];
    const Local& l = loc[node];
    const auto& m = md[node];
    const Vec2 chi_t_b = l.Bt * l.chi_t, chi_tt_b = l.Bt * l.chi_tt, chi_t_db = l.dBt * l.chi_t;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        const ModeAt &mj = m[j], &mk = m[k];
        const double mass = rf * l.h * mj.phi.dot(mk.phi);
        const double visc = mu * frob(mj.gphi * l.A, mk.gphi);
        const double adv = -rf * (mj.gphi * chi_t_b).dot(mk.phi);
        o.M(k, j) += w * mass;
        o.S(k, j) += w * visc;
        o.F_geo(k, j) += w * (rf * l.h * mj.dphi.dot(mk.phi) + adv);
        o.A(k, j) += w * mass;
        o.B(k, j) += w * (rf * l.ht * mj.phi.dot(mk.phi) + 2.0 * rf * l.h * mj.dphi.dot(mk.phi) +
                          rf * l.h * mj.phi.dot(mk.dphi) + adv + visc);
        o.C(k, j) += w * (rf * l.ht * mj.dphi.dot(mk.phi) + rf * l.h * mj.ddphi.dot(mk.phi) +
                          rf * l.h * mj.dphi.dot(mk.dphi) - rf * (mj.gphi * chi_tt_b).dot(mk.phi) -
                          rf * (mj.gphi * chi_t_db).dot(mk.phi) - rf * (mj.gdphi * chi_t_b).dot(mk.phi) -
                          rf * (mj.gphi * chi_t_b).dot(mk.dphi) + mu * frob(mj.gphi * l.dA, mk.gphi) +
                          mu * frob(mj.gdphi * l.A, mk.gphi) + mu * frob(mj.gphi * l.A, mk.gdphi));
        for (int q = 0; q < n; ++q) {
          const ModeAt& ml = m[q];
          const Vec2 adv_l = l.Bt * ml.phi, adv_j = l.Bt * mj.phi;
          const Vec2 adv_dl = l.Bt * ml.dphi;
          const Vec2 dadv_j = l.dBt * mj.phi;
          o.C3[q](k, j) += w * 0.5 * rf * ((mj.gphi * adv_l).dot(mk.phi) - (mk.gphi * adv_l).dot(mj.phi));
          o.D[q](k, j) += w * 0.5 * rf *
                          ((mj.gphi * adv_l).dot(mk.phi) + (ml.gphi * adv_j).dot(mk.phi) -
                           (mk.gphi * adv_l).dot(mj.phi) - (mk.gphi * adv_j).dot(ml.phi));
          o.E[q](k, j) += w * 0.5 * rf *
                          ((mj.gphi * adv_dl).dot(mk.phi) + (ml.gphi * dadv_j).dot(mk.phi) +
                           (ml.gdphi * adv_j).dot(mk.phi) + (ml.gphi * adv_j).dot(mk.dphi) -
                           (mk.gphi * adv_dl).dot(mj.phi) - (mk.gphi * dadv_j).dot(ml.phi) -
                           (mk.gdphi * adv_j).dot(ml.phi) - (mk.gphi * adv_j).dot(ml.dphi));
        }
      }
  }

  for (int i = 0; i < nx; ++i) {
    const double w = grid.wx[i];
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        const double bm = p.rho_s * psi(i, j) * psi(i, k);
        const double st = p.tension * psi_x(i, j) * psi_x(i, k) + p.bending * psi_xx(i, j) * psi_xx(i, k);
        o.M(k, j) += w * bm;
        o.A(k, j) += w * bm;
        o.F_geo(k, j) += w * 0.5 * rf * ht_col[i] * psi(i, j) * psi(i, k);
        o.B(k, j) += w * 0.5 * rf * ht_col[i] * psi(i, j) * psi(i, k);
        o.C(k, j) += w * (st + 0.5 * rf * htt_col[i] * psi(i, j) * psi(i, k));
      }
  }
  return o;
}

}  // namespace fsi_beam::oracle
