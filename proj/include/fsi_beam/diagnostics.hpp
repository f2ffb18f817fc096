#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "basis.hpp"
#include "initial_data.hpp"
#include "quadrature.hpp"
#include "state.hpp"

namespace fsi_beam {

struct EnergyParts {
  double kinetic_fluid = 0.0;  // 1/2 rho_f <h u, u>
  double kinetic_beam = 0.0;   // 1/2 rho_s |dt g|^2
  double elastic = 0.0;        // 1/2 beta |g_x|^2 + 1/2 alpha |g_xx|^2
  double total() const { return kinetic_fluid + kinetic_beam + elastic; }
};

struct EnergyLedger {
  double t = 0.0;
  double E_kinetic_fluid = 0.0;
  double E_kinetic_beam = 0.0;
  double E_elastic = 0.0;
  double E_total = 0.0;
  double E_initial = 0.0;
  double dissipation_cum = 0.0;
  double balance_residual = 0.0;
};

inline EnergyParts energy(const BasisSet& basis, const BasisTables& t, const Physics& p, const StateVector& s,
                          const Frame& f) {
  EnergyParts e;
  const Eigen::VectorXd u1 = f.modes.phi1 * s.alpha, u2 = f.modes.phi2 * s.alpha;
  e.kinetic_fluid = 0.5 * p.rho_f * (t.grid.weight.cwiseProduct(f.modes.h)).dot(u1.cwiseAbs2() + u2.cwiseAbs2());
  const Eigen::VectorXd rate = beam_part(s.alpha);
  e.kinetic_beam = 0.5 * p.rho_s * rate.squaredNorm();
  for (int b = 0; b < basis.beam_size(); ++b) {
    const double k2 = basis.beam[b].kappa * basis.beam[b].kappa;
    e.elastic += 0.5 * (p.tension * k2 + p.bending * k2 * k2) * s.g_coeffs[b] * s.g_coeffs[b];
  }
  return e;
}

inline EnergyLedger ledger_start(const EnergyParts& e, double t = 0.0) {
  EnergyLedger l;
  l.t = t;
  l.E_kinetic_fluid = e.kinetic_fluid;
  l.E_kinetic_beam = e.kinetic_beam;
  l.E_elastic = e.elastic;
  l.E_total = e.total();
  l.E_initial = l.E_total;
  return l;
}

inline EnergyLedger ledger_update(const EnergyLedger& prev, const EnergyParts& e, double t, double dissipation) {
  EnergyLedger l = prev;
  l.t = t;
  l.E_kinetic_fluid = e.kinetic_fluid;
  l.E_kinetic_beam = e.kinetic_beam;
  l.E_elastic = e.elastic;
  l.E_total = e.total();
  l.dissipation_cum = prev.dissipation_cum + dissipation;
  l.balance_residual = l.E_total + l.dissipation_cum - l.E_initial;
  return l;
}

// |h1|^2_{L2} + |h0|^2_{H2} + |u0|^2_{L2(Omega_1)} by fine tensor quadrature.
inline double compute_C0(const InitialData& data, double length, int n_x = 512, int n_z = 48) {
  const QuadratureGrid g = build_quadrature(length, n_x, n_z);
  double c = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    const double x = g.x[i];
    const double h1 = (*data.h1)(x);
    const double a = data.h0->derivative(x, 0), b = data.h0->derivative(x, 1), d = data.h0->derivative(x, 2);
    c += g.wx[i] * (h1 * h1 + a * a + b * b + d * d);
  }
  for (int p = 0; p < g.nodes(); ++p) c += g.weight[p] * data.u0->eval(g.node_x[p], g.node_z[p]).value.squaredNorm();
  return c;
}

struct CompatibilityResiduals {
  double mean_dtg = 0.0;    // |int dt g dx|
  double kinematic = 0.0;   // max_x |u(x,1) - dt g e2|
  double divergence = 0.0;  // max over nodes |div(B^T u)|
  double noslip = 0.0;      // max_x |u(x,0)|
};

inline CompatibilityResiduals compatibility_residuals(const BasisTables& t, const StateVector& s, const Frame& f) {
  CompatibilityResiduals r;
  const auto& a = s.alpha;
  const auto& geo = f.geo;
  const Eigen::VectorXd dtg = t.beam * a;
  r.mean_dtg = std::abs(t.grid.wx.dot(dtg));

  const Eigen::VectorXd top1 = t.top1 * a, top2 = t.top2 * a, bot1 = t.bottom1 * a, bot2 = t.bottom2 * a;
  for (int i = 0; i < t.grid.nx(); ++i) {
    const double rr = 1.0 / geo.h[i], q = geo.hx[i] / geo.h[i];
    // u = B^{-T} v with v the basis field at the wall
    r.kinematic = std::max({r.kinematic, std::abs(rr * top1[i]), std::abs(q * top1[i] + top2[i] - dtg[i])});
    r.noslip = std::max({r.noslip, std::abs(rr * bot1[i]), std::abs(bot2[i])});
  }
  const auto& m = f.modes;
  const Eigen::VectorXd u1x = m.phi1_x * a, u1z = m.phi1_z * a, u2z = m.phi2_z * a;
  const Eigen::VectorXd div = m.h.cwiseProduct(u1x) - m.z.cwiseProduct(m.hx).cwiseProduct(u1z) + u2z;
  r.divergence = div.cwiseAbs().maxCoeff();
  return r;
}

// Monitored a-priori norms along a trajectory of equally spaced states.
struct NormBudget {
  double dt_u_sup = 0.0;       // sup_t |dt u|_{L2}
  double grad_dt_u_int = 0.0;  // (int_t |grad dt u|^2_{L2})^{1/2}
  double dtt_g_sup = 0.0;      // sup_t |dt^2 g|_{L2}, finite differences
  double dtt_g_sup_system = 0.0;  // same norm from the first-order system rate
  double dt_g_h2_sup = 0.0;    // sup_t |dt g|_{H2}
  double u_h1_sup = 0.0;       // sup_t |u|_{H1(Omega_1)}
  double min_height = std::numeric_limits<double>::infinity();
  bool blow_up = false;
  bool below_h_min = false;
  std::string unmonitored = "L4 H^{5/2} velocity and pressure norms need a Stokes solve on the physical domain";

  bool finite() const {
    return std::isfinite(dt_u_sup) && std::isfinite(grad_dt_u_int) && std::isfinite(dtt_g_sup) &&
           std::isfinite(dtt_g_sup_system) && std::isfinite(dt_g_h2_sup) && std::isfinite(u_h1_sup) &&
           std::isfinite(min_height);
  }
};

struct BudgetSettings {
  double ceiling = 1e8;
  double h_min = 0.0;
  double h_floor = kDefaultHeightFloor;
};

// alpha' from the first-order system M alpha' = -(S + F_geo + C(alpha)) alpha - K g.
inline Eigen::VectorXd system_rate(const BasisTables& t, const Physics& p, const StateVector& s, const Frame& f) {
  const Eigen::MatrixXd M = fluid_mass(t, f, p) + beam_mass(t, p);
  const Eigen::MatrixXd L = viscous_stiffness(t, f, p) + geometry_terms(t, f, p).total() +
                            convection_matrix(t, f, p, s.alpha);
  const Eigen::VectorXd rhs =
      -L * s.alpha - beam_stiffness(t, p) * embed_beam(s.g_coeffs, static_cast<int>(s.alpha.size()));
  return M.llt().solve(rhs);
}

inline NormBudget norm_budget(const BasisSet& basis, const BasisTables& t, const Physics& p,
                              const std::vector<StateVector>& traj, const BudgetSettings& opt = {}) {
  NormBudget nb;
  const int n = static_cast<int>(traj.size());
  if (n == 0) return nb;
  const auto& w = t.grid.weight;
  std::vector<double> grad_sq(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const StateVector& s = traj[k];
    const Frame f = make_frame(t, geometry_of(s), opt.h_floor);
    nb.min_height = std::min(nb.min_height, f.geo.min_height());

    Eigen::VectorXd da = Eigen::VectorXd::Zero(s.alpha.size());
    if (n >= 2) {
      const int lo = std::max(0, k - 1), hi = std::min(n - 1, k + 1);
      da = (traj[hi].alpha - traj[lo].alpha) / (traj[hi].t - traj[lo].t);
    }
    const auto& m = f.modes;
    const Eigen::VectorXd v1 = m.phi1 * da + m.dphi1 * s.alpha, v2 = m.phi2 * da + m.dphi2 * s.alpha;
    nb.dt_u_sup = std::max(nb.dt_u_sup, std::sqrt(w.dot(v1.cwiseAbs2() + v2.cwiseAbs2())));
    const Eigen::VectorXd g1x = m.phi1_x * da + m.dphi1_x * s.alpha, g1z = m.phi1_z * da + m.dphi1_z * s.alpha,
                          g2x = m.phi2_x * da + m.dphi2_x * s.alpha, g2z = m.phi2_z * da + m.dphi2_z * s.alpha;
    grad_sq[k] = w.dot(g1x.cwiseAbs2() + g1z.cwiseAbs2() + g2x.cwiseAbs2() + g2z.cwiseAbs2());

    nb.dtt_g_sup = std::max(nb.dtt_g_sup, beam_part(da).norm());
    nb.dtt_g_sup_system = std::max(nb.dtt_g_sup_system, beam_part(system_rate(t, p, s, f)).norm());

    const Eigen::VectorXd rate = beam_part(s.alpha);
    double h2 = 0.0;
    for (int b = 0; b < basis.beam_size(); ++b) {
      const double k2 = basis.beam[b].kappa * basis.beam[b].kappa;
      h2 += (1.0 + k2 + k2 * k2) * rate[b] * rate[b];
    }
    nb.dt_g_h2_sup = std::max(nb.dt_g_h2_sup, std::sqrt(h2));

    const Eigen::VectorXd u1 = m.phi1 * s.alpha, u2 = m.phi2 * s.alpha;
    const Eigen::VectorXd u1x = m.phi1_x * s.alpha, u1z = m.phi1_z * s.alpha, u2x = m.phi2_x * s.alpha,
                          u2z = m.phi2_z * s.alpha;
    const double h1 = w.dot(u1.cwiseAbs2() + u2.cwiseAbs2() + u1x.cwiseAbs2() + u1z.cwiseAbs2() +
                            u2x.cwiseAbs2() + u2z.cwiseAbs2());
    nb.u_h1_sup = std::max(nb.u_h1_sup, std::sqrt(h1));
  }
  double integral = 0.0;
  for (int k = 0; k + 1 < n; ++k) integral += 0.5 * (traj[k + 1].t - traj[k].t) * (grad_sq[k] + grad_sq[k + 1]);
  nb.grad_dt_u_int = std::sqrt(integral);

  for (double v : {nb.dt_u_sup, nb.grad_dt_u_int, nb.dtt_g_sup, nb.dt_g_h2_sup, nb.u_h1_sup})
    if (!std::isfinite(v) || v > opt.ceiling) nb.blow_up = true;
  nb.below_h_min = nb.min_height < opt.h_min;
  return nb;
}

}  // namespace fsi_beam
