#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "basis.hpp"
#include "errors.hpp"
#include "assembly.hpp"
#include "fields.hpp"
#include "initial_data.hpp"

namespace fsi_beam {

inline BeamProjection project_initial_beam(const Profile& h0, const BasisSet& basis,
                                           BeamPairing pairing = BeamPairing::L2) {
  return project_initial_beam([&](double x) { return h0(x); }, basis, pairing);
}

struct CompatibilityReport {
  double mean_h1 = 0.0;     // |int h1 dx|
  double bottom = 0.0;      // max |u0(x, 0)|
  double top = 0.0;         // max |u0(x, 1) - h1 e2|
  double divergence = 0.0;  // max |div(B_{h0}^T u0)|
};

inline CompatibilityReport check_compatibility(const InitialData& data, const QuadratureGrid& grid) {
  CompatibilityReport r;
  const int nx = grid.nx();
  for (int i = 0; i < nx; ++i) {
    const double x = grid.x[i];
    r.mean_h1 += grid.wx[i] * (*data.h1)(x);
    r.bottom = std::max(r.bottom, data.u0->eval(x, 0.0).value.cwiseAbs().maxCoeff());
    const ModeValue top = data.u0->eval(x, 1.0);
    r.top = std::max(r.top, std::max(std::abs(top.value[0]), std::abs(top.value[1] - (*data.h1)(x))));
    const double h = data.h0->derivative(x, 0), hx = data.h0->derivative(x, 1);
    for (int q = 0; q < grid.nz(); ++q) {
      const double z = grid.z[q];
      const ModeValue u = data.u0->eval(x, z);
      const double div = h * u.grad(0, 0) - z * hx * u.grad(0, 1) + u.grad(1, 1);
      r.divergence = std::max(r.divergence, std::abs(div));
    }
  }
  r.mean_h1 = std::abs(r.mean_h1);
  return r;
}

// alpha(0): lifted entries from the beam projection of h1, interior entries
// from the V1 pairing of v0 = B_{g0}^T u0 minus its lifted part.
inline Eigen::VectorXd project_initial_fluid(const InitialData& data, const BasisSet& basis, const BasisTables& t,
                                             double tolerance = 1e-8, BeamPairing pairing = BeamPairing::L2) {
  const QuadratureGrid& grid = t.grid;
  const CompatibilityReport c = check_compatibility(data, grid);
  auto fail = [&](const std::string& what, double v) {
    throw Error(ErrorKind::CompatibilityViolation, what + " residual " + std::to_string(v) + " exceeds tolerance");
  };
  if (c.mean_h1 > tolerance) fail("zero-mean h1", c.mean_h1);
  if (c.bottom > tolerance) fail("no-slip at z=0", c.bottom);
  if (c.top > tolerance) fail("kinematic trace at z=1", c.top);
  if (c.divergence > tolerance) fail("divergence", c.divergence);

  const int n = basis.size();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  const BeamProjection lift = project_initial_beam(*data.h1, basis, pairing);
  for (int b = 0; b < basis.beam_size(); ++b) alpha[BasisSet::global_of_beam(b)] = lift.coeffs[b];

  const BeamProjection shape = project_initial_beam(*data.h0, basis, pairing);
  GeometryState g0{shape.mean, shape.coeffs, {}, {}};
  const GeometryField geo = sample_geometry(t, g0);

  const int nodes = grid.nodes();
  Eigen::VectorXd r1x(nodes), r1z(nodes), r2x(nodes), r2z(nodes);
  for (int i = 0; i < grid.nx(); ++i) {
    const double h = geo.h[i], hx = geo.hx[i], hxx = geo.hxx[i];
    for (int q = 0; q < grid.nz(); ++q) {
      const int p = grid.index(i, q);
      const double z = grid.z[q];
      const ModeValue u = data.u0->eval(grid.x[i], z);
      const double u1 = u.value[0];
      r1x[p] = hx * u1 + h * u.grad(0, 0);
      r1z[p] = h * u.grad(0, 1);
      r2x[p] = -z * hxx * u1 - z * hx * u.grad(0, 0) + u.grad(1, 0);
      r2z[p] = -hx * u1 - z * hx * u.grad(0, 1) + u.grad(1, 1);
    }
  }
  const Eigen::VectorXd lifted = alpha;
  r1x -= t.psi1_x * lifted;
  r1z -= t.psi1_z * lifted;
  r2x -= t.psi2_x * lifted;
  r2z -= t.psi2_z * lifted;
  const auto& w = grid.weight;
  const Eigen::VectorXd pairing_v1 = t.psi1_x.transpose() * r1x.cwiseProduct(w) +
                                     t.psi1_z.transpose() * r1z.cwiseProduct(w) +
                                     t.psi2_x.transpose() * r2x.cwiseProduct(w) +
                                     t.psi2_z.transpose() * r2z.cwiseProduct(w);
  for (int j = 1; j < n; j += 2) alpha[j] = pairing_v1[j];
  return alpha;
}

// L2(Omega_1) distance between B_{g0}^{-T} sum alpha_j Psi_j and u0 on the grid.
inline double reconstruction_error(const InitialData& data, const BasisSet& basis, const BasisTables& t,
                                   const Eigen::VectorXd& alpha, BeamPairing pairing = BeamPairing::L2) {
  const BeamProjection shape = project_initial_beam(*data.h0, basis, pairing);
  const Frame f = make_frame(t, GeometryState{shape.mean, shape.coeffs, {}, {}});
  const Eigen::VectorXd u1 = f.modes.phi1 * alpha, u2 = f.modes.phi2 * alpha;
  const QuadratureGrid& grid = t.grid;
  double s = 0.0;
  for (int p = 0; p < grid.nodes(); ++p) {
    const ModeValue u = data.u0->eval(grid.node_x[p], grid.node_z[p]);
    s += grid.weight[p] * ((u1[p] - u.value[0]) * (u1[p] - u.value[0]) + (u2[p] - u.value[1]) * (u2[p] - u.value[1]));
  }
  return std::sqrt(s);
}

}  // namespace fsi_beam
