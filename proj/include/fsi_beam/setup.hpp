#pragma once

#include <memory>

#include "config.hpp"
#include "diagnostics.hpp"
#include "integrator.hpp"
#include "projection.hpp"

namespace fsi_beam {

// Everything a run needs, built from a config.
struct Model {
  SimConfig config;
  std::shared_ptr<const BasisSet> basis;
  std::shared_ptr<const BasisTables> tables;
  InitialData data;
  StateVector start;
  std::shared_ptr<const Integrator> integrator;

  EnergyLedger start_ledger() const { return ledger_start(energy(*integrator, start), start.t); }
};

inline Model build_model(const SimConfig& c) {
  Model m;
  m.config = c;
  const double L = c.physics.length;
  BasisOptions opt;
  opt.interior_max_wavenumber = c.disc.interior_max_wavenumber;
  opt.interior_profiles = c.disc.interior_profiles;
  auto basis = std::make_shared<BasisSet>(build_basis_set(L, c.disc.pairs, opt));
  const Resolution r = auto_resolution(*basis, c.disc.oversampling, c.disc.n_x, c.disc.n_z);
  const QuadratureGrid grid =
      build_quadrature(L, r.n_x, r.n_z, basis->max_wavenumber(), basis->max_z_degree());
  auto tables = std::make_shared<BasisTables>(tabulate(*basis, grid));

  m.data = make_initial_data(c);
  const BeamProjection shape = project_initial_beam(*m.data.h0, *basis, c.disc.pairing);
  m.start.g_mean = shape.mean;
  m.start.g_coeffs = shape.coeffs;
  m.start.alpha = project_initial_fluid(m.data, *basis, *tables, c.compatibility_tol, c.disc.pairing);

  IntegratorSettings is;
  is.picard_tol = c.time.picard_tol;
  is.picard_max_iter = c.time.picard_max_iter;
  is.h_floor = c.time.h_floor;
  is.dt_halving = c.time.dt_halving;
  is.dt_min = c.time.dt_min;
  m.basis = basis;
  m.tables = tables;
  m.integrator = std::make_shared<Integrator>(basis, tables, c.physics, is);
  require_height(m.integrator->min_height(m.start), c.time.h_floor);
  return m;
}

}  // namespace fsi_beam
