#pragma once

#include <Eigen/Dense>

#include "fields.hpp"

namespace fsi_beam {

// Full discrete unknown: fluid/beam velocity coefficients and beam shape.
// The beam rate dt g is read off the lifted entries of alpha.
struct StateVector {
  double t = 0.0;
  long step = 0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd g_coeffs;
  double g_mean = 1.0;
};

inline GeometryState geometry_of(const StateVector& s) {
  return GeometryState{s.g_mean, s.g_coeffs, beam_part(s.alpha), {}};
}

struct StepReport {
  int picard_iterations = 0;
  double picard_residual = 0.0;
  double dt = 0.0;
  double min_height = 0.0;
  double energy_residual = 0.0;
  double dissipation = 0.0;  // dt * mu <A grad u, grad u> at the midpoint
  int halvings = 0;
};

}  // namespace fsi_beam
