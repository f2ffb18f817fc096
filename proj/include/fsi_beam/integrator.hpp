#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "basis.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "state.hpp"

namespace fsi_beam {

struct IntegratorSettings {
  double picard_tol = 1e-10;
  int picard_max_iter = 25;
  double h_floor = kDefaultHeightFloor;
  bool dt_halving = false;
  double dt_min = 1e-8;
};

// Step failure carrying the last accepted state.
class StepError : public Error {
 public:
  StepError(ErrorKind kind, const std::string& detail, StateVector last_good, double crossing_time)
      : Error(kind, detail), last_good_(std::move(last_good)), crossing_time_(crossing_time) {}

  const StateVector& last_good() const { return last_good_; }
  // Estimated time at which min height crossed h_floor (contact only).
  double crossing_time() const { return crossing_time_; }

 private:
  StateVector last_good_;
  double crossing_time_;
};

// Implicit midpoint on M(g) alpha' = -(S + F_geo + C(alpha)) alpha - K g with
// g' = P alpha. Geometry and the advecting velocity are lagged one Picard sweep;
// everything else is implicit, so a converged step is the exact midpoint update.
class Integrator {
 public:
  Integrator(std::shared_ptr<const BasisSet> basis, std::shared_ptr<const BasisTables> tables, Physics physics,
             IntegratorSettings settings = {})
      : basis_(std::move(basis)), t_(std::move(tables)), phys_(physics), opt_(settings) {
    stiffness_ = beam_stiffness(*t_, phys_);
    beam_mass_ = beam_mass(*t_, phys_);
    const int fine = 4 * t_->grid.nx();
    fine_modes_.resize(fine, basis_->beam_size());
    for (int i = 0; i < fine; ++i)
      for (int b = 0; b < basis_->beam_size(); ++b)
        fine_modes_(i, b) = basis_->beam[b].value(basis_->length * i / fine);
  }

  const BasisSet& basis() const { return *basis_; }
  const BasisTables& tables() const { return *t_; }
  const Physics& physics() const { return phys_; }
  const IntegratorSettings& settings() const { return opt_; }

  // Min of g over a 4x refined periodic sampling.
  double min_height(double mean, const Eigen::VectorXd& coeffs) const {
    return (fine_modes_ * coeffs).minCoeff() + mean;
  }
  double min_height(const StateVector& s) const { return min_height(s.g_mean, s.g_coeffs); }

  std::pair<StateVector, StepReport> step(const StateVector& s, double dt) const {
    try {
      return attempt(s, dt);
    } catch (const StepError& e) {
      if (e.kind() != ErrorKind::PicardDivergence || !opt_.dt_halving || 0.5 * dt < opt_.dt_min) throw;
    }
    auto [mid, r1] = step(s, 0.5 * dt);
    auto [end, r2] = step(mid, 0.5 * dt);
    end.step = s.step + 1;
    StepReport r = r2;
    r.dt = dt;
    r.picard_iterations = r1.picard_iterations + r2.picard_iterations;
    r.picard_residual = std::max(r1.picard_residual, r2.picard_residual);
    r.dissipation = r1.dissipation + r2.dissipation;
    r.halvings = 1 + std::max(r1.halvings, r2.halvings);
    return {end, r};
  }

 private:
  double crossing(const StateVector& s, double dt, const Eigen::VectorXd& mid_rate) const {
    const double m0 = min_height(s);
    const double m1 = min_height(s.g_mean, s.g_coeffs + dt * mid_rate);
    const double f = opt_.h_floor;
    if (!(m0 > m1)) return s.t + dt;
    return s.t + dt * std::clamp((m0 - f) / (m0 - m1), 0.0, 1.0);
  }

  std::pair<StateVector, StepReport> attempt(const StateVector& s, double dt) const {
    const BasisTables& t = *t_;
    const int n = static_cast<int>(s.alpha.size());
    const Eigen::VectorXd force = -stiffness_ * embed_beam(s.g_coeffs, n);

    Eigen::VectorXd a = s.alpha;
    Eigen::MatrixXd S;
    StepReport rep;
    rep.dt = dt;
    rep.picard_residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 1; it <= opt_.picard_max_iter; ++it) {
      const Eigen::VectorXd rate = beam_part(a);
      const GeometryState g{s.g_mean, s.g_coeffs + 0.5 * dt * rate, rate, {}};
      Frame f;
      try {
        // sweeps only need an admissible geometry; h_floor is checked on the
        // converged end state
        f = make_frame(t, g, std::min(opt_.h_floor, kDefaultHeightFloor));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonPositiveHeight) throw;
        throw StepError(ErrorKind::PicardDivergence, std::string("sweep ") + std::to_string(it) + ": " + e.what(),
                        s, std::numeric_limits<double>::quiet_NaN());
      }
      const Eigen::MatrixXd M = fluid_mass(t, f, phys_) + beam_mass_;
      S = viscous_stiffness(t, f, phys_);
      const Eigen::MatrixXd sys = (2.0 / dt) * M + S + geometry_terms(t, f, phys_).total() +
                                  convection_matrix(t, f, phys_, a) + (0.5 * dt) * stiffness_;
      const Eigen::VectorXd next = sys.partialPivLu().solve((2.0 / dt) * (M * s.alpha) + force);
      rep.picard_residual = (next - a).lpNorm<Eigen::Infinity>() / (1.0 + next.lpNorm<Eigen::Infinity>());
      rep.picard_iterations = it;
      a = next;
      if (!a.allFinite() || !std::isfinite(rep.picard_residual)) break;
      if (rep.picard_residual <= opt_.picard_tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw StepError(ErrorKind::PicardDivergence,
                      "no convergence after " + std::to_string(rep.picard_iterations) +
                          " sweeps at t=" + std::to_string(s.t) + ", dt=" + std::to_string(dt) +
                          ", residual " + std::to_string(rep.picard_residual),
                      s, std::numeric_limits<double>::quiet_NaN());

    StateVector out;
    out.t = s.t + dt;
    out.step = s.step + 1;
    out.g_mean = s.g_mean;
    out.alpha = 2.0 * a - s.alpha;
    out.g_coeffs = s.g_coeffs + dt * beam_part(a);
    rep.dissipation = dt * a.dot(S * a);
    rep.min_height = min_height(out);
    if (!(rep.min_height > opt_.h_floor))
      throw StepError(ErrorKind::ContactReached,
                      "min height " + std::to_string(rep.min_height) + " reached floor at t=" + std::to_string(out.t),
                      s, crossing(s, dt, beam_part(a)));
    return {out, rep};
  }

  std::shared_ptr<const BasisSet> basis_;
  std::shared_ptr<const BasisTables> t_;
  Physics phys_;
  IntegratorSettings opt_;
  Eigen::MatrixXd stiffness_, beam_mass_, fine_modes_;
};

inline EnergyParts energy(const Integrator& in, const StateVector& s) {
  const Frame f = make_frame(in.tables(), geometry_of(s), in.settings().h_floor);
  return energy(in.basis(), in.tables(), in.physics(), s, f);
}

struct InitialAcceleration {
  Eigen::VectorXd rate;       // alpha'(0)
  double residual = 0.0;      // |M alpha' - F| / max(1, |F|)
  double dt_u_norm = 0.0;     // |dt u(0)|_{L2(Omega_1)}
  double dtt_g_norm = 0.0;    // |dt^2 g(0)|_{L2}
};

// Solves M alpha'(0) = F for the start state and reports the seed norms.
inline InitialAcceleration initial_acceleration(const BasisTables& t, const Physics& p, const StateVector& s,
                                                double h_floor = kDefaultHeightFloor) {
  const Frame f = make_frame(t, geometry_of(s), h_floor);
  const Eigen::MatrixXd M = fluid_mass(t, f, p) + beam_mass(t, p);
  const Eigen::VectorXd rhs =
      -(viscous_stiffness(t, f, p) + geometry_terms(t, f, p).total() + convection_matrix(t, f, p, s.alpha)) *
          s.alpha -
      beam_stiffness(t, p) * embed_beam(s.g_coeffs, static_cast<int>(s.alpha.size()));
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularMass, "mass matrix is not positive definite");
  InitialAcceleration out;
  out.rate = llt.solve(rhs);
  out.residual = (M * out.rate - rhs).norm() / std::max(1.0, rhs.norm());
  const auto& m = f.modes;
  const Eigen::VectorXd v1 = m.phi1 * out.rate + m.dphi1 * s.alpha, v2 = m.phi2 * out.rate + m.dphi2 * s.alpha;
  out.dt_u_norm = std::sqrt(t.grid.weight.dot(v1.cwiseAbs2() + v2.cwiseAbs2()));
  out.dtt_g_norm = beam_part(out.rate).norm();
  return out;
}

struct RunSettings {
  double dt = 1e-3;
  double t_end = 1.0;
  bool keep_states = true;
};

struct RunOutcome {
  enum class Status { Completed, Contact, PicardDivergence };
  Status status = Status::Completed;
  std::vector<StateVector> states;  // every accepted step, including the start
  std::vector<StepReport> reports;  // reports[k] produced states[k + 1]
  std::vector<EnergyLedger> ledger; // ledger[k] belongs to states[k]
  StateVector last;
  EnergyLedger last_ledger;
  std::string message;
  long failed_step = -1;
  double contact_time = std::numeric_limits<double>::quiet_NaN();
};

// Called after every accepted step (and once for the start state with a null report).
using StepObserver = std::function<void(const StateVector&, const StepReport*, const EnergyLedger&)>;

inline long step_count(double t_end, double dt) {
  return static_cast<long>(std::ceil(t_end / dt - 1e-9));
}

inline RunOutcome run(const Integrator& in, const StateVector& start, const EnergyLedger& start_ledger,
                      const RunSettings& rs, const StepObserver& observe = {}) {
  RunOutcome out;
  out.last = start;
  out.last_ledger = start_ledger;
  if (rs.keep_states) {
    out.states.push_back(start);
    out.ledger.push_back(start_ledger);
  }
  if (observe) observe(start, nullptr, start_ledger);

  const long total = step_count(rs.t_end, rs.dt);
  while (out.last.step < total) {
    const double dt = std::min(rs.dt, rs.t_end - out.last.t);
    try {
      auto [next, rep] = in.step(out.last, out.last.step + 1 == total ? dt : rs.dt);
      // times are tied to the step index so resumed runs reproduce them exactly
      next.t = next.step == total ? rs.t_end : static_cast<double>(next.step) * rs.dt;
      const EnergyLedger l = ledger_update(out.last_ledger, energy(in, next), next.t, rep.dissipation);
      rep.energy_residual = l.balance_residual;
      out.last = std::move(next);
      out.last_ledger = l;
      if (rs.keep_states) {
        out.states.push_back(out.last);
        out.reports.push_back(rep);
        out.ledger.push_back(l);
      }
      if (observe) observe(out.last, &rep, l);
    } catch (const StepError& e) {
      out.status = e.kind() == ErrorKind::ContactReached ? RunOutcome::Status::Contact
                                                         : RunOutcome::Status::PicardDivergence;
      out.message = e.what();
      out.failed_step = out.last.step + 1;
      out.contact_time = e.crossing_time();
      return out;
    }
  }
  return out;
}

// Residual norm of the differentiated system at the interior snapshots of a
// uniformly spaced window, with central-difference alpha' and alpha''.
inline std::vector<double> differentiated_residual(const BasisTables& t, const Physics& p,
                                                   const std::vector<StateVector>& window,
                                                   double h_floor = kDefaultHeightFloor) {
  const int n = static_cast<int>(window.size());
  if (n < 3) throw Error(ErrorKind::InsufficientWindow, "need at least 3 snapshots, got " + std::to_string(n));
  const double dt = window[1].t - window[0].t;
  for (int k = 1; k < n; ++k)
    if (std::abs((window[k].t - window[k - 1].t) - dt) > 1e-9 * std::abs(dt))
      throw Error(ErrorKind::InsufficientWindow, "snapshots are not uniformly spaced");
  std::vector<double> res;
  for (int k = 1; k + 1 < n; ++k) {
    const auto& a0 = window[k - 1].alpha;
    const auto& a1 = window[k].alpha;
    const auto& a2 = window[k + 1].alpha;
    const Eigen::VectorXd da = (a2 - a0) / (2.0 * dt);
    const Eigen::VectorXd dda = (a2 - 2.0 * a1 + a0) / (dt * dt);
    GeometryState g = geometry_of(window[k]);
    g.accel = beam_part(da);
    const Frame f = make_frame(t, g, h_floor);
    res.push_back(differentiated_residual_fields(t, f, p, a1, da, dda).norm());
  }
  return res;
}

}  // namespace fsi_beam
