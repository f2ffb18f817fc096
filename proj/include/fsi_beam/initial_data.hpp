#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "basis.hpp"
#include "geometry.hpp"

namespace fsi_beam {

// Periodic scalar profile on [0, L) with analytic derivatives.
class Profile {
 public:
  virtual ~Profile() = default;
  virtual double derivative(double x, int order) const = 0;
  double operator()(double x) const { return derivative(x, 0); }
};

struct FourierTerm {
  int wavenumber = 1;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

// mean + sum (a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L))
class FourierProfile : public Profile {
 public:
  FourierProfile(double length, double mean, std::vector<FourierTerm> terms)
      : length_(length), mean_(mean), terms_(std::move(terms)) {}

  double derivative(double x, int order) const override {
    double s = order == 0 ? mean_ : 0.0;
    for (const auto& t : terms_) {
      const double k = 2.0 * std::numbers::pi * t.wavenumber / length_;
      const double kn = std::pow(k, order);
      s += kn * (t.cos_coef * detail::trig_derivative(Parity::Cos, k * x, order) +
                 t.sin_coef * detail::trig_derivative(Parity::Sin, k * x, order));
    }
    return s;
  }
  double mean() const { return mean_; }
  const std::vector<FourierTerm>& terms() const { return terms_; }

 private:
  double length_, mean_;
  std::vector<FourierTerm> terms_;
};

// mean + amplitude * (exp(sin(k x)) - I_0(1)); zero-mean perturbation with
// slowly decaying Fourier content.
class ExpSineProfile : public Profile {
 public:
  ExpSineProfile(double length, double mean, double amplitude, int wavenumber)
      : k_(2.0 * std::numbers::pi * wavenumber / length), mean_(mean), amp_(amplitude) {}

  double derivative(double x, int order) const override {
    const double s = std::sin(k_ * x), c = std::cos(k_ * x), e = std::exp(s);
    switch (order) {
      case 0: return mean_ + amp_ * (e - std::cyl_bessel_i(0.0, 1.0));
      case 1: return amp_ * k_ * c * e;
      case 2: return amp_ * k_ * k_ * (c * c - s) * e;
      default: {
        // third derivative; higher orders are not needed by the solver
        return amp_ * k_ * k_ * k_ * (c * c * c - 3.0 * s * c - c) * e;
      }
    }
  }

 private:
  double k_, mean_, amp_;
};

// Velocity on the reference strip with its gradient.
class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual ModeValue eval(double x, double z) const = 0;
};

class ZeroVelocity : public VelocityField {
 public:
  ModeValue eval(double, double) const override { return {Vec2::Zero(), Mat2::Zero()}; }
};

// u = B_{h0}^{-T} v for a solenoidal reference field v given as a sum of
// streamfunction modes; compatible by construction whenever the z = 1 trace of
// v is h1 e2.
class MappedVelocity : public VelocityField {
 public:
  MappedVelocity(std::shared_ptr<const Profile> h0, std::vector<FluidMode> modes, std::vector<double> coefs)
      : h0_(std::move(h0)), modes_(std::move(modes)), coefs_(std::move(coefs)) {}

  ModeValue eval(double x, double z) const override {
    ModeValue v{Vec2::Zero(), Mat2::Zero()};
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      const ModeValue m = modes_[i].eval(x, z);
      v.value += coefs_[i] * m.value;
      v.grad += coefs_[i] * m.grad;
    }
    const double h = h0_->derivative(x, 0), hx = h0_->derivative(x, 1), hxx = h0_->derivative(x, 2);
    const FrameScalars f = frame_scalars(h, hx, hxx, 0, 0, 0, 0, 0);
    ModeValue u;
    u.value << f.r * v.value[0], z * f.q * v.value[0] + v.value[1];
    u.grad(0, 0) = f.rx * v.value[0] + f.r * v.grad(0, 0);
    u.grad(0, 1) = f.r * v.grad(0, 1);
    u.grad(1, 0) = z * f.qx * v.value[0] + z * f.q * v.grad(0, 0) + v.grad(1, 0);
    u.grad(1, 1) = f.q * v.value[0] + z * f.q * v.grad(0, 1) + v.grad(1, 1);
    return u;
  }

 private:
  std::shared_ptr<const Profile> h0_;
  std::vector<FluidMode> modes_;
  std::vector<double> coefs_;
};

// Lifted extension of a Fourier h1 (mean-free) over h0.
inline std::shared_ptr<MappedVelocity> lifted_velocity(double length, std::shared_ptr<const Profile> h0,
                                                       const FourierProfile& h1,
                                                       std::vector<FluidMode> extra_modes = {},
                                                       std::vector<double> extra_coefs = {}) {
  std::vector<FluidMode> modes = std::move(extra_modes);
  std::vector<double> coefs = std::move(extra_coefs);
  for (const auto& t : h1.terms()) {
    BeamMode b;
    b.wavenumber = t.wavenumber;
    b.kappa = 2.0 * std::numbers::pi * t.wavenumber / length;
    b.amplitude = 1.0;
    for (Parity p : {Parity::Sin, Parity::Cos}) {
      const double c = p == Parity::Sin ? t.sin_coef : t.cos_coef;
      if (c == 0.0) continue;
      b.parity = p;
      modes.push_back(build_lifted_mode(b));
      coefs.push_back(c);
    }
  }
  return std::make_shared<MappedVelocity>(std::move(h0), std::move(modes), std::move(coefs));
}

// Interior-type stirring mode: streamfunction A z^2 (1-z)^2 e^z sin|cos(k x).
inline FluidMode stirring_mode(double length, int wavenumber, Parity parity) {
  // z^2(1-z)^2 e^z expanded in the clamped Legendre family up to degree 14
  const int terms = 15;
  const auto rule = gauss_legendre(terms + 4);
  Eigen::MatrixXd V(rule.nodes.size(), terms);
  Eigen::VectorXd y(rule.nodes.size());
  for (int q = 0; q < rule.nodes.size(); ++q) {
    const double z = rule.nodes[q];
    std::vector<double> p, dp, ddp;
    detail::legendre_table(terms, 2.0 * z - 1.0, p, dp, ddp);
    for (int n = 0; n < terms; ++n) V(q, n) = p[n];
    y[q] = std::exp(z);
  }
  const auto W = rule.weights.cwiseSqrt().asDiagonal();
  FluidMode m;
  m.kind = ModeKind::Interior;
  m.wavenumber = wavenumber;
  m.kappa = 2.0 * std::numbers::pi * wavenumber / length;
  m.parity = parity;
  m.profile.kind = wavenumber == 0 ? VerticalProfile::Kind::Shear : VerticalProfile::Kind::Clamped;
  m.profile.kappa = m.kappa;
  m.profile.coeffs = (W * V).colPivHouseholderQr().solve(W * y);
  return m;
}

struct InitialData {
  std::shared_ptr<const Profile> h0;
  std::shared_ptr<const Profile> h1;
  std::shared_ptr<const VelocityField> u0;
};

}  // namespace fsi_beam
