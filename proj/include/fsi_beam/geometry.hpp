#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"
#include "spectral.hpp"

namespace fsi_beam {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kDefaultHeightFloor = 1e-6;

// Pointwise geometry data at reference coordinate z.
struct GeometrySample {
  double h = 1.0;
  double dx_h = 0.0;
  double dxx_h = 0.0;
  double dt_h = 0.0;
  double dtdx_h = 0.0;
  double z = 0.0;
};

struct TransformMatrices {
  Mat2 A;         // B^T B / h
  Mat2 B;         // [[h, -z h_x], [0, 1]]
  Mat2 B_invT;
  Mat2 dtB;
  Mat2 dtB_invT;
  Mat2 dtA;
  Vec2 chi_dt;    // (0, z h_t)
};

inline void require_height(double h, double h_floor) {
  if (!(h > h_floor))
    throw Error(ErrorKind::NonPositiveHeight,
                "height " + std::to_string(h) + " at or below floor " + std::to_string(h_floor));
}

inline TransformMatrices transform_matrices(const GeometrySample& s, double h_floor = kDefaultHeightFloor) {
  require_height(s.h, h_floor);
  const double h = s.h, hx = s.dx_h, ht = s.dt_h, htx = s.dtdx_h, z = s.z;
  TransformMatrices m;
  m.B << h, -z * hx, 0.0, 1.0;
  m.B_invT << 1.0 / h, 0.0, z * hx / h, 1.0;
  m.A << h, -z * hx, -z * hx, (1.0 + z * z * hx * hx) / h;
  m.dtB << ht, -z * htx, 0.0, 0.0;
  m.dtB_invT << -ht / (h * h), 0.0, z * (htx / h - hx * ht / (h * h)), 0.0;
  m.dtA << ht, -z * htx, -z * htx, 2.0 * z * z * hx * htx / h - (1.0 + z * z * hx * hx) * ht / (h * h);
  m.chi_dt << 0.0, z * ht;
  return m;
}

// G = B^{-T} dtB^T u; only the first velocity component enters.
inline Vec2 correction_field(const Vec2& u, const GeometrySample& s, double h_floor = kDefaultHeightFloor) {
  require_height(s.h, h_floor);
  const double h = s.h, z = s.z;
  return {s.dt_h * u[0] / h, z / h * s.dt_h * s.dx_h * u[0] - z * s.dtdx_h * u[0]};
}

inline Vec2 pressure_test_field(const Vec2& u, const Vec2& dt_u, const GeometrySample& s,
                                double h_floor = kDefaultHeightFloor) {
  require_height(s.h, h_floor);
  const double h = s.h, z = s.z, ht = s.dt_h, hx = s.dx_h, htx = s.dtdx_h;
  const double u1 = u[0], du1 = dt_u[0];
  return {ht * du1 / h + ht * ht * u1 / (h * h),
          z / h * ht * hx * du1 + z / (h * h) * ht * ht * hx * u1 - z * htx * du1 - z / h * ht * htx * u1};
}

// Height and its space/time derivatives at the x-nodes of a grid.
struct GeometryField {
  Eigen::VectorXd h, hx, hxx, ht, htx, htxx, htt, httx;

  double min_height() const { return h.minCoeff(); }
};

// Per-column scalars of the mapped frame Q = B^{-T} = [[r, 0], [z q, 1]] with
// r = 1/h, q = h_x/h, and their x/t derivatives.
struct FrameScalars {
  double r, q, rx, qx, rt, qt, rtx, qtx, rtt, qtt;
};

inline FrameScalars frame_scalars(double h, double hx, double hxx, double ht, double htx, double htxx,
                                  double htt, double httx) {
  const double ih = 1.0 / h, ih2 = ih * ih, ih3 = ih2 * ih;
  FrameScalars f;
  f.r = ih;
  f.q = hx * ih;
  f.rx = -hx * ih2;
  f.qx = hxx * ih - hx * hx * ih2;
  f.rt = -ht * ih2;
  f.qt = htx * ih - hx * ht * ih2;
  f.rtx = -htx * ih2 + 2.0 * ht * hx * ih3;
  f.qtx = htxx * ih - (2.0 * hx * htx + hxx * ht) * ih2 + 2.0 * hx * hx * ht * ih3;
  f.rtt = -htt * ih2 + 2.0 * ht * ht * ih3;
  f.qtt = httx * ih - (2.0 * htx * ht + hx * htt) * ih2 + 2.0 * hx * ht * ht * ih3;
  return f;
}

// f_hat(x_i, z_q) = f(x_i, h(x_i) z_q); result is (n_x, n_z).
inline Eigen::MatrixXd pullback(const std::function<double(double, double)>& f, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& h, const Eigen::VectorXd& z,
                                double h_floor = kDefaultHeightFloor) {
  Eigen::MatrixXd out(x.size(), z.size());
  for (int i = 0; i < x.size(); ++i) {
    require_height(h[i], h_floor);
    for (int q = 0; q < z.size(); ++q) out(i, q) = f(x[i], h[i] * z[q]);
  }
  return out;
}

// Physical-domain view of reference samples. Within column i the value at
// height y is the barycentric interpolant through (z_q, f_hat(i, q))
// evaluated at y / h_i, so the round trip error is the polynomial
// interpolation error of the column on the z-nodes.
class PushforwardField {
 public:
  PushforwardField(Eigen::MatrixXd values, Eigen::VectorXd h, Eigen::VectorXd z)
      : values_(std::move(values)), h_(std::move(h)), z_(std::move(z)), w_(barycentric_weights(z_)) {}

  double operator()(int column, double y) const {
    return barycentric_interpolate(z_, w_, values_.row(column).transpose(), y / h_[column]);
  }
  double height(int column) const { return h_[column]; }
  int columns() const { return static_cast<int>(h_.size()); }

 private:
  Eigen::MatrixXd values_;
  Eigen::VectorXd h_, z_, w_;
};

inline PushforwardField pushforward(const Eigen::MatrixXd& f_hat, const Eigen::VectorXd& h,
                                    const Eigen::VectorXd& z, double h_floor = kDefaultHeightFloor) {
  for (int i = 0; i < h.size(); ++i) require_height(h[i], h_floor);
  return PushforwardField(f_hat, h, z);
}

// Earliest time at which contact can occur for data with min height delta and
// energy constant c0.
inline double contact_bound(double delta, double c0) {
  if (!(delta > 0.0) || !(c0 > 0.0))
    throw Error(ErrorKind::NonPositiveInput, "contact_bound needs delta > 0 and C0 > 0");
  return std::pow(delta / std::sqrt(c0), 1.5);
}

// heights(n, i) = h(times[n], x_i) on an equispaced periodic grid of the given length.
inline double hoelder_check(const Eigen::VectorXd& times, const Eigen::MatrixXd& heights, double length,
                            double c0, double r) {
  const int nt = static_cast<int>(times.size());
  const int nx = static_cast<int>(heights.cols());
  const double t_window = std::pow(r, 1.5);
  const double scale = 3.0 * std::sqrt(c0) * r;
  double worst = 0.0;
  for (int a = 0; a < nt; ++a)
    for (int b = a + 1; b < nt; ++b) {
      const double dt = times[b] - times[a];
      if (dt <= 0.0) continue;
      if (dt > t_window) break;
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j) {
          double dist = std::abs(i - j) * length / nx;
          dist = std::min(dist, length - dist);
          if (dist >= 0.5 * r) continue;
          worst = std::max(worst, std::abs(heights(a, i) - heights(b, j)) / scale);
        }
    }
  return worst;
}

}  // namespace fsi_beam
