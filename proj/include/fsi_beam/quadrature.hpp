#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "errors.hpp"

namespace fsi_beam {

// Gauss-Legendre rule mapped to [0, 1]. Nodes ascend.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

namespace detail {
// Returns (P_n(x), P_n'(x)) by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}
}  // namespace detail

inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidResolution, "Gauss-Legendre order must be >= 1");
  GaussRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre_with_derivative(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre_with_derivative(n, x).second;
    const double w = 0.5 * 2.0 / ((1.0 - x * x) * dp * dp);
    // x decreases with i; store ascending on [0,1]
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.5;
  return rule;
}

// Tensor grid on [0,L) x [0,1]; node p = i * nz + q pairs x-node i with z-node q.
struct QuadratureGrid {
  double length = 1.0;
  Eigen::VectorXd x, wx;
  Eigen::VectorXd z, wz;
  Eigen::VectorXd node_x, node_z, weight;

  int nx() const { return static_cast<int>(x.size()); }
  int nz() const { return static_cast<int>(z.size()); }
  int nodes() const { return nx() * nz(); }
  int index(int i, int q) const { return i * nz() + q; }
};

inline QuadratureGrid build_quadrature(double length, int n_x, int n_z) {
  if (!(length > 0.0)) throw Error(ErrorKind::InvalidResolution, "period length must be positive");
  if (n_x < 4 || n_x % 2 != 0)
    throw Error(ErrorKind::InvalidResolution, "n_x must be even and >= 4, got " + std::to_string(n_x));
  if (n_z < 2) throw Error(ErrorKind::InvalidResolution, "n_z must be >= 2, got " + std::to_string(n_z));

  QuadratureGrid g;
  g.length = length;
  g.x.resize(n_x);
  g.wx.setConstant(n_x, length / n_x);
  for (int i = 0; i < n_x; ++i) g.x[i] = length * i / n_x;
  auto rule = gauss_legendre(n_z);
  g.z = std::move(rule.nodes);
  g.wz = std::move(rule.weights);

  const int n = n_x * n_z;
  g.node_x.resize(n);
  g.node_z.resize(n);
  g.weight.resize(n);
  for (int i = 0; i < n_x; ++i)
    for (int q = 0; q < n_z; ++q) {
      const int p = g.index(i, q);
      g.node_x[p] = g.x[i];
      g.node_z[p] = g.z[q];
      g.weight[p] = g.wx[i] * g.wz[q];
    }
  return g;
}

// Checked variant enforcing the resolution needed for the given basis content.
inline QuadratureGrid build_quadrature(double length, int n_x, int n_z, int max_wavenumber,
                                       int max_z_degree) {
  if (n_x < 4 * max_wavenumber)
    throw Error(ErrorKind::InvalidResolution,
                "n_x=" + std::to_string(n_x) + " below 4 x max wavenumber " + std::to_string(max_wavenumber));
  if (n_z < 2 * max_z_degree + 2)
    throw Error(ErrorKind::InvalidResolution,
                "n_z=" + std::to_string(n_z) + " below 2 x max z-degree + 2 for degree " +
                    std::to_string(max_z_degree));
  return build_quadrature(length, n_x, n_z);
}

template <class F>
double integrate(const QuadratureGrid& g, F&& f) {
  double s = 0.0;
  for (int p = 0; p < g.nodes(); ++p) s += g.weight[p] * f(g.node_x[p], g.node_z[p]);
  return s;
}

}  // namespace fsi_beam
