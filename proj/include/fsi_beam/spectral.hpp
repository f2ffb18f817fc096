#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace fsi_beam {

// Periodic spectral derivative of equispaced samples on [0, L).
inline Eigen::VectorXd fourier_derivative(const Eigen::VectorXd& f, double length, int order = 1) {
  const int n = static_cast<int>(f.size());
  Eigen::FFT<double> fft;
  std::vector<double> in(f.data(), f.data() + n);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  for (int k = 0; k < n; ++k) {
    const int wave = k <= n / 2 ? k : k - n;
    if (n % 2 == 0 && k == n / 2 && order % 2 == 1) {
      spec[k] = 0.0;
      continue;
    }
    const std::complex<double> ik(0.0, 2.0 * std::numbers::pi * wave / length);
    spec[k] *= std::pow(ik, order);
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Eigen::VectorXd>(out.data(), n);
}

// Barycentric weights for arbitrary distinct nodes (rescaled to avoid underflow).
inline Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& nodes) {
  const int n = static_cast<int>(nodes.size());
  const double span = nodes.maxCoeff() - nodes.minCoeff();
  const double scale = span > 0 ? 4.0 / span : 1.0;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) w[j] /= scale * (nodes[j] - nodes[k]);
  return w;
}

inline double barycentric_interpolate(const Eigen::VectorXd& nodes, const Eigen::VectorXd& weights,
                                      const Eigen::VectorXd& values, double t) {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < nodes.size(); ++j) {
    const double d = t - nodes[j];
    if (d == 0.0) return values[j];
    const double c = weights[j] / d;
    num += c * values[j];
    den += c;
  }
  return num / den;
}

// Collocation differentiation matrix on the given nodes.
inline Eigen::MatrixXd differentiation_matrix(const Eigen::VectorXd& nodes) {
  const int n = static_cast<int>(nodes.size());
  const Eigen::VectorXd w = barycentric_weights(nodes);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (w[j] / w[i]) / (nodes[i] - nodes[j]);
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D;
}

}  // namespace fsi_beam
