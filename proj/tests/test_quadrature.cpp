#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <fsi_beam/quadrature.hpp>
#include <fsi_beam/spectral.hpp>

using namespace fsi_beam;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {1, 2, 5, 12, 40}) {
    const GaussRule r = gauss_legendre(n);
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-14);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int q = 0; q < n; ++q) s += r.weights[q] * std::pow(r.nodes[q], deg);
      EXPECT_NEAR(s, 1.0 / (deg + 1), 1e-14) << "n=" << n << " degree " << deg;
    }
  }
}

TEST(GaussLegendre, NodesAscendInsideUnitInterval) {
  const GaussRule r = gauss_legendre(17);
  EXPECT_GT(r.nodes[0], 0.0);
  EXPECT_LT(r.nodes[16], 1.0);
  for (int q = 1; q < 17; ++q) EXPECT_LT(r.nodes[q - 1], r.nodes[q]);
  EXPECT_DOUBLE_EQ(r.nodes[8], 0.5);
}

TEST(Quadrature, PeriodicRuleIsExactForTrigPolynomials) {
  const QuadratureGrid g = build_quadrature(2.0, 16, 4);
  for (int k = 0; k < 8; ++k) {
    double c = 0.0;
    for (int i = 0; i < g.nx(); ++i) c += g.wx[i] * std::cos(std::numbers::pi * k * g.x[i]) *
                                         std::cos(std::numbers::pi * k * g.x[i]);
    EXPECT_NEAR(c, k == 0 ? 2.0 : 1.0, 1e-13);
  }
  EXPECT_NEAR(g.weight.sum(), 2.0, 1e-14);
  EXPECT_EQ(g.index(3, 2), 3 * 4 + 2);
  EXPECT_EQ(g.node_x[g.index(3, 2)], g.x[3]);
  EXPECT_EQ(g.node_z[g.index(3, 2)], g.z[2]);
}

TEST(Quadrature, RejectsInvalidResolution) {
  EXPECT_THROW(build_quadrature(1.0, 7, 4), Error);
  EXPECT_THROW(build_quadrature(1.0, 2, 4), Error);
  EXPECT_THROW(build_quadrature(1.0, 8, 1), Error);
  EXPECT_THROW(build_quadrature(-1.0, 8, 4), Error);
  try {
    build_quadrature(1.0, 8, 8, 4, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidResolution);
  }
}

TEST(Spectral, FourierDerivativeOfTrigIsExact) {
  const int n = 32;
  Eigen::VectorXd f(n), d1(n), d2(n);
  for (int i = 0; i < n; ++i) {
    const double x = 3.0 * i / n, k = 2.0 * std::numbers::pi / 3.0;
    f[i] = std::sin(2 * k * x) + 0.5 * std::cos(5 * k * x);
    d1[i] = 2 * k * std::cos(2 * k * x) - 2.5 * k * std::sin(5 * k * x);
    d2[i] = -4 * k * k * std::sin(2 * k * x) - 12.5 * k * k * std::cos(5 * k * x);
  }
  EXPECT_LT((fourier_derivative(f, 3.0, 1) - d1).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((fourier_derivative(f, 3.0, 2) - d2).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Spectral, DifferentiationMatrixIsExactForPolynomials) {
  const GaussRule r = gauss_legendre(10);
  const Eigen::MatrixXd D = differentiation_matrix(r.nodes);
  Eigen::VectorXd p(10), dp(10);
  for (int q = 0; q < 10; ++q) {
    const double z = r.nodes[q];
    p[q] = std::pow(z, 9) - 3 * z * z;
    dp[q] = 9 * std::pow(z, 8) - 6 * z;
  }
  EXPECT_LT((D * p - dp).cwiseAbs().maxCoeff(), 1e-10);
  const Eigen::VectorXd w = barycentric_weights(r.nodes);
  EXPECT_NEAR(barycentric_interpolate(r.nodes, w, p, 0.3), std::pow(0.3, 9) - 0.27, 1e-13);
}
