#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <fsi_beam/geometry.hpp>
#include <fsi_beam/verify.hpp>

using namespace fsi_beam;

TEST(Transform, ReferenceConfigurationIsIdentity) {
  const TransformMatrices m = transform_matrices({1.0, 0.0, 0.0, 0.0, 0.0, 0.37});
  EXPECT_EQ(m.A, Mat2::Identity());
  EXPECT_EQ(m.B, Mat2::Identity());
  EXPECT_EQ(m.chi_dt, Vec2::Zero());
}

TEST(Transform, UniformStretch) {
  const TransformMatrices m = transform_matrices({2.0, 0.0, 0.0, 0.0, 0.0, 0.5});
  Mat2 a, b;
  a << 2.0, 0.0, 0.0, 0.5;
  b << 2.0, 0.0, 0.0, 1.0;
  EXPECT_EQ(m.A, a);
  EXPECT_EQ(m.B, b);
}

TEST(Transform, ShearedColumn) {
  const TransformMatrices m = transform_matrices({1.0, 1.0, 0.0, 0.0, 0.0, 1.0});
  Mat2 a, b;
  a << 1.0, -1.0, -1.0, 2.0;
  b << 1.0, -1.0, 0.0, 1.0;
  EXPECT_EQ(m.B, b);
  EXPECT_EQ(m.A, a);
  EXPECT_EQ(m.B.transpose() * m.B, a);
}

TEST(Transform, RandomIdentities) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uh(0.2, 3.0), u(-2.0, 2.0), uz(0.0, 1.0);
  for (int n = 0; n < 2000; ++n) {
    const GeometrySample s{uh(rng), u(rng), u(rng), u(rng), u(rng), uz(rng)};
    const TransformMatrices m = transform_matrices(s);
    EXPECT_NEAR(m.B.determinant(), s.h, 1e-14 * s.h);
    EXPECT_LT((m.A - m.B.transpose() * m.B / s.h).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((m.B_invT - m.B.inverse().transpose()).cwiseAbs().maxCoeff(), 1e-13);
    // dt A from the product rule
    const Mat2 dA = (m.dtB.transpose() * m.B + m.B.transpose() * m.dtB) / s.h -
                    s.dt_h * m.B.transpose() * m.B / (s.h * s.h);
    EXPECT_LT((m.dtA - dA).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Transform, RejectsNonPositiveHeight) {
  try {
    transform_matrices({0.0, 0.0, 0.0, 0.0, 0.0, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveHeight);
  }
  EXPECT_THROW(transform_matrices({1e-7, 0.0, 0.0, 0.0, 0.0, 0.5}), Error);
  EXPECT_NO_THROW(transform_matrices({1e-7, 0.0, 0.0, 0.0, 0.0, 0.5}, 1e-8));
}

TEST(CorrectionField, Examples) {
  EXPECT_EQ(correction_field({0.3, -0.7}, {1.4, 0.3, 0.0, 0.0, 0.0, 0.6}), Vec2::Zero());
  EXPECT_EQ(correction_field({0.0, 0.9}, {1.4, 0.3, 0.0, 0.7, -0.2, 1.0}), Vec2::Zero());
  const Vec2 g = correction_field({3.0, 0.0}, {2.0, 0.0, 0.0, 1.0, 0.0, 0.5});
  EXPECT_DOUBLE_EQ(g[0], 1.5);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
}

TEST(CorrectionField, RestoresSolenoidalityOfTimeDerivative) {
  // B^{-T} dt B^T u = G, so B^T G = dt B^T u
  const GeometrySample s{1.3, 0.4, 0.1, -0.6, 0.8, 0.7};
  const Vec2 u{0.9, -0.4};
  const TransformMatrices m = transform_matrices(s);
  EXPECT_LT((m.B.transpose() * correction_field(u, s) - m.dtB.transpose() * u).norm(), 1e-15);
}

TEST(PressureTestField, VanishesForStationaryGeometryAndAtTheBeam) {
  EXPECT_EQ(pressure_test_field({0.4, 0.2}, {-0.3, 1.0}, {1.2, 0.5, 0.0, 0.0, 0.0, 0.4}), Vec2::Zero());
  EXPECT_EQ(pressure_test_field({0.0, 0.2}, {0.0, 1.0}, {1.2, 0.5, 0.0, 0.3, 0.2, 1.0}), Vec2::Zero());
}

TEST(PressureTestField, EqualsMappedFrameDerivativeApplied) {
  // phi = B^{-T} dt B^T (dt u + G)
  const GeometrySample s{0.8, -0.5, 0.0, 0.4, 1.1, 0.3};
  const Vec2 u{0.7, 0.1}, du{-0.2, 0.6};
  const TransformMatrices m = transform_matrices(s);
  const Vec2 expected = m.B_invT * m.dtB.transpose() * (du + correction_field(u, s));
  EXPECT_LT((pressure_test_field(u, du, s) - expected).norm(), 1e-14);
}

TEST(FrameScalars, MatchClosedForms) {
  const double h = 1.3, hx = 0.2, hxx = -0.7, ht = 0.5, htx = 0.1, htxx = 0.3, htt = -0.2, httx = 0.4;
  const FrameScalars f = frame_scalars(h, hx, hxx, ht, htx, htxx, htt, httx);
  EXPECT_DOUBLE_EQ(f.r, 1.0 / h);
  EXPECT_DOUBLE_EQ(f.q, hx / h);
  EXPECT_NEAR(f.rx, -hx / (h * h), 1e-15);
  EXPECT_NEAR(f.rt, -ht / (h * h), 1e-15);
  EXPECT_NEAR(f.qx, hxx / h - hx * hx / (h * h), 1e-15);
  EXPECT_NEAR(f.qt, htx / h - hx * ht / (h * h), 1e-15);
  EXPECT_NEAR(f.rtt, 2 * ht * ht / (h * h * h) - htt / (h * h), 1e-15);
}

TEST(PullbackPushforward, RoundTripIsExactForPolynomialColumns) {
  const int nx = 8;
  const GaussRule r = gauss_legendre(6);
  Eigen::VectorXd x(nx), h(nx);
  for (int i = 0; i < nx; ++i) {
    x[i] = static_cast<double>(i) / nx;
    h[i] = 1.0 + 0.3 * std::sin(2 * std::numbers::pi * x[i]);
  }
  auto f = [](double xx, double y) { return std::cos(xx) * (y * y * y - 2 * y + 0.5); };
  const Eigen::MatrixXd fh = pullback(f, x, h, r.nodes);
  const PushforwardField back = pushforward(fh, h, r.nodes);
  for (int i = 0; i < nx; ++i)
    for (double y : {0.0, 0.21 * h[i], 0.77 * h[i], h[i]}) EXPECT_NEAR(back(i, y), f(x[i], y), 1e-12);
  Eigen::VectorXd bad = h;
  bad[3] = -0.1;
  EXPECT_THROW(pullback(f, x, bad, r.nodes), Error);
}

TEST(ContactBound, FormulaAndMonotonicity) {
  EXPECT_DOUBLE_EQ(contact_bound(1.0, 1.0), 1.0);
  EXPECT_NEAR(contact_bound(0.5, 4.0), std::pow(0.25, 1.5), 1e-15);
  double prev = contact_bound(1.0, 2.0);
  for (double d : {0.5, 0.1, 0.01, 1e-4}) {
    const double b = contact_bound(d, 2.0);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_THROW(contact_bound(0.0, 1.0), Error);
  EXPECT_THROW(contact_bound(1.0, -1.0), Error);
}

TEST(Hoelder, StaticHeightGivesZero) {
  Eigen::VectorXd t(5);
  t << 0.0, 0.01, 0.02, 0.03, 0.04;
  const Eigen::MatrixXd heights = Eigen::MatrixXd::Ones(5, 16);
  EXPECT_EQ(hoelder_check(t, heights, 1.0, 1.0, 0.2), 0.0);
}

TEST(VerifySuites, GeometryAndCorrectionField) {
  const auto g = verify::geometry_suite(2000);
  for (const auto& c : g.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.value;
  const auto l = verify::correction_suite(5);
  for (const auto& c : l.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.value;
}
