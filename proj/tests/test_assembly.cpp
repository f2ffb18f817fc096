#include <random>

#include <gtest/gtest.h>

#include <fsi_beam/assembly.hpp>
#include <fsi_beam/verify.hpp>

using namespace fsi_beam;

namespace {

struct Fixture {
  BasisSet set;
  BasisTables tables;
};

Fixture make(int pairs) {
  Fixture f{build_basis_set(1.0, pairs), {}};
  const Resolution r = auto_resolution(f.set);
  f.tables = tabulate(f.set, build_quadrature(1.0, r.n_x, r.n_z));
  return f;
}

const Physics kPhysics{1.0, 1.3, 2.0, 0.7, 1.1, 0.05};

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * u(rng);
  return v;
}

}  // namespace

TEST(Assembly, FlatGeometryReducesToGrams) {
  const Fixture fx = make(8);
  const int n = fx.set.size(), nb = fx.set.beam_size();
  GeometryState flat{1.0, Eigen::VectorXd::Zero(nb), Eigen::VectorXd::Zero(nb), {}};
  const GalerkinOperators ops = assemble_first_order(fx.tables, flat, kPhysics, {false, false});
  EXPECT_EQ(ops.F_geo.cwiseAbs().maxCoeff(), 0.0);

  const Eigen::MatrixXd solid = ops.M - kPhysics.rho_f * gram_l2(fx.tables);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const bool beam_diag = j == k && BasisSet::is_lifted(j);
      EXPECT_NEAR(solid(j, k), beam_diag ? kPhysics.rho_s : 0.0, 1e-12) << j << "," << k;
    }
}

TEST(Assembly, MassAndViscositySymmetricDefinite) {
  std::mt19937_64 rng(11);
  const Fixture fx = make(10);
  const int nb = fx.set.beam_size();
  GeometryState g{1.2, random_vector(rng, nb, 0.05), random_vector(rng, nb, 0.3), {}};
  const GalerkinOperators ops = assemble_first_order(fx.tables, g, kPhysics, {false, false});
  EXPECT_LT((ops.M - ops.M.transpose()).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((ops.S - ops.S.transpose()).cwiseAbs().maxCoeff(), 1e-12 * ops.S.cwiseAbs().maxCoeff());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ops.M).eigenvalues().minCoeff(), 0.0);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ops.S).eigenvalues().minCoeff(), 0.0);
  const Eigen::MatrixXd K = ops.K_beam;
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff(), -1e-12);
}

TEST(Assembly, AgreesWithDirectQuadrature) {
  const auto r = verify::assembly_suite({2, 4});
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.value;
}

TEST(Assembly, ConvectionIsSkew) {
  std::mt19937_64 rng(5);
  const Fixture fx = make(8);
  const int n = fx.set.size(), nb = fx.set.beam_size();
  const Eigen::VectorXd a = random_vector(rng, n, 0.5);
  GeometryState g{1.1, random_vector(rng, nb, 0.05), beam_part(a), {}};
  const Frame f = make_frame(fx.tables, g);
  const Eigen::MatrixXd C = convection_matrix(fx.tables, f, kPhysics, a);
  EXPECT_LT((C + C.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(std::abs(a.dot(C * a)), 1e-14);

  // the tensor slices reproduce the matrix for the same advecting field
  const Tensor3 T = convection_tensor(fx.tables, f, kPhysics);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l < n; ++l) sum += a[l] * T[l];
  EXPECT_LT((sum - C).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Assembly, GeometryTermCarriesTheMassRate) {
  // alpha^T F_geo alpha = 1/2 alpha^T (dM/dt) alpha when the beam moves with the fluid
  std::mt19937_64 rng(7);
  const Fixture fx = make(8);
  const int n = fx.set.size(), nb = fx.set.beam_size();
  const Eigen::VectorXd a = random_vector(rng, n, 0.5);
  const Eigen::VectorXd c = random_vector(rng, nb, 0.05), rate = beam_part(a);
  auto mass = [&](double s) {
    GeometryState g{1.1, c + s * rate, rate, {}};
    return assemble_first_order(fx.tables, g, kPhysics, {false, false}).M;
  };
  const GalerkinOperators ops = assemble_first_order(fx.tables, {1.1, c, rate, {}}, kPhysics, {false, false});
  const double h = 1e-4;
  const Eigen::MatrixXd dM = (mass(-2 * h) - 8 * mass(-h) + 8 * mass(h) - mass(2 * h)) / (12 * h);
  const double lhs = a.dot(ops.F_geo * a), rhs = 0.5 * a.dot(dM * a);
  EXPECT_NEAR(lhs, rhs, 1e-8 * (1.0 + std::abs(rhs)));
}

TEST(Assembly, DifferentiatedSystemMatchesFiniteDifferences) {
  // time derivative of the first-order residual along a smooth trajectory
  std::mt19937_64 rng(5);
  const int n = 8;
  const Fixture fx = make(n);
  const int nb = fx.set.beam_size();
  const Eigen::VectorXd a0 = random_vector(rng, n, 0.3), a1 = random_vector(rng, n, 0.5),
                        a2 = random_vector(rng, n, 0.7), c0 = random_vector(rng, nb, 0.05);
  auto residual = [&](double s) {
    const Eigen::VectorXd al = a0 + a1 * s + a2 * s * s / 2, dal = a1 + a2 * s;
    const Eigen::VectorXd c = c0 + beam_part(a0 * s + a1 * s * s / 2 + a2 * s * s * s / 6);
    const GeometryState g{1.1, c, beam_part(al), {}};
    const GalerkinOperators ops = assemble_first_order(fx.tables, g, kPhysics, {false, false});
    const Eigen::MatrixXd Cv = convection_matrix(fx.tables, make_frame(fx.tables, g), kPhysics, al);
    return (ops.M * dal + (ops.S + ops.F_geo + Cv) * al + ops.K_beam * embed_beam(c, n)).eval();
  };
  const double h = 1e-3;
  const Eigen::VectorXd fd = (-residual(2 * h) + 8 * residual(h) - 8 * residual(-h) + residual(-2 * h)) / (12 * h);

  const GeometryState g{1.1, c0, beam_part(a0), beam_part(a1)};
  const Frame f = make_frame(fx.tables, g);
  const DifferentiatedTensors T = assemble_differentiated_tensors(fx.tables, f, kPhysics);
  const Eigen::VectorXd tensor = differentiated_residual_vector(T, a0, a1, a2);
  const Eigen::VectorXd fields = differentiated_residual_fields(fx.tables, f, kPhysics, a0, a1, a2);
  EXPECT_LT((tensor - fd).norm(), 1e-7 * fd.norm());
  EXPECT_LT((fields - tensor).norm(), 1e-12 * fd.norm());
}

TEST(Assembly, RejectsCollapsedGeometry) {
  const Fixture fx = make(4);
  const int nb = fx.set.beam_size();
  GeometryState g{0.05, Eigen::VectorXd::Zero(nb), Eigen::VectorXd::Zero(nb), {}};
  try {
    make_frame(fx.tables, g, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveHeight);
  }
}
