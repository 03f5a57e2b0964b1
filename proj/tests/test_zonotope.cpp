#include <gtest/gtest.h>

#include <random>

#include "centroid/zonotope.hpp"
#include "test_helpers.hpp"

using namespace centroid;
using testing_support::random_step;

namespace {

double brute_support(const Matrix& g, const Vector& u) {
  const auto N = g.rows();
  double best = -1e300;
  for (long mask = 0; mask < (1L << N); ++mask) {
    Vector z = Vector::Zero(g.cols());
    for (Eigen::Index k = 0; k < N; ++k)
      if (mask & (1L << k)) z += g.row(k).transpose();
    best = std::max(best, z.dot(u));
  }
  return best;
}

}  // namespace

TEST(Support, SingleGenerator) {
  ZonotopeModel z(StepFunction::scalar({0.0, 1.0}, {3.0}));
  EXPECT_EQ(z.support(Vector::Constant(1, 1.0)), 3.0);
  EXPECT_EQ(z.support(Vector::Constant(1, -1.0)), 0.0);
}

TEST(Support, MixedSignInterval) {
  // generators 3 and -2, so Z = [-2, 3]
  ZonotopeModel z(StepFunction::scalar({0.0, 0.5, 1.0}, {6.0, -4.0}));
  EXPECT_EQ(z.support(Vector::Constant(1, 1.0)), 3.0);
  EXPECT_EQ(z.support(Vector::Constant(1, -1.0)), 2.0);
}

TEST(Support, MatchesVertexEnumeration) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    Matrix gens(12, m);
    for (Eigen::Index r = 0; r < gens.rows(); ++r)
      for (Eigen::Index c = 0; c < m; ++c) gens(r, c) = g(rng);
    ZonotopeModel z(gens);
    Vector u(m);
    for (Eigen::Index c = 0; c < m; ++c) u[c] = g(rng);
    EXPECT_NEAR(z.support(u), brute_support(gens, u), 1e-12);
    EXPECT_NEAR(z.support(u) + z.support(-u), (gens * u).cwiseAbs().sum(), 1e-12);
  }
}

TEST(Support, ZeroDirectionRejected) {
  ZonotopeModel z(StepFunction::scalar({0.0, 1.0}, {3.0}));
  EXPECT_THROW(z.support(Vector::Zero(1)), Error);
}

TEST(Membership, WhitePointHalfAndVertex) {
  std::mt19937_64 rng(22);
  for (Eigen::Index m = 1; m <= 3; ++m) {
    const auto w = random_step(rng, 8, m);
    ZonotopeModel z(w);
    EXPECT_TRUE(z.contains_interior(ResponseVector(0.5 * z.white_point())));
    EXPECT_FALSE(z.contains_interior(ResponseVector(z.white_point())));
    EXPECT_FALSE(z.contains_interior(ResponseVector(Vector::Zero(m))));
    EXPECT_LT((z.generators().colwise().sum().transpose() - z.white_point()).norm(), 1e-15);
  }
}

TEST(Membership, UnitSquare) {
  Matrix g(2, 2);
  g << 1, 0, 0, 1;
  ZonotopeModel z(g);
  Vector a(2), b(2);
  a << 0.5, 1.0;
  b << 0.5, 0.999;
  EXPECT_FALSE(z.contains_interior(ResponseVector(a)));
  EXPECT_TRUE(z.contains_interior(ResponseVector(b)));
}

TEST(Membership, CentralSymmetryAndSegments) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (Eigen::Index m = 1; m <= 3; ++m) {
    const auto w = random_step(rng, 10, m);
    ZonotopeModel z(w);
    const Vector c = 0.5 * z.white_point();
    for (int trial = 0; trial < 50; ++trial) {
      Vector y(m);
      for (Eigen::Index i = 0; i < m; ++i) y[i] = u(rng) * z.white_point()[i];
      const bool inside = z.contains_interior(ResponseVector(y));
      EXPECT_EQ(inside, z.contains_interior(z.involute(ResponseVector(y))));
      if (!inside) continue;
      for (double lam : {0.0, 0.3, 0.7, 0.99})
        EXPECT_TRUE(z.contains_interior(ResponseVector(c + lam * (y - c))));
    }
  }
}

TEST(Membership, UnsupportedDimension) {
  ZonotopeModel z(Matrix::Identity(4, 4));
  try {
    z.contains_interior(ResponseVector(Vector::Constant(4, 0.5)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedDimension);
  }
}

TEST(Involution, Properties) {
  std::mt19937_64 rng(24);
  const auto w = random_step(rng, 6, 3);
  ZonotopeModel z(w);
  const ResponseVector half(0.5 * z.white_point());
  EXPECT_LT((z.involute(half).components - half.components).norm(), 1e-15);
  EXPECT_EQ(z.involute(ResponseVector(Vector::Zero(3))).components, z.white_point());
  const ResponseVector y(Vector::Random(3));
  EXPECT_LT((z.involute(z.involute(y)).components - y.components).norm(), 1e-15);
}
