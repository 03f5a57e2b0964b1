#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "centroid/oracle.hpp"
#include "test_helpers.hpp"

using namespace centroid;
using testing_support::random_interior_response;
using testing_support::random_step;

namespace {

StepFunction unit() { return StepFunction::scalar({0.0, 1.0}, {1.0}); }
StepFunction two_step() { return StepFunction::scalar({0.0, 0.5, 1.0}, {2.0, 1.0}); }
ResponseVector scalar_y(double y) { return ResponseVector(Vector::Constant(1, y)); }

}  // namespace

TEST(Rng, DeterministicAndSeedSensitive) {
  Xoshiro256 a(7), b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  EXPECT_NE(Xoshiro256(7)(), Xoshiro256(8)());
  Xoshiro256 u(3);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NE(chain_seed(5, 0), chain_seed(5, 1));
}

TEST(InteriorStart, UnitResponsivityHalf) {
  const auto x = interior_start(reduce(unit(), 9), scalar_y(0.5));
  EXPECT_LT((x.array() - 0.5).abs().maxCoeff(), 1e-15);
}

TEST(InteriorStart, AlignedHalfWhitePoint) {
  const auto w = two_step();
  const auto x = interior_start(reduce(w, 8), ResponseVector(0.5 * w.integral()));
  EXPECT_LT((x.array() - 0.5).abs().maxCoeff(), 1e-15);
}

TEST(InteriorStart, RandomCasesAreFeasible) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    const auto w = random_step(rng, 6, m);
    const auto red = reduce(w, 30);
    const Vector y = random_interior_response(rng, w);
    const Vector x = interior_start(red, ResponseVector(y));
    EXPECT_LE((red.W * x - y).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_GT(x.minCoeff(), 0.0);
    EXPECT_LT(x.maxCoeff(), 1.0);
  }
}

TEST(HitAndRun, SymmetricThreeCells) {
  const auto red = reduce(unit(), 3);
  const ResponseVector y = scalar_y(0.5);  // x₁ + x₂ + x₃ = 1.5
  HitAndRunOptions opt;
  opt.sample_count = 20000;
  opt.seed = 3;
  const auto st = hit_and_run(red, y, interior_start(red, y), opt);
  for (Eigen::Index j = 0; j < 3; ++j)
    EXPECT_LT(std::fabs(st.empirical_centroid[j] - 0.5), 3.0 * st.standard_errors[j]) << j;
  EXPECT_LE(st.constraint_violation_max, 1e-9);
  EXPECT_EQ(st.burn_in, 30u);
  EXPECT_EQ(st.thinning, 3u);
}

TEST(HitAndRun, ReversibilitySmoke) {
  const auto w = two_step();
  const auto red = reduce(w, 8);
  const ResponseVector y(0.5 * w.integral());
  HitAndRunOptions opt;
  opt.sample_count = 100000;
  opt.seed = 11;
  const auto st = hit_and_run(red, y, interior_start(red, y), opt);
  for (Eigen::Index j = 0; j < 8; ++j)
    EXPECT_LT(std::fabs(st.empirical_centroid[j] - 0.5), 3.0 * st.standard_errors[j]) << j;
}

TEST(HitAndRun, DeterministicAcrossThreadCounts) {
  const auto red = reduce(two_step(), 12);
  const auto y = scalar_y(1.0);
  const Vector x0 = interior_start(red, y);
  HitAndRunOptions opt;
  opt.sample_count = 4000;
  opt.seed = 99;
  opt.chains = 4;
  opt.threads = 1;
  const auto a = hit_and_run(red, y, x0, opt);
  opt.threads = 4;
  const auto b = hit_and_run(red, y, x0, opt);
  const auto c = hit_and_run(red, y, x0, opt);
  EXPECT_EQ(a.empirical_centroid, b.empirical_centroid);
  EXPECT_EQ(a.standard_errors, b.standard_errors);
  EXPECT_EQ(b.empirical_centroid, c.empirical_centroid);
  opt.seed = 100;
  EXPECT_NE(hit_and_run(red, y, x0, opt).empirical_centroid, a.empirical_centroid);
}

TEST(HitAndRun, Preconditions) {
  const auto red = reduce(unit(), 1);
  EXPECT_THROW(hit_and_run(red, scalar_y(0.5), Vector::Constant(1, 0.5), {}), Error);
  const auto red3 = reduce(unit(), 3);
  EXPECT_THROW(hit_and_run(red3, scalar_y(0.5), Vector::Constant(3, 0.2), {}), Error);
  EXPECT_THROW(hit_and_run(red3, scalar_y(0.5), Vector::Constant(2, 0.5), {}), Error);
}

TEST(IrwinHall, Examples) {
  EXPECT_NEAR(irwin_hall_density(2, 1.0).value, 1.0, 1e-15);
  EXPECT_NEAR(irwin_hall_density(3, 1.5).value, 0.75, 1e-15);
  for (double x : {0.1, 0.5, 0.9}) EXPECT_EQ(irwin_hall_density(1, x).value, 1.0);
  const auto out = irwin_hall_density(4, 4.5);
  EXPECT_FALSE(out.in_range);
  EXPECT_EQ(out.value, 0.0);
  EXPECT_FALSE(irwin_hall_density(4, -0.1).in_range);
}

TEST(IrwinHall, ReferenceValues) {
  // exact rational evaluation in mpmath (tests/oracles/derive_values.py)
  EXPECT_NEAR(irwin_hall_density(5, 1.3).value, 0.11731666666666666667, 1e-12);
  EXPECT_NEAR(irwin_hall_density(10, 3.7).value, 0.16269118428883377425, 1e-12);
  EXPECT_NEAR(irwin_hall_density(20, 10.0).value, 0.30669310173798242453, 1e-12);
  EXPECT_NEAR(irwin_hall_density(30, 15.0).value, 0.25104851499056563913, 1e-12);
  EXPECT_NEAR(irwin_hall_density(30, 4.25).value, 1.8674951078941901574e-13, 1e-12);
}

TEST(IrwinHall, IntegratesToOne) {
  for (std::size_t n = 1; n <= 10; ++n) {
    const int N = 10000;  // composite Simpson per unit interval: the density is a polynomial on each
    const int per = N / int(n) - (N / int(n)) % 2;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double h = 1.0 / per;
      double acc = 0.0;
      for (int i = 0; i <= per; ++i) {
        const double x = double(k) + i * h;
        const double f = irwin_hall_density(n, std::min(x, double(n))).value;
        acc += (i == 0 || i == per ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
      }
      total += acc * h / 3.0;
    }
    EXPECT_NEAR(total, 1.0, 1e-8) << n;
  }
}

TEST(IrwinHall, CenterScaledTowardsLimit) {
  // n = 2 is the unit-square diagonal √2, above the limit; from n = 4 the values rise monotonically
  const double limit = std::sqrt(6.0 / std::numbers::pi);
  EXPECT_NEAR(std::sqrt(2.0) * irwin_hall_density(2, 1.0).value, std::sqrt(2.0), 1e-15);
  double prev = 0.0;
  for (std::size_t n = 4; n <= 50; n += 2) {
    const double v = std::sqrt(double(n)) * irwin_hall_density(n, n / 2.0).value;
    EXPECT_GT(v, prev) << n;
    EXPECT_LT(v, limit) << n;
    prev = v;
  }
  EXPECT_NEAR(std::sqrt(50.0) * irwin_hall_density(50, 25.0).value, 1.3778243480469432833, 1e-8);
}

TEST(UniformSum, EqualWidthsReduceToIrwinHall) {
  for (double c : {1.0, 0.25, 3.0}) {
    std::vector<std::pair<double, std::size_t>> groups{{c, 6}};
    for (double x : {0.3, 1.1, 2.5}) {
      const double xs = x * c;
      EXPECT_NEAR(uniform_sum_density(groups, xs), irwin_hall_density(6, x).value / c, 1e-12 / c);
    }
  }
}

TEST(UniformSum, TwoWidthsConvolution) {
  // U[0,1] + U[0,2]: trapezoid with plateau 1/2 on [1,2]
  std::vector<std::pair<double, std::size_t>> groups{{1.0, 1}, {2.0, 1}};
  EXPECT_NEAR(uniform_sum_density(groups, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(uniform_sum_density(groups, 1.5), 0.5, 1e-15);
  EXPECT_NEAR(uniform_sum_density(groups, 2.5), 0.25, 1e-15);
  EXPECT_EQ(uniform_sum_density(groups, 3.5), 0.0);
}

TEST(UniformSum, ExactSectionVolumeMultiprecision) {
  // misaligned two-value case; reference from mpmath inclusion-exclusion at 50 digits
  using Big = boost::multiprecision::cpp_bin_float_100;
  const auto w = StepFunction::scalar({0.0, 1.0 / 3.0, 1.0}, {2.0, 1.0});
  const struct { std::size_t n; double log_vol; } cases[] = {
      {16, -0.51491513571808358268}, {32, -1.3752034055940961918}, {64, -3.1063904695813427363}};
  for (const auto& c : cases) {
    const Big v = exact_section_volume_m1<Big>(reduce(w, c.n), 0.8);
    EXPECT_NEAR(static_cast<double>(log(v)), c.log_vol, 1e-12) << c.n;
  }
  // unit responsivity: √n · IH(n, n/2)
  const Big v = exact_section_volume_m1<Big>(reduce(StepFunction::scalar({0.0, 1.0}, {1.0}), 20), 0.5);
  EXPECT_NEAR(static_cast<double>(v), 1.3715732474327751926, 1e-14);
}

TEST(CentroidReport, ZeroTauCase) {
  const auto w = two_step();
  HitAndRunOptions opt;
  opt.sample_count = 20000;
  opt.seed = 5;
  const auto rep = empirical_centroid_vs_formula(w, ResponseVector(0.5 * w.integral()), 8, opt);
  EXPECT_LT(rep.tau0.norm(), 1e-10);
  for (const auto& c : rep.cells) EXPECT_NEAR(c.predicted, 0.5, 1e-12);
  EXPECT_LE(rep.max_abs_z, 4.0);
  EXPECT_EQ(rep.cells.size(), 8u);
}

TEST(CentroidReport, DecoupledIndicators) {
  Matrix v(2, 2);
  v << 1, 0, 0, 1;
  const StepFunction w({0.0, 0.5, 1.0}, v);
  Vector y(2);
  y << 0.15, 0.35;
  HitAndRunOptions opt;
  opt.sample_count = 20000;
  opt.seed = 6;
  const auto rep = empirical_centroid_vs_formula(w, ResponseVector(y), 16, opt);
  EXPECT_NEAR(rep.tau0[0], -2.6721038552733855446, 1e-9);
  for (std::size_t j = 0; j < 16; ++j)
    EXPECT_NEAR(rep.cells[j].predicted, j < 8 ? 0.3 : 0.7, 1e-12);
  EXPECT_LE(rep.max_abs_z, 4.0);
}
