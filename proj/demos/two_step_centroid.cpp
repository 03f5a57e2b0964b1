// Centroid of {f : 0 <= f <= 1, ∫ f w = y} for a two-valued w, checked by sampling.
#include <cstdio>

#include "centroid/centroid.hpp"

using namespace centroid;

int main() {
  const auto w = StepFunction::scalar({0.0, 0.5, 1.0}, {2.0, 1.0}, "w");
  const ResponseVector y(Vector::Constant(1, 1.0));

  const SaddleResult r = solve_saddlepoint(w, y);
  std::printf("tau0 = %.15f  (%d Newton iterations)\n", r.tau0[0], r.iterations);
  std::printf("centroid: %.12f on [0, 1/2), %.12f on [1/2, 1]\n", r.estimate.scalar_value(0),
              r.estimate.scalar_value(1));
  std::printf("response of the centroid: %.15f\n", apply_operator(w, r.estimate).components[0]);

  for (std::size_t n : {16u, 64u, 256u}) {
    const VolumeEstimate v = asymptotic_volume(w, y, n);
    std::printf("n = %3zu: log section volume ~ %.6f\n", n, v.log_volume);
  }

  HitAndRunOptions opt;
  opt.sample_count = 20000;
  opt.seed = 1;
  const CentroidReport rep = empirical_centroid_vs_formula(w, y, 32, opt);
  std::printf("hit-and-run, n = 32, %zu samples: max|z| = %.2f, L1 = %.4f\n", rep.stats.sample_count,
              rep.max_abs_z, rep.l1_distance);
  std::printf("  cell  0: sampled %.4f, formula %.4f\n", rep.cells.front().sampled_mean, rep.cells.front().predicted);
  std::printf("  cell 31: sampled %.4f, formula %.4f\n", rep.cells.back().sampled_mean, rep.cells.back().predicted);
}
