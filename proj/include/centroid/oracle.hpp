#ifndef CENTROID_ORACLE_HPP
#define CENTROID_ORACLE_HPP

// Ground truth for the saddlepoint formulas, computed without them:
//  * hit-and-run sampling of the uniform distribution on H_y ∩ Qⁿ, giving an
//    empirical centroid of the finite-dimensional section;
//  * exact densities of sums of independent uniforms (Irwin-Hall and its
//    unequal-width generalization), which give exact section volumes for m = 1.
//
// Random numbers come from xoshiro256** seeded through splitmix64; chain c of a
// run with seed s uses the c-th splitmix64 output of s, so results depend only
// on (seed, chain count) and never on the thread count. Standard errors are
// batch means over the thinned chain; they are trustworthy only when a batch
// spans many autocorrelation times (burn-in 10n and thinning n by default are
// heuristics, not guarantees).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "centroid/error.hpp"
#include "centroid/saddle.hpp"
#include "centroid/specfun.hpp"
#include "centroid/stepfn.hpp"
#include "centroid/volume.hpp"

namespace centroid {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna), usable as a standard UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    for (auto& word : s_) word = splitmix64(seed);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

/// Seed of chain `index` derived from a run seed.
inline std::uint64_t chain_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t state = seed;
  std::uint64_t out = 0;
  for (std::size_t i = 0; i <= index; ++i) out = splitmix64(state);
  return out;
}

// ---------------------------------------------------------------------------
// Interior starting point

/// x_j = σ(⟨τ, w_jn⟩) where τ solves Σ_j (1/n) σ(⟨τ, w_jn⟩) w_jn = y; then
/// Wx = y and x lies strictly inside the cube.
inline Vector interior_start(const FiniteReduction& red, const ResponseVector& y) {
  DiscreteMeasure d;
  d.weights = Vector::Constant(static_cast<Eigen::Index>(red.n), 1.0 / double(red.n));
  d.points = red.wjn.transpose();
  SaddleOptions opt;
  opt.tol_abs = 1e-14;
  opt.tol_rel = 1e-13;
  const auto core = detail::solve_measure(d, y.components, Regime::Bounded, opt);
  const Vector s = d.points * core.tau;
  Vector x(s.size());
  for (Eigen::Index j = 0; j < s.size(); ++j) x[j] = sigma(s[j]);
  if ((x.array() <= 0.0).any() || (x.array() >= 1.0).any())
    fail(ErrorKind::BoundaryOrExteriorResponse,
         "interior_start: reduced solution touches the cube boundary; increase n");
  return x;
}

// ---------------------------------------------------------------------------
// Hit-and-run

struct HitAndRunOptions {
  std::size_t sample_count = 10000;
  std::uint64_t seed = 1;
  std::size_t burn_in = 0;     // 0 selects 10·n
  std::size_t thinning = 0;    // 0 selects n
  std::size_t chains = 1;
  std::size_t threads = 1;
  std::size_t batches = 50;    // batch-means standard errors, per chain
};

struct SectionSampleStats {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t sample_count = 0;
  Vector empirical_centroid;
  Vector standard_errors;      // batch means over thinned samples
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  std::size_t thinning = 0;
  std::size_t chains = 0;
  double constraint_violation_max = 0.0;  // worst |Wx - y|∞ over retained samples
  std::size_t degenerate_chords = 0;
};

namespace detail {

struct ChainOutput {
  Matrix batch_sums;  // n × batches
  std::vector<std::size_t> batch_counts;
  double violation = 0.0;
  std::size_t degenerate = 0;
};

inline ChainOutput run_chain(const Matrix& W, const Matrix& row_basis, const Vector& y,
                             Vector x, std::size_t samples, std::uint64_t seed,
                             std::size_t burn_in, std::size_t thinning, std::size_t batches) {
  const Eigen::Index n = x.size();
  Xoshiro256 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ChainOutput out;
  batches = std::max<std::size_t>(1, std::min(batches, samples));
  out.batch_sums = Matrix::Zero(n, static_cast<Eigen::Index>(batches));
  out.batch_counts.assign(batches, 0);
  const std::size_t per_batch = std::max<std::size_t>(1, samples / batches);

  Vector dir(n);
  auto step = [&]() {
    for (;;) {
      for (Eigen::Index i = 0; i < n; ++i) dir[i] = gauss(rng);
      // Project the Gaussian onto null(W): the result is isotropic in null(W).
      dir -= row_basis * (row_basis.transpose() * dir);
      const double norm = dir.norm();
      if (!(norm > 1e-12)) { ++out.degenerate; continue; }
      dir /= norm;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double di = dir[i];
        if (di > 0.0) {
          lo = std::max(lo, -x[i] / di);
          hi = std::min(hi, (1.0 - x[i]) / di);
        } else if (di < 0.0) {
          lo = std::max(lo, (1.0 - x[i]) / di);
          hi = std::min(hi, -x[i] / di);
        }
      }
      if (!(hi - lo > 1e-14)) { ++out.degenerate; continue; }
      x += (lo + rng.uniform() * (hi - lo)) * dir;
      x = x.cwiseMax(0.0).cwiseMin(1.0);
      return;
    }
  };

  for (std::size_t i = 0; i < burn_in; ++i) step();
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t t = 0; t < thinning; ++t) step();
    const double violation = (W * x - y).cwiseAbs().maxCoeff();
    if (!(violation <= 1e-9) || (x.array() < 0.0).any() || (x.array() > 1.0).any())
      throw std::logic_error("hit_and_run: sample left the section (|Wx-y| = " +
                             std::to_string(violation) + ")");
    out.violation = std::max(out.violation, violation);
    const std::size_t b = std::min(s / per_batch, batches - 1);
    out.batch_sums.col(static_cast<Eigen::Index>(b)) += x;
    ++out.batch_counts[b];
  }
  return out;
}

}  // namespace detail

inline SectionSampleStats hit_and_run(const FiniteReduction& red, const ResponseVector& y,
                                      const Vector& start, HitAndRunOptions opt) {
  const auto n = static_cast<Eigen::Index>(red.n);
  const Eigen::Index m = red.dimension();
  if (n - m < 1) fail(ErrorKind::InvalidArgument, "hit_and_run: need n - m >= 1");
  if (start.size() != n) fail(ErrorKind::InvalidArgument, "hit_and_run: start has wrong size");
  if (y.size() != m) fail(ErrorKind::InvalidArgument, "hit_and_run: response has wrong size");
  if ((start.array() < 0.0).any() || (start.array() > 1.0).any() ||
      (red.W * start - y.components).cwiseAbs().maxCoeff() > 1e-9)
    fail(ErrorKind::InvalidArgument, "hit_and_run: start is not a feasible point of the section");
  if (opt.sample_count == 0) fail(ErrorKind::InvalidArgument, "hit_and_run: sample_count is 0");
  if (opt.burn_in == 0) opt.burn_in = 10 * red.n;
  if (opt.thinning == 0) opt.thinning = red.n;
  opt.chains = std::max<std::size_t>(1, std::min(opt.chains, opt.sample_count));
  opt.threads = std::max<std::size_t>(1, opt.threads);

  // Orthonormal basis of the row space of W, computed once.
  Eigen::HouseholderQR<Matrix> qr(red.W.transpose());
  const Matrix row_basis = qr.householderQ() * Matrix::Identity(n, m);

  std::vector<detail::ChainOutput> outputs(opt.chains);
  auto work = [&](std::size_t c) {
    const std::size_t share =
        opt.sample_count / opt.chains + (c < opt.sample_count % opt.chains ? 1 : 0);
    outputs[c] = detail::run_chain(red.W, row_basis, y.components, start, share,
                                   chain_seed(opt.seed, c), opt.burn_in, opt.thinning, opt.batches);
  };
  if (opt.threads == 1 || opt.chains == 1) {
    for (std::size_t c = 0; c < opt.chains; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(opt.threads, opt.chains);
    for (std::size_t t = 0; t < workers; ++t)
      pool.emplace_back([&, t]() {
        for (std::size_t c = t; c < opt.chains; c += workers) work(c);
      });
    for (auto& th : pool) th.join();
  }

  SectionSampleStats st;
  st.n = red.n;
  st.m = static_cast<std::size_t>(m);
  st.sample_count = opt.sample_count;
  st.seed = opt.seed;
  st.burn_in = opt.burn_in;
  st.thinning = opt.thinning;
  st.chains = opt.chains;

  // Batch means pooled over chains, combined in chain order.
  std::vector<Vector> means;
  std::vector<double> counts;
  Vector total = Vector::Zero(n);
  double total_count = 0.0;
  for (const auto& out : outputs) {
    st.constraint_violation_max = std::max(st.constraint_violation_max, out.violation);
    st.degenerate_chords += out.degenerate;
    for (std::size_t b = 0; b < out.batch_counts.size(); ++b) {
      if (out.batch_counts[b] == 0) continue;
      const double cnt = double(out.batch_counts[b]);
      means.push_back(out.batch_sums.col(static_cast<Eigen::Index>(b)) / cnt);
      counts.push_back(cnt);
      total += out.batch_sums.col(static_cast<Eigen::Index>(b));
      total_count += cnt;
    }
  }
  st.empirical_centroid = total / total_count;
  Vector var = Vector::Zero(n);
  for (std::size_t b = 0; b < means.size(); ++b)
    var += counts[b] * (means[b] - st.empirical_centroid).cwiseAbs2();
  // Var(batch mean) ≈ σ²_b / count_b; the weighted form estimates σ²_b.
  const double B = double(means.size());
  if (B > 1.0) {
    var /= (B - 1.0);
    st.standard_errors = (var / total_count).cwiseSqrt();
  } else {
    st.standard_errors = Vector::Constant(n, std::numeric_limits<double>::infinity());
  }
  return st;
}

// ---------------------------------------------------------------------------
// Exact densities

struct DensityValue {
  double value = 0.0;
  bool in_range = true;
};

/// Irwin-Hall density f_n(x) = (1/(n-1)!) Σ_k (-1)^k C(n,k) (x-k)₊^{n-1} on [0,n],
/// evaluated on the nearer half via f_n(x) = f_n(n-x). Terms and the Neumaier
/// sum are carried in long double to absorb the alternating cancellation.
inline DensityValue irwin_hall_density(std::size_t n, double x) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "irwin_hall_density: n must be positive");
  const double nn = double(n);
  if (!(x >= 0.0 && x <= nn)) return {0.0, false};
  if (n == 1) return {1.0, true};
  long double xl = x > 0.5 * nn ? static_cast<long double>(nn) - x : static_cast<long double>(x);
  long double sum = 0.0L, comp = 0.0L;
  long double binom = 1.0L;  // C(n, k)
  for (std::size_t k = 0; static_cast<long double>(k) < xl; ++k) {
    long double term = binom;
    const long double base = xl - static_cast<long double>(k);
    for (std::size_t i = 1; i < n; ++i) term *= base / static_cast<long double>(i);
    if (k % 2 == 1) term = -term;
    const long double t = sum + term;
    comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    binom = binom * static_cast<long double>(n - k) / static_cast<long double>(k + 1);
  }
  return {static_cast<double>(sum + comp), true};
}

/// Density at x of Σ independent uniforms, `groups` holding (width, count)
/// pairs: (1/((N-1)! Π c^{count})) Σ (-1)^{|S|} (x - Σ_S c)₊^{N-1} over sub-multisets.
/// Real may be an extended-precision type; the sum cancels heavily for large N.
template <class Real>
Real uniform_sum_density(const std::vector<std::pair<Real, std::size_t>>& groups, Real x) {
  std::size_t N = 0;
  Real scale = 1;
  for (const auto& [width, count] : groups) {
    if (!(width > Real(0))) fail(ErrorKind::InvalidArgument, "uniform_sum_density: widths must be positive");
    N += count;
    for (std::size_t i = 0; i < count; ++i) scale *= width;
  }
  if (N == 0) fail(ErrorKind::InvalidArgument, "uniform_sum_density: no summands");
  Real factorial = 1;
  for (std::size_t i = 2; i < N; ++i) factorial *= Real(i);

  Real acc = 0;
  std::vector<std::size_t> picks(groups.size(), 0);
  // Odometer over (k_1, …, k_G) with 0 ≤ k_g ≤ count_g.
  for (;;) {
    Real shift = 0;
    Real coef = 1;
    std::size_t parity = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      shift += Real(picks[g]) * groups[g].first;
      // C(count, k) built incrementally to stay exact in Real.
      Real c = 1;
      for (std::size_t i = 0; i < picks[g]; ++i)
        c = c * Real(groups[g].second - i) / Real(i + 1);
      coef *= c;
      parity += picks[g];
    }
    const Real base = x - shift;
    if (base > Real(0)) {
      Real p = 1;
      for (std::size_t i = 1; i < N; ++i) p *= base;
      acc += (parity % 2 ? -coef : coef) * p;
    }
    std::size_t g = 0;
    while (g < groups.size() && picks[g] == groups[g].second) picks[g++] = 0;
    if (g == groups.size()) break;
    ++picks[g];
  }
  return acc / (factorial * scale);
}

/// Groups the cell integrals of an m = 1 reduction into (width, count) pairs;
/// widths within 1e-12 relative are treated as equal.
inline std::vector<std::pair<double, std::size_t>> width_groups(const FiniteReduction& red) {
  if (red.dimension() != 1) fail(ErrorKind::InvalidArgument, "width_groups: m must be 1");
  std::vector<std::pair<double, std::size_t>> groups;
  for (Eigen::Index j = 0; j < red.W.cols(); ++j) {
    const double c = red.W(0, j);
    if (!(c > 0.0)) fail(ErrorKind::InvalidArgument, "exact volume needs positive cell integrals");
    auto it = std::find_if(groups.begin(), groups.end(), [c](const auto& g) {
      return std::fabs(g.first - c) <= 1e-12 * c;
    });
    if (it == groups.end()) groups.emplace_back(c, 1);
    else ++it->second;
  }
  return groups;
}

/// Exact vol(y) = ‖W‖ · density of Σ_j W_j U_j at y, for m = 1 and positive W.
template <class Real>
Real exact_section_volume_m1(const FiniteReduction& red, double y) {
  std::vector<std::pair<Real, std::size_t>> groups;
  for (const auto& [c, count] : width_groups(red)) groups.emplace_back(Real(c), count);
  Real norm_sq = 0;
  for (Eigen::Index j = 0; j < red.W.cols(); ++j) norm_sq += Real(red.W(0, j)) * Real(red.W(0, j));
  using std::sqrt;
  return sqrt(norm_sq) * uniform_sum_density<Real>(groups, Real(y));
}

// ---------------------------------------------------------------------------
// Sampled centroid against the saddlepoint prediction

struct CellComparison {
  double sampled_mean = 0.0;
  double predicted = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
};

struct CentroidReport {
  Vector tau0;
  std::vector<CellComparison> cells;
  double max_abs_z = 0.0;
  double l1_distance = 0.0;   // ∫|sampled - predicted| over [0,1]
  SectionSampleStats stats;
};

inline CentroidReport empirical_centroid_vs_formula(const StepFunction& w, const ResponseVector& y0,
                                                    std::size_t n, const HitAndRunOptions& opt) {
  const FiniteReduction red = reduce(w, n);
  const SaddleResult sr = solve_saddlepoint(w, y0);
  const Vector start = interior_start(red, y0);

  CentroidReport rep;
  rep.tau0 = sr.tau0;
  rep.stats = hit_and_run(red, y0, start, opt);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    CellComparison c;
    c.sampled_mean = rep.stats.empirical_centroid[jj];
    c.predicted = sigma(red.wjn.col(jj).dot(sr.tau0));
    c.standard_error = rep.stats.standard_errors[jj];
    c.z = (c.sampled_mean - c.predicted) / c.standard_error;
    rep.max_abs_z = std::max(rep.max_abs_z, std::fabs(c.z));
    rep.l1_distance += std::fabs(c.sampled_mean - c.predicted) / double(n);
    rep.cells.push_back(c);
  }
  return rep;
}

}  // namespace centroid

#endif  // CENTROID_ORACLE_HPP
