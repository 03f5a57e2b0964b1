// One PASS/FAIL line per acceptance criterion; exit status 0 only if all pass.
#include <sys/wait.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "centroid/centroid.hpp"
#include "test_helpers.hpp"

using namespace centroid;
using testing_support::random_interior_response;
using testing_support::random_step;

namespace {

const std::string kData = CENTROID_TEST_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ColorimetricSystem cie_system(const EstimatorConfig& cfg) {
  static const SpectraTable cmf = SpectraTable::load_csv(kData + "/cie1931_2deg_5nm.csv", SpectraKind::CmfSet);
  static const SpectraTable ill = SpectraTable::load_csv(kData + "/cie_illuminants.csv", SpectraKind::Illuminant);
  return build_system(cmf, ill, cfg);
}

SpectraTable synthetic_set() {
  return SpectraTable::load_csv(kData + "/synthetic_reflectances.csv", SpectraKind::ReflectanceSet).window(400, 700);
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

// -------------------------------------------------------------------------

void squashing(Outcome& o) {
  o.require(sigma(0.0) == 0.5, "sigma(0) == 1/2");
  double refl = 0.0, deriv = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const double t = -30.0 + 60.0 * i / 999.0;
    refl = std::max(refl, std::fabs(sigma(t) + sigma(-t) - 1.0));
    deriv = std::max(deriv, std::fabs((cumulant_K(t + h) - cumulant_K(t - h)) / (2 * h) - sigma(t)));
  }
  double branch = 0.0;
  for (double a = 0.5; a <= 2.0; a += 1.0 / 64) {
    for (double t : {a, -a}) {
      branch = std::max(branch, std::fabs(detail::sigma_series(t) / detail::sigma_closed(t) - 1));
      branch = std::max(branch, std::fabs(detail::sigma_prime_series(t) / detail::sigma_prime_closed(t) - 1));
      branch = std::max(branch, std::fabs(detail::cumulant_series(t) / detail::cumulant_closed(t) - 1));
    }
  }
  o.detail << "reflection " << fmt(refl) << ", K'-sigma " << fmt(deriv) << ", branches " << fmt(branch);
  o.require(refl <= 1e-6, "reflection");
  o.require(deriv <= 1e-6, "K' = sigma");
  o.require(branch <= 1e-13, "branch agreement");
}

void exact_response(Outcome& o) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> start(-3.0, 3.0);
  double worst_residual = 0.0, worst_spread = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    const auto w = random_step(rng, 3 + static_cast<std::size_t>(trial % 13), m);
    const ResponseVector y(random_interior_response(rng, w));
    const auto r = solve_saddlepoint(w, y);
    const Vector back = apply_operator(w, r.estimate).components;
    worst_residual = std::max(worst_residual, (back - y.components).cwiseAbs().maxCoeff() /
                                                  y.components.cwiseAbs().maxCoeff());
    for (int s = 0; s < 4; ++s) {
      SaddleOptions opt;
      opt.initial_tau = Vector(m);
      for (Eigen::Index i = 0; i < m; ++i) (*opt.initial_tau)[i] = start(rng);
      const auto r2 = solve_saddlepoint(w, y, Regime::Bounded, opt);
      worst_spread = std::max(worst_spread, (r2.tau0 - r.tau0).cwiseAbs().maxCoeff());
    }
  }
  o.detail << "1000 cases, max relative residual " << fmt(worst_residual) << ", max start spread "
           << fmt(worst_spread);
  o.require(worst_residual <= 1e-9, "residual");
  o.require(worst_spread <= 1e-8, "start agreement");
}

void fixed_point(Outcome& o) {
  std::vector<StepFunction> sets;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 30; ++i) sets.push_back(random_step(rng, 5 + i % 7, 1 + i % 3));
  for (const std::string ill : {"E", "D65", "A"}) {
    EstimatorConfig cfg;
    cfg.illuminant = ill;
    sets.push_back(cie_system(cfg).w);
    cfg.basis = ColorBasis::LMS;
    cfg.lms_matrix = load_matrix_json(kData + "/hpe_matrix.json");
    sets.push_back(cie_system(cfg).w);
  }
  double tau = 0.0, dev = 0.0;
  for (const auto& w : sets) {
    const ResponseVector y(Vector(w.integral() / 2));
    for (bool shortcut : {false, true}) {
      if (shortcut && (w.values().array() <= 0.0).any()) continue;
      const auto r = shortcut ? solve_shortcut(w, default_alpha(w.channels()), y) : solve_saddlepoint(w, y);
      tau = std::max(tau, r.tau0.cwiseAbs().maxCoeff());
      dev = std::max(dev, (r.estimate.values().array() - 0.5).abs().maxCoeff());
    }
  }
  o.detail << sets.size() << " responsivity sets, max|tau0| " << fmt(tau) << ", max|estimate-1/2| " << fmt(dev);
  o.require(tau <= 1e-10, "tau0 = 0");
  o.require(dev <= 1e-10, "estimate = 1/2");
}

void jacobian(Outcome& o) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double h = 1e-6;
  double err = 0.0, min_eig = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    const auto w = random_step(rng, 4 + static_cast<std::size_t>(trial % 9), m);
    Vector tau(m);
    for (Eigen::Index i = 0; i < m; ++i) tau[i] = u(rng);
    const Matrix J = G_jacobian(w, tau);
    for (Eigen::Index j = 0; j < m; ++j) {
      const Vector e = Vector::Unit(m, j) * h;
      const Vector fd = (G_map(w, tau + e).components - G_map(w, tau - e).components) / (2 * h);
      err = std::max(err, (J.col(j) - fd).cwiseAbs().maxCoeff());
    }
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(J).eigenvalues().minCoeff());
  }
  o.detail << "100 cases, max elementwise error " << fmt(err) << ", min eigenvalue " << fmt(min_eig);
  o.require(err <= 1e-6, "finite differences");
  o.require(min_eig > 0.0, "positive definite");
}

void oracle_centroid(Outcome& o) {
  HitAndRunOptions opt;
  opt.sample_count = 100000;
  opt.seed = 7;
  opt.chains = 4;
  opt.threads = 4;
  const auto w1 = StepFunction::scalar({0.0, 0.5, 1.0}, {2.0, 1.0});
  const auto a = empirical_centroid_vs_formula(w1, ResponseVector(Vector::Constant(1, 1.0)), 64, opt);
  o.require(std::fabs(a.cells.front().predicted - 0.69689832221713697063) < 1e-12, "predicted sigma(2 tau0)");
  o.require(std::fabs(a.cells.back().predicted - 0.60620335556572605873) < 1e-12, "predicted sigma(tau0)");
  o.detail << "m=1: max|z| " << fmt(a.max_abs_z) << ", L1 " << fmt(a.l1_distance);
  o.require(a.max_abs_z <= 4.0, "m=1 max|z|");
  o.require(a.l1_distance <= 0.01, "m=1 L1");

  Matrix v(2, 2);
  v << 1, 0, 0, 1;
  const StepFunction w2({0.0, 0.5, 1.0}, v);
  Vector y(2);
  y << 0.15, 0.35;
  opt.seed = 8;
  const auto b = empirical_centroid_vs_formula(w2, ResponseVector(y), 64, opt);
  o.detail << "; m=2: max|z| " << fmt(b.max_abs_z) << ", L1 " << fmt(b.l1_distance);
  o.require(b.max_abs_z <= 4.0, "m=2 max|z|");
  o.require(b.l1_distance <= 0.01, "m=2 L1");
}

void volume_unit(Outcome& o) {
  const auto w = StepFunction::scalar({0.0, 1.0}, {1.0});
  const double limit = std::sqrt(6.0 / std::numbers::pi);
  double worst = 0.0;
  for (std::size_t n : {1u, 2u, 5u, 10u, 20u, 30u, 40u, 50u, 100u, 1000u, 100000u, 1000000u})
    worst = std::max(worst, std::fabs(asymptotic_volume(w, ResponseVector(Vector::Constant(1, 0.5)), n).volume - limit));
  std::vector<double> errors;
  for (std::size_t n : {10u, 20u, 30u, 40u, 50u})
    errors.push_back(std::fabs(std::sqrt(double(n)) * irwin_hall_density(n, n / 2.0).value - limit) / limit);
  bool decreasing = true;
  for (std::size_t i = 1; i < errors.size(); ++i) decreasing = decreasing && errors[i] < errors[i - 1];
  o.detail << "max|asymptotic - sqrt(6/pi)| " << fmt(worst) << ", exact rel. error at n=50 " << fmt(errors.back());
  o.require(worst <= 1e-12, "asymptotic constant");
  o.require(errors.back() < 0.01, "n=50 within 1%");
  o.require(decreasing, "error decreasing over n=10..50");
}

void phi_correction(Outcome& o) {
  using Big = boost::multiprecision::cpp_bin_float_100;
  const auto w = StepFunction::scalar({0.0, 1.0 / 3.0, 1.0}, {2.0, 1.0});
  const ResponseVector y(Vector::Constant(1, 0.8));
  for (std::size_t n : {16u, 32u, 64u}) {
    const double exact = static_cast<double>(log(exact_section_volume_m1<Big>(reduce(w, n), 0.8)));
    const double with = asymptotic_volume(w, y, n, true).log_volume;
    const double without = asymptotic_volume(w, y, n, false).log_volume;
    o.detail << "n=" << n << ": |with|=" << fmt(std::fabs(with - exact)) << " |without|=" << fmt(std::fabs(without - exact))
             << "; ";
    o.require(std::fabs(with - exact) < std::fabs(without - exact), "phi_n closer at n=" + std::to_string(n));
  }
}

void neutral_involution(Outcome& o) {
  const EstimatorConfig cfg;
  const auto sys = cie_system(cfg);
  double neutral = 0.0;
  for (double c : {0.1, 0.5, 0.9}) {
    const auto y = tristimulus(sys, spectrum_on(sys, Vector::Constant(61, c)));
    neutral = std::max(neutral, (estimate_reflectance(sys, cfg, y).estimate.values().array() - c).abs().maxCoeff());
  }
  const auto data = synthetic_set();
  double inv = 0.0;
  for (Eigen::Index s = 0; s < data.columns().cols(); ++s) {
    const auto y = tristimulus(sys, spectrum_on(sys, data.columns().col(s)));
    const auto a = estimate_reflectance(sys, cfg, y);
    const auto b = estimate_reflectance(sys, cfg, ResponseVector(Vector(sys.white_point - y.components)));
    inv = std::max(inv, ((a.estimate.values() + b.estimate.values()).array() - 1.0).abs().maxCoeff());
  }
  o.detail << "gray round trip " << fmt(neutral) << ", complementary sum " << fmt(inv) << " over "
           << data.columns().cols() << " spectra";
  o.require(neutral <= 1e-8, "neutral exactness");
  o.require(inv <= 1e-9, "involution");
}

void hawkyard(Outcome& o) {
  const auto sys = cie_system({});
  const auto data = synthetic_set();
  double residual = 0.0;
  for (Eigen::Index s = 0; s < data.columns().cols(); ++s)
    residual = std::max(residual,
                        hawkyard_estimate(sys, tristimulus(sys, spectrum_on(sys, data.columns().col(s)))).relative_residual);
  const auto half = hawkyard_estimate(sys, ResponseVector(Vector(sys.white_point / 2)));
  const double half_dev = (half.raw.values().array() - 0.5).abs().maxCoeff();
  Vector r = Vector::Constant(61, 0.02);
  for (Eigen::Index k = 20; k < 35; ++k) r[k] = 0.98;
  const auto y = tristimulus(sys, spectrum_on(sys, r));
  const auto h = hawkyard_estimate(sys, y);
  const auto c = estimate_reflectance(sys, {}, y);
  o.detail << "max pre-clamp residual " << fmt(std::max(residual, h.relative_residual)) << ", half-gray "
           << fmt(half_dev) << ", near-boundary clamp fraction " << fmt(h.clamp_fraction)
           << ", centroid range [" << fmt(c.min_value) << ", " << fmt(c.max_value) << "]";
  o.require(std::max(residual, h.relative_residual) <= 1e-10, "pre-clamp residual");
  o.require(half_dev <= 1e-12, "half gray");
  o.require(h.clamp_fraction > 0.0, "clamping occurs");
  o.require(c.min_value > 0.0 && c.max_value < 1.0, "centroid inside (0,1)");
}

void unbounded(Outcome& o) {
  const EstimatorConfig cfg;
  const auto sys = cie_system(cfg);
  const auto flat = estimate_lightsource(sys, cfg, ResponseVector(sys.white_point));
  o.require(flat.estimable, "equal-energy estimable");
  const double flat_dev = flat.estimable ? (flat.spectrum->values().array() - 1.0).abs().maxCoeff() : 1.0;
  Vector e(61);
  for (Eigen::Index k = 0; k < 61; ++k) e[k] = 1.0 + 0.5 * std::cos(0.1 * double(k));
  const auto y = tristimulus(sys, spectrum_on(sys, e));
  const auto base = estimate_lightsource(sys, cfg, y);
  double scale = 0.0;
  for (double k : {0.25, 3.0, 10.0}) {
    const auto s = estimate_lightsource(sys, cfg, ResponseVector(Vector(k * y.components)));
    if (!s.estimable || !base.estimable) {
      scale = 1.0;
      continue;
    }
    scale = std::max(scale, (s.spectrum->values() - k * base.spectrum->values()).cwiseAbs().maxCoeff() /
                                (k * base.spectrum->values().cwiseAbs().maxCoeff()));
  }
  int rejected = 0, total = 0;
  for (double x = 0.02; x < 0.98; x += 0.04)
    for (double yv = 0.02; x + yv < 0.98; yv += 0.04) {
      Vector c(3);
      c << x, yv, 1.0 - x - yv;
      ++total;
      rejected += !estimate_lightsource(sys, cfg, ResponseVector(Vector(100 * c))).estimable;
    }
  o.detail << "flat deviation " << fmt(flat_dev) << ", scaling error " << fmt(scale) << ", not estimable "
           << rejected << "/" << total << " scanned chromaticities";
  o.require(flat_dev <= 1e-8, "flat");
  o.require(scale <= 1e-10, "scaling");
  o.require(rejected > 0, "non-surjective");
}

int run_cli(const std::string& args, std::string& err) {
  const std::string err_path = "/tmp/centroid_acceptance_stderr.txt";
  const int status = std::system((std::string(CENTROID_CLI_PATH) + " " + args + " >/dev/null 2>" + err_path).c_str());
  std::FILE* f = std::fopen(err_path.c_str(), "r");
  err.clear();
  if (f) {
    char buf[512];
    while (std::fgets(buf, sizeof buf, f)) err += buf;
    std::fclose(f);
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void degenerate(Outcome& o) {
  Matrix v(3, 2);
  v << 1, 1, 2, 2, 0.5, 0.5;
  const StepFunction dup({0.0, 0.25, 0.5, 1.0}, v);
  o.require(kind_of([&] { solve_saddlepoint(dup, ResponseVector(Vector::Constant(2, 0.4))); }) ==
                ErrorKind::DependentChannels,
            "library DependentChannels");
  const auto sys = cie_system({});
  o.require(kind_of([&] { estimate_reflectance(sys, {}, ResponseVector(sys.white_point)); }) ==
                ErrorKind::BoundaryOrExteriorResponse,
            "library BoundaryOrExteriorResponse");
  std::string err;
  const int dep = run_cli("solve --w " + std::string(CENTROID_CLI_FIXTURES) + "/duplicated_w.csv --y 0.4,0.4", err);
  const bool dep_ok = dep == 2 && err.find("kind=DependentChannels") != std::string::npos;
  std::ostringstream white;
  white.precision(17);
  white << sys.white_point[0] << "," << sys.white_point[1] << "," << sys.white_point[2];
  const int bnd = run_cli("estimate --xyz " + white.str(), err);
  const bool bnd_ok = bnd == 3 && err.find("kind=BoundaryOrExteriorResponse") != std::string::npos;
  o.detail << "CLI exit codes: duplicated channel " << dep << ", white point " << bnd;
  o.require(dep_ok, "CLI DependentChannels -> 2");
  o.require(bnd_ok, "CLI BoundaryOrExteriorResponse -> 3");
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;  // 0: no limit
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "squashing identities", 1.0, squashing},
      {2, "exact response and start independence", 30.0, exact_response},
      {3, "half white point gives tau0 = 0", 0.0, fixed_point},
      {4, "Jacobian against finite differences", 0.0, jacobian},
      {5, "sampled centroid matches the saddlepoint formula", 60.0, oracle_centroid},
      {6, "asymptotic volume against Irwin-Hall", 1.0, volume_unit},
      {7, "misalignment correction improves the volume", 0.0, phi_correction},
      {8, "neutral exactness and involution", 0.0, neutral_involution},
      {9, "Hawkyard estimator", 0.0, hawkyard},
      {10, "unbounded case", 10.0, unbounded},
      {11, "degenerate inputs", 0.0, degenerate},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0.0 && secs >= c.limit_seconds) {
      o.pass = false;
      o.detail << " [over time limit " << c.limit_seconds << " s]";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.title << ": " << o.detail.str() << " ("
              << fmt(secs) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
