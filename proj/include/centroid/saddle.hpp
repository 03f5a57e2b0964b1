#ifndef CENTROID_SADDLE_HPP
#define CENTROID_SADDLE_HPP

// Saddlepoint equation  ∫ σ(⟨τ, w(x)⟩) w(x) dx = y₀  and the centroid σ(⟨τ₀, w⟩).
//
// For a step responsivity every integral is a finite sum over pieces, so the
// solver works on a discrete measure: weights a_k > 0 and points p_k ∈ R^m with
//   G(τ) = Σ a_k σ(⟨τ, p_k⟩) p_k,
//   h(τ) = Σ a_k K(⟨τ, p_k⟩) - ⟨y₀, τ⟩,   ∇h = G - y₀,   ∇²h = Σ a_k σ'(⟨τ,p_k⟩) p_k p_kᵀ.
// h is strictly convex when the p_k span R^m, so damped Newton with an Armijo
// line search on h finds the unique root.
//
// For the raw responsivity a_k = μ_k (piece width) and p_k = ω_k (piece value).
// Other systems with the same structure (normalized responsivities, the
// n-grid reduction) reuse the same solver with different (a, p).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "centroid/error.hpp"
#include "centroid/specfun.hpp"
#include "centroid/stepfn.hpp"
#include "centroid/zonotope.hpp"

namespace centroid {

struct SaddleOptions {
  double tol_abs = 1e-12;
  double tol_rel = 1e-10;
  int max_iterations = 200;
  int max_unbounded_iterations = 500;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double boundary_fraction = 0.99;   // unbounded: step cap relative to the cone boundary
  double divergence_ratio = 1e8;     // |τ| growth that signals a missing root
  double condition_warning = 1e12;
  bool check_membership = true;      // bounded, m <= 3: reject y₀ outside int(Z) up front
  std::optional<Vector> initial_tau;
};

struct SaddleResult {
  Vector tau0;
  StepFunction estimate;
  Vector response_residual;   // |G(τ₀) - y₀| per channel
  int iterations = 0;
  Matrix hessian_at_solution;
  Regime regime = Regime::Bounded;
  double condition_estimate = 1.0;
  std::vector<std::string> warnings;
};

/// Weights a_k and points p_k (rows) of the finite sum behind G, h and ∇²h.
struct DiscreteMeasure {
  Vector weights;
  Matrix points;

  static DiscreteMeasure from(const StepFunction& w) {
    DiscreteMeasure d;
    d.weights.resize(static_cast<Eigen::Index>(w.pieces()));
    for (std::size_t k = 0; k < w.pieces(); ++k) d.weights[static_cast<Eigen::Index>(k)] = w.width(k);
    d.points = w.values();
    return d;
  }

  Eigen::Index dimension() const { return points.cols(); }
  Eigen::Index size() const { return points.rows(); }

  Matrix gram() const { return points.transpose() * weights.asDiagonal() * points; }

  /// Generators a_k p_k of the image zonotope.
  Matrix generators() const { return weights.asDiagonal() * points; }
};

namespace detail {

struct Evaluation {
  double h = 0.0;
  Vector gradient;  // G(τ) - y
  Matrix hessian;
};

inline void require_cone(const DiscreteMeasure& d, const Vector& tau) {
  const Vector s = d.points * tau;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (!(s[k] < 0.0))
      fail(ErrorKind::Infeasible, "unbounded regime: <tau, w> must be negative on every piece (piece " +
                                      std::to_string(k) + ")");
}

inline Vector G_of(const DiscreteMeasure& d, const Vector& tau, Regime regime) {
  if (regime == Regime::Unbounded) require_cone(d, tau);
  const Vector s = d.points * tau;
  Vector coef(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) coef[k] = d.weights[k] * sigma(s[k], regime);
  return d.points.transpose() * coef;
}

inline Matrix jacobian_of(const DiscreteMeasure& d, const Vector& tau, Regime regime) {
  if (regime == Regime::Unbounded) require_cone(d, tau);
  const Vector s = d.points * tau;
  Vector coef(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) coef[k] = d.weights[k] * sigma_prime(s[k], regime);
  return d.points.transpose() * coef.asDiagonal() * d.points;
}

inline double potential_of(const DiscreteMeasure& d, const Vector& tau, const Vector& y,
                           Regime regime) {
  if (regime == Regime::Unbounded) require_cone(d, tau);
  const Vector s = d.points * tau;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) acc += d.weights[k] * cumulant_K(s[k], regime);
  return acc - y.dot(tau);
}

inline Evaluation evaluate(const DiscreteMeasure& d, const Vector& tau, const Vector& y,
                           Regime regime) {
  const Vector s = d.points * tau;
  Vector g(s.size()), gp(s.size());
  double h = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    g[k] = d.weights[k] * sigma(s[k], regime);
    gp[k] = d.weights[k] * sigma_prime(s[k], regime);
    h += d.weights[k] * cumulant_K(s[k], regime);
  }
  Evaluation e;
  e.h = h - y.dot(tau);
  e.gradient = d.points.transpose() * g - y;
  e.hessian = d.points.transpose() * gp.asDiagonal() * d.points;
  return e;
}

/// Largest step along `dir` that keeps ⟨τ + α dir, p_k⟩ < 0 for all k.
inline double cone_step_limit(const DiscreteMeasure& d, const Vector& tau, const Vector& dir) {
  const Vector s = d.points * tau;
  const Vector ds = d.points * dir;
  double limit = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (ds[k] > 0.0) limit = std::min(limit, -s[k] / ds[k]);
  return limit;
}

inline Vector newton_direction(const Matrix& H, const Vector& g) {
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() == Eigen::Success) {
    Vector d = llt.solve(-g);
    if (d.allFinite()) return d;
  }
  // Numerically semidefinite Hessian (saturated σ'): fall back to a damped solve.
  const double shift = 1e-14 * std::max(H.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  Matrix Hs = H + shift * Matrix::Identity(H.rows(), H.cols());
  return Hs.ldlt().solve(-g);
}

inline double condition_of(const Matrix& H) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

/// Unbounded start: τ = s·u with u_i = -1/∫|w_i|, scaled so that Σ G(τ) = Σ y
/// (G is homogeneous of degree -1 in τ since σ(t) = -1/t).
inline Vector unbounded_start(const DiscreteMeasure& d, const Vector& y) {
  const Vector channel_mass = d.points.cwiseAbs().transpose() * d.weights;
  Vector u(d.dimension());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = -1.0 / channel_mass[i];
  const Vector gu = G_of(d, u, Regime::Unbounded);
  return u * (gu.sum() / y.sum());
}

struct CoreResult {
  Vector tau;
  int iterations = 0;
  Matrix hessian;
  Vector residual;
  double condition = 1.0;
  std::vector<std::string> warnings;
};

inline CoreResult solve_core(const DiscreteMeasure& d, const Vector& y, Regime regime,
                             const SaddleOptions& opt) {
  const Eigen::Index m = d.dimension();
  const double tol = opt.tol_abs + opt.tol_rel * y.cwiseAbs().maxCoeff();
  const int max_iter = regime == Regime::Bounded ? opt.max_iterations : opt.max_unbounded_iterations;

  Vector tau;
  if (opt.initial_tau) {
    tau = *opt.initial_tau;
    if (tau.size() != m) fail(ErrorKind::InvalidArgument, "initial_tau has wrong dimension");
  } else {
    tau = regime == Regime::Bounded ? Vector::Zero(m) : unbounded_start(d, y);
  }
  if (regime == Regime::Unbounded) require_cone(d, tau);
  const double tau_scale = std::max(tau.norm(), 1.0);

  Evaluation e = evaluate(d, tau, y, regime);
  for (int it = 0;; ++it) {
    const double gnorm = e.gradient.cwiseAbs().maxCoeff();
    if (gnorm <= tol) {
      // a few full Newton steps past the tolerance, kept only while |grad| shrinks
      double best = gnorm;
      for (int polish = 0; polish < 3 && best > 0.0; ++polish) {
        const Vector next = tau + newton_direction(e.hessian, e.gradient);
        if (regime == Regime::Unbounded && !((d.points * next).array() < 0.0).all()) break;
        Evaluation trial = evaluate(d, next, y, regime);
        const double g = trial.gradient.cwiseAbs().maxCoeff();
        if (!(g < best)) break;
        best = g;
        tau = next;
        e = std::move(trial);
      }
      CoreResult r;
      r.tau = tau;
      r.iterations = it;
      r.hessian = e.hessian;
      r.residual = e.gradient.cwiseAbs();
      r.condition = condition_of(e.hessian);
      if (r.condition > opt.condition_warning)
        r.warnings.push_back("Jacobian condition estimate " + std::to_string(r.condition) +
                             " exceeds threshold; response may be close to the boundary");
      return r;
    }
    if (it >= max_iter) {
      if (regime == Regime::Unbounded)
        fail(ErrorKind::NotEstimable, "unbounded saddlepoint equation: no root found after " +
                                          std::to_string(it) + " iterations (|grad|=" +
                                          std::to_string(gnorm) + ")");
      fail(ErrorKind::MaxIterations, "saddlepoint solver: " + std::to_string(it) +
                                         " iterations without convergence (|grad|=" +
                                         std::to_string(gnorm) + ")");
    }

    const Vector dir = newton_direction(e.hessian, e.gradient);
    const double slope = e.gradient.dot(dir);
    double alpha = 1.0;
    if (regime == Regime::Unbounded)
      alpha = std::min(1.0, opt.boundary_fraction * cone_step_limit(d, tau, dir));

    bool accepted = false;
    Evaluation trial;
    Vector next;
    for (int ls = 0; ls < 80; ++ls, alpha *= opt.backtrack) {
      next = tau + alpha * dir;
      if (regime == Regime::Unbounded && !((d.points * next).array() < 0.0).all()) continue;
      trial = evaluate(d, next, y, regime);
      if (!std::isfinite(trial.h) || !trial.gradient.allFinite()) continue;
      if (trial.h <= e.h + opt.armijo_c * alpha * slope) { accepted = true; break; }
      // h differences below evaluation noise: judge by the gradient instead.
      const double noise = 1e-14 * (1.0 + std::fabs(e.h));
      if (trial.h - e.h <= noise &&
          trial.gradient.cwiseAbs().maxCoeff() < gnorm) { accepted = true; break; }
    }
    if (!accepted)
      fail(regime == Regime::Unbounded ? ErrorKind::NotEstimable : ErrorKind::MaxIterations,
           "saddlepoint solver: line search stalled at |grad|=" + std::to_string(gnorm));

    tau = next;
    e = std::move(trial);
    if (tau.norm() > opt.divergence_ratio * tau_scale) {
      if (regime == Regime::Unbounded)
        fail(ErrorKind::NotEstimable, "unbounded saddlepoint iterates diverge; response is "
                                      "outside the estimable region");
      fail(ErrorKind::BoundaryOrExteriorResponse,
           "saddlepoint iterates diverge; response is on or outside the zonotope boundary");
    }
  }
}

inline void check_unbounded_conditions(const DiscreteMeasure& d, const Vector& y) {
  if ((d.points.array() < 0.0).any())
    fail(ErrorKind::InvalidArgument, "unbounded regime requires nonnegative responsivities");
  const Vector sums = d.points.rowwise().sum();
  if (sums.size() > 0 && !(sums.minCoeff() > 0.0))
    fail(ErrorKind::InvalidArgument,
         "unbounded regime requires the channel sum to be positive on every piece");
  if ((y.array() < 0.0).any() || !(y.sum() > 0.0))
    fail(ErrorKind::NotEstimable, "unbounded regime requires a nonzero, componentwise "
                                  "nonnegative response");
}

/// Preconditions shared by every front end, then the Newton core.
inline CoreResult solve_measure(const DiscreteMeasure& d, const Vector& y, Regime regime,
                                const SaddleOptions& opt) {
  if (y.size() != d.dimension())
    fail(ErrorKind::InvalidArgument, "response dimension " + std::to_string(y.size()) +
                                         " does not match responsivity channels " +
                                         std::to_string(d.dimension()));
  if (!y.allFinite()) fail(ErrorKind::InvalidArgument, "response has non-finite components");
  if (!channels_independent(d.gram()))
    fail(ErrorKind::DependentChannels, "responsivity channels are linearly dependent");
  if (regime == Regime::Bounded) {
    if (opt.check_membership && d.dimension() <= 3) {
      ZonotopeModel z(d.generators());
      if (!z.contains_interior(ResponseVector(y)))
        fail(ErrorKind::BoundaryOrExteriorResponse,
             "response is not in the interior of the zonotope Λ_w(Q∞)");
    }
  } else {
    check_unbounded_conditions(d, y);
  }
  return solve_core(d, y, regime, opt);
}

}  // namespace detail

/// G(τ) = Λ_w(σ(⟨τ, w⟩)).
inline ResponseVector G_map(const StepFunction& w, const Vector& tau,
                            Regime regime = Regime::Bounded) {
  if (tau.size() != w.channels()) fail(ErrorKind::InvalidArgument, "G_map: tau has wrong dimension");
  return ResponseVector(detail::G_of(DiscreteMeasure::from(w), tau, regime), w.labels());
}

/// DG(τ)_ij = ∫ w_i σ'(⟨τ, w⟩) w_j.
inline Matrix G_jacobian(const StepFunction& w, const Vector& tau,
                         Regime regime = Regime::Bounded) {
  if (tau.size() != w.channels())
    fail(ErrorKind::InvalidArgument, "G_jacobian: tau has wrong dimension");
  return detail::jacobian_of(DiscreteMeasure::from(w), tau, regime);
}

/// h(τ) = ∫ K(⟨τ, w⟩) - ⟨y₀, τ⟩, whose gradient is G(τ) - y₀.
inline double potential_h(const StepFunction& w, const Vector& tau, const ResponseVector& y0,
                          Regime regime = Regime::Bounded) {
  if (tau.size() != w.channels() || y0.size() != w.channels())
    fail(ErrorKind::InvalidArgument, "potential_h: dimension mismatch");
  return detail::potential_of(DiscreteMeasure::from(w), tau, y0.components, regime);
}

inline SaddleResult solve_saddlepoint(const StepFunction& w, const ResponseVector& y0,
                                      Regime regime = Regime::Bounded,
                                      const SaddleOptions& options = {}) {
  const auto d = DiscreteMeasure::from(w);
  auto core = detail::solve_measure(d, y0.components, regime, options);
  const StepFunction squashed = squash(linear_combination(w, core.tau), regime);
  StepFunction estimate = squashed.with_values(squashed.values(), {"estimate"});
  return SaddleResult{core.tau,      std::move(estimate), core.residual,
                      core.iterations, core.hessian,      regime,
                      core.condition, std::move(core.warnings)};
}

}  // namespace centroid

#endif  // CENTROID_SADDLE_HPP
