#ifndef CENTROID_REPARAM_HPP
#define CENTROID_REPARAM_HPP

// Reparameterization of [a,b] onto [0,1] that makes a positive combination
// S = Σ α_i w_i of the responsivities constant.
//
//   θ(λ) = C⁻¹ ∫_a^λ S,   C = ∫_a^b S,   φ = θ⁻¹,
//   ŵ_i(ω) = w_i(φ(ω)) φ'(ω)   (equalized responsivities, Σ α_i ŵ_i ≡ C).
//
// For a step w, θ is piecewise linear with corners at the jumps of w, so φ is
// stored exactly as its knots (θ(λ_k), λ_k). The normalized responsivities
// w̃ = w / S give a system on [a,b] whose estimate equals the φ-pullback of
// the equalized estimate, without forming φ at all.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "centroid/error.hpp"
#include "centroid/saddle.hpp"
#include "centroid/stepfn.hpp"

namespace centroid {

struct Reparameterization {
  Vector alpha;
  double C = 0.0;
  std::vector<double> omega;   // knots in [0,1], strictly increasing
  std::vector<double> lambda;  // matching points of [a,b]

  /// φ(ω): piecewise-linear interpolation through the knots.
  double phi(double w) const { return interpolate(omega, lambda, w); }
  /// θ(λ) = φ⁻¹(λ).
  double theta(double l) const { return interpolate(lambda, omega, l); }

 private:
  static double interpolate(const std::vector<double>& xs, const std::vector<double>& ys,
                            double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto k = static_cast<std::size_t>(std::distance(xs.begin(), it));
    if (xs[k - 1] == x) return ys[k - 1];
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + t * (ys[k] - ys[k - 1]);
  }
};

namespace detail {

/// S_k = ⟨α, ω_k⟩ per piece, required strictly positive.
inline Vector positive_combination(const StepFunction& w, const Vector& alpha) {
  if (alpha.size() != w.channels())
    fail(ErrorKind::InvalidArgument, "alpha has " + std::to_string(alpha.size()) +
                                         " entries for " + std::to_string(w.channels()) +
                                         " channels");
  const Vector S = w.values() * alpha;
  const double margin = 1e-12 * S.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < S.size(); ++k)
    if (!(S[k] > margin))
      fail(ErrorKind::NonPositiveCombination,
           "combination sum(alpha_i w_i) = " + std::to_string(S[k]) + " is not positive on piece " +
               std::to_string(k) + " [" + std::to_string(w.breakpoints()[static_cast<std::size_t>(k)]) +
               ", " + std::to_string(w.breakpoints()[static_cast<std::size_t>(k) + 1]) + ")");
  return S;
}

inline DiscreteMeasure normalized_measure(const StepFunction& w, const Vector& S) {
  DiscreteMeasure d;
  d.weights.resize(static_cast<Eigen::Index>(w.pieces()));
  d.points = w.values();
  for (std::size_t k = 0; k < w.pieces(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    d.weights[i] = w.width(k) * S[i];
    d.points.row(i) /= S[i];
  }
  return d;
}

}  // namespace detail

inline Vector default_alpha(Eigen::Index m) { return Vector::Ones(m); }

inline Reparameterization build_equalization(const StepFunction& w, const Vector& alpha) {
  const Vector S = detail::positive_combination(w, alpha);
  Reparameterization rep;
  rep.alpha = alpha;
  const std::size_t N = w.pieces();
  std::vector<double> cumulative(N + 1, 0.0);
  for (std::size_t k = 0; k < N; ++k)
    cumulative[k + 1] = cumulative[k] + w.width(k) * S[static_cast<Eigen::Index>(k)];
  rep.C = cumulative[N];
  rep.omega.resize(N + 1);
  for (std::size_t k = 0; k <= N; ++k) rep.omega[k] = cumulative[k] / rep.C;
  rep.omega.front() = 0.0;
  rep.omega.back() = 1.0;
  rep.lambda = w.breakpoints();
  return rep;
}

/// ŵ on [0,1]: the piece over [θ(λ_{k-1}), θ(λ_k)) is ω_k · φ' = C ω_k / S_k.
inline StepFunction equalized_responsivities(const Reparameterization& rep, const StepFunction& w) {
  if (rep.lambda.size() != w.breakpoints().size())
    fail(ErrorKind::InvalidArgument, "reparameterization was not built from this responsivity");
  const Vector S = w.values() * rep.alpha;
  Matrix v = w.values();
  for (Eigen::Index k = 0; k < v.rows(); ++k) v.row(k) *= rep.C / S[k];
  return StepFunction(rep.omega, std::move(v), w.labels());
}

/// w̃ = w / S on the original interval.
inline StepFunction normalized_responsivities(const StepFunction& w, const Vector& alpha) {
  const Vector S = detail::positive_combination(w, alpha);
  Matrix v = w.values();
  for (Eigen::Index k = 0; k < v.rows(); ++k) v.row(k) /= S[k];
  return w.with_values(std::move(v), w.labels());
}

/// C_{φ⁻¹}: carries a function of ω ∈ [0,1] to the function f(θ(λ)) on [a,b].
inline StepFunction pullback(const Reparameterization& rep, const StepFunction& f) {
  std::vector<double> breaks;
  breaks.reserve(f.breakpoints().size());
  for (double w : f.breakpoints()) breaks.push_back(rep.phi(w));
  breaks.front() = rep.lambda.front();
  breaks.back() = rep.lambda.back();
  return StepFunction(std::move(breaks), f.values(), f.labels());
}

/// Solves ∫_a^b σ(⟨τ, w̃(λ)⟩) w(λ) dλ = y₀ and returns r(λ) = σ(⟨τ₀, w̃(λ)⟩) on
/// the breakpoints of w. τ₀ here equals C times the equalized-domain root.
inline SaddleResult solve_shortcut(const StepFunction& w, const Vector& alpha,
                                   const ResponseVector& y0, Regime regime = Regime::Bounded,
                                   const SaddleOptions& options = {}) {
  const Vector S = detail::positive_combination(w, alpha);
  const auto d = detail::normalized_measure(w, S);
  auto core = detail::solve_measure(d, y0.components, regime, options);
  Matrix v(static_cast<Eigen::Index>(w.pieces()), 1);
  const Vector s = d.points * core.tau;
  for (Eigen::Index k = 0; k < s.size(); ++k) v(k, 0) = sigma(s[k], regime);
  return SaddleResult{core.tau,
                      w.with_values(std::move(v), {"estimate"}),
                      core.residual,
                      core.iterations,
                      core.hessian,
                      regime,
                      core.condition,
                      std::move(core.warnings)};
}

}  // namespace centroid

#endif  // CENTROID_REPARAM_HPP
