#ifndef CENTROID_VOLUME_HPP
#define CENTROID_VOLUME_HPP

// Volumes of cube sections H_y ∩ Qⁿ, H_y = {x : Wx = y}, where row i of the
// m×n matrix W holds the cell integrals of w_i over the uniform n-grid.
//
//   Vol(s) = ‖w₁∧…∧w_m‖ Π_j P((Wᵀs)_j)                  (real s only)
//   vol(y₀) ~ ‖w₁∧…∧w_m‖ (n/2π)^{m/2} det(h''(τ₀))^{-1/2} φ_n(τ₀) e^{n h(τ₀)}
//
// The second line is the saddlepoint asymptotic with f = e^h and f'' = f h''
// substituted, so the f^{m/2} factors cancel. Everything is accumulated as
// logarithms because e^{n h} underflows quickly.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "centroid/error.hpp"
#include "centroid/saddle.hpp"
#include "centroid/specfun.hpp"
#include "centroid/stepfn.hpp"

namespace centroid {

namespace detail {

/// A Aᵀ with Neumaier-compensated row products; n can reach 10⁶.
inline Matrix compensated_gram(const Matrix& A) {
  const Eigen::Index m = A.rows();
  Matrix G(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k <= i; ++k) {
      double sum = 0.0, comp = 0.0;
      for (Eigen::Index j = 0; j < A.cols(); ++j) {
        const double x = A(i, j) * A(k, j);
        const double t = sum + x;
        comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
      }
      G(i, k) = G(k, i) = sum + comp;
    }
  return G;
}

}  // namespace detail

struct FiniteReduction {
  std::size_t n = 0;
  Matrix W;     // m × n, column j = ∫_{I_j} w
  Matrix wjn;   // m × n, column j = n ∫_{I_j} w
  double exterior_norm = 0.0;      // sqrt(det(W Wᵀ))
  double log_exterior_norm = 0.0;

  Eigen::Index dimension() const { return W.rows(); }
};

inline FiniteReduction reduce(const StepFunction& w, std::size_t n) {
  if (n < static_cast<std::size_t>(w.channels()))
    fail(ErrorKind::InvalidArgument, "reduce: need n >= m (n=" + std::to_string(n) +
                                         ", m=" + std::to_string(w.channels()) + ")");
  const StepFunction averaged = project_Pn(w, n);
  FiniteReduction red;
  red.n = n;
  red.wjn = averaged.values().transpose();
  red.W = red.wjn / double(n);
  const Matrix gram = detail::compensated_gram(red.wjn) / (double(n) * double(n));
  if (!channels_independent(gram))
    fail(ErrorKind::RankDeficient, "reduce: rows of W are linearly dependent at n=" +
                                       std::to_string(n));
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::RankDeficient, "reduce: Gram matrix of W is not positive definite");
  red.log_exterior_norm = llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  red.exterior_norm = std::exp(red.log_exterior_norm);
  return red;
}

/// log Vol(s) = log‖∧‖ + Σ_j K(-(Wᵀs)_j), using log P(x) = K(-x).
inline double log_vol_transform(const FiniteReduction& red, const Vector& s) {
  if (s.size() != red.dimension())
    fail(ErrorKind::InvalidArgument, "vol_transform: s has wrong dimension");
  const Vector ws = red.W.transpose() * s;
  double acc = red.log_exterior_norm;
  for (Eigen::Index j = 0; j < ws.size(); ++j) acc += cumulant_K(-ws[j]);
  return acc;
}

inline double vol_transform(const FiniteReduction& red, const Vector& s) {
  return std::exp(log_vol_transform(red, s));
}

/// log φ_n(τ) = Σ_j [K(⟨w_jn, τ⟩) - n ∫_{I_j} K(⟨τ, w(x)⟩) dx]. Cells inside a
/// single piece of w contribute exactly zero and are skipped; a cell with one
/// jump contributes K(λ₁⟨y₂,τ⟩ + λ₂⟨y₁,τ⟩) - λ₁K(⟨y₂,τ⟩) - λ₂K(⟨y₁,τ⟩).
inline double log_phi_n(const FiniteReduction& red, const StepFunction& w, const Vector& tau) {
  if (tau.size() != w.channels() || red.dimension() != w.channels())
    fail(ErrorKind::InvalidArgument, "phi_n: dimension mismatch");
  const std::size_t n = red.n;
  const auto& br = w.breakpoints();
  double acc = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double c0 = double(j) / double(n);
    const double c1 = double(j + 1) / double(n);
    while (k + 1 < w.pieces() && br[k + 1] <= c0) ++k;
    std::size_t last = k;
    while (last + 1 < w.pieces() && br[last + 1] < c1) ++last;
    if (last == k) continue;
    double inner = 0.0;
    for (std::size_t p = k; p <= last; ++p) {
      const double overlap = std::min(c1, br[p + 1]) - std::max(c0, br[p]);
      if (overlap > 0.0) inner += overlap * cumulant_K(w.value(p).dot(tau));
    }
    acc += cumulant_K(red.wjn.col(static_cast<Eigen::Index>(j)).dot(tau)) - double(n) * inner;
  }
  return acc;
}

inline double phi_n_at(const FiniteReduction& red, const StepFunction& w, const Vector& tau) {
  return std::exp(log_phi_n(red, w, tau));
}

struct VolumeEstimate {
  double log_volume = 0.0;
  double volume = 0.0;  // exp(log_volume); 0 or inf when not representable
  Vector tau0;
  double h_at_saddle = 0.0;
  Matrix hessian;
  double log_det_hessian = 0.0;
  double log_phi_n = 0.0;
  double log_exterior_norm = 0.0;
  std::size_t n = 0;
};

inline VolumeEstimate asymptotic_volume(const StepFunction& w, const ResponseVector& y0,
                                        std::size_t n, bool include_phi_n = true,
                                        const SaddleOptions& options = {}) {
  const FiniteReduction red = reduce(w, n);
  const SaddleResult sr = solve_saddlepoint(w, y0, Regime::Bounded, options);

  VolumeEstimate v;
  v.n = n;
  v.tau0 = sr.tau0;
  v.hessian = sr.hessian_at_solution;
  v.h_at_saddle = potential_h(w, sr.tau0, y0);
  Eigen::LLT<Matrix> llt(v.hessian);
  if (llt.info() != Eigen::Success)
    throw std::logic_error("asymptotic_volume: Hessian at the saddlepoint is not positive definite");
  v.log_det_hessian = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  v.log_phi_n = include_phi_n ? log_phi_n(red, w, sr.tau0) : 0.0;
  v.log_exterior_norm = red.log_exterior_norm;

  const double m = double(w.channels());
  v.log_volume = red.log_exterior_norm + 0.5 * m * std::log(double(n) / (2.0 * std::numbers::pi)) -
                 0.5 * v.log_det_hessian + v.log_phi_n + double(n) * v.h_at_saddle;
  v.volume = std::exp(v.log_volume);
  return v;
}

}  // namespace centroid

#endif  // CENTROID_VOLUME_HPP
