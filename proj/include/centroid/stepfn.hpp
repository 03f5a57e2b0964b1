#ifndef CENTROID_STEPFN_HPP
#define CENTROID_STEPFN_HPP

// Piecewise-constant vector-valued functions on a closed interval.
//
// Piece k covers the half-open cell [λ_{k-1}, λ_k) (the final cell is closed)
// and carries a value in R^m. Every integral the solver needs is a finite sum
// Σ_k μ_k · value_k with μ_k = λ_k - λ_{k-1}.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "centroid/error.hpp"
#include "centroid/specfun.hpp"

namespace centroid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline std::vector<std::string> default_labels(Eigen::Index m) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) labels.push_back("w" + std::to_string(i + 1));
  return labels;
}

/// A point of R^m with channel names, e.g. tristimulus values (X, Y, Z).
struct ResponseVector {
  Vector components;
  std::vector<std::string> labels;

  ResponseVector() = default;
  explicit ResponseVector(Vector c, std::vector<std::string> names = {})
      : components(std::move(c)), labels(std::move(names)) {
    if (labels.empty()) labels = default_labels(components.size());
    if (static_cast<Eigen::Index>(labels.size()) != components.size())
      fail(ErrorKind::InvalidArgument, "ResponseVector: label count does not match dimension");
  }

  Eigen::Index size() const { return components.size(); }
  double operator[](Eigen::Index i) const { return components[i]; }
};

class StepFunction {
 public:
  StepFunction(std::vector<double> breakpoints, Matrix values,
               std::vector<std::string> labels = {})
      : breaks_(std::move(breakpoints)), values_(std::move(values)), labels_(std::move(labels)) {
    if (breaks_.size() < 2)
      fail(ErrorKind::InvalidArgument, "StepFunction: need at least one piece");
    for (std::size_t k = 1; k < breaks_.size(); ++k) {
      if (!(breaks_[k] > breaks_[k - 1]) || !std::isfinite(breaks_[k]) ||
          !std::isfinite(breaks_[k - 1]))
        fail(ErrorKind::InvalidArgument,
             "StepFunction: breakpoints must be finite and strictly increasing (index " +
                 std::to_string(k) + ")");
    }
    if (values_.rows() != static_cast<Eigen::Index>(pieces()))
      fail(ErrorKind::InvalidArgument, "StepFunction: " + std::to_string(values_.rows()) +
                                           " value rows for " + std::to_string(pieces()) +
                                           " pieces");
    if (values_.cols() < 1) fail(ErrorKind::InvalidArgument, "StepFunction: no channels");
    if (!values_.allFinite()) fail(ErrorKind::InvalidArgument, "StepFunction: non-finite value");
    if (labels_.empty()) labels_ = default_labels(values_.cols());
    if (static_cast<Eigen::Index>(labels_.size()) != values_.cols())
      fail(ErrorKind::InvalidArgument, "StepFunction: label count does not match channels");
  }

  /// Single-channel function from per-piece scalars.
  static StepFunction scalar(std::vector<double> breakpoints, const std::vector<double>& values,
                             std::string label = "f") {
    Matrix v(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t k = 0; k < values.size(); ++k) v(static_cast<Eigen::Index>(k), 0) = values[k];
    return StepFunction(std::move(breakpoints), std::move(v), {std::move(label)});
  }

  static StepFunction constant(double lo, double hi, const Vector& value,
                               std::vector<std::string> labels = {}) {
    Matrix v = value.transpose();
    return StepFunction({lo, hi}, std::move(v), std::move(labels));
  }

  /// n equal cells on [lo, hi] with the given per-cell values (rows).
  static StepFunction uniform(double lo, double hi, Matrix values,
                              std::vector<std::string> labels = {}) {
    const auto n = static_cast<std::size_t>(values.rows());
    std::vector<double> breaks(n + 1);
    for (std::size_t j = 0; j <= n; ++j) breaks[j] = lo + (hi - lo) * double(j) / double(n);
    breaks[n] = hi;
    return StepFunction(std::move(breaks), std::move(values), std::move(labels));
  }

  double lo() const { return breaks_.front(); }
  double hi() const { return breaks_.back(); }
  std::size_t pieces() const { return breaks_.size() - 1; }
  Eigen::Index channels() const { return values_.cols(); }

  const std::vector<double>& breakpoints() const { return breaks_; }
  const Matrix& values() const { return values_; }
  const std::vector<std::string>& labels() const { return labels_; }

  double width(std::size_t k) const { return breaks_[k + 1] - breaks_[k]; }
  auto value(std::size_t k) const { return values_.row(static_cast<Eigen::Index>(k)); }
  double scalar_value(std::size_t k) const { return values_(static_cast<Eigen::Index>(k), 0); }

  /// Index of the piece whose cell contains x; x = hi() maps to the last piece.
  std::size_t piece_at(double x) const {
    if (x < lo() || x > hi())
      fail(ErrorKind::Domain, "StepFunction: x=" + std::to_string(x) + " outside domain");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    auto k = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
    return std::min(k == 0 ? 0 : k - 1, pieces() - 1);
  }

  Vector at(double x) const { return value(piece_at(x)).transpose(); }
  double operator()(double x) const { return values_(static_cast<Eigen::Index>(piece_at(x)), 0); }

  /// ∫ over the domain, per channel.
  Vector integral() const {
    Vector acc = Vector::Zero(channels());
    for (std::size_t k = 0; k < pieces(); ++k) acc += width(k) * value(k).transpose();
    return acc;
  }

  /// The same function on a finer partition. `breaks` must cover the domain;
  /// each new cell takes the value at its midpoint.
  StepFunction refined(const std::vector<double>& breaks) const {
    Matrix v(static_cast<Eigen::Index>(breaks.size() - 1), channels());
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j)
      v.row(static_cast<Eigen::Index>(j)) = value(piece_at(0.5 * (breaks[j] + breaks[j + 1])));
    return StepFunction(breaks, std::move(v), labels_);
  }

  StepFunction channel(Eigen::Index i) const {
    return StepFunction(breaks_, values_.col(i), {labels_[static_cast<std::size_t>(i)]});
  }

  StepFunction with_values(Matrix values, std::vector<std::string> labels = {}) const {
    return StepFunction(breaks_, std::move(values), std::move(labels));
  }

 private:
  std::vector<double> breaks_;
  Matrix values_;
  std::vector<std::string> labels_;
};

namespace detail {

inline double domain_tolerance(double lo, double hi) {
  return 1e-12 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
}

inline bool same_domain(const StepFunction& u, const StepFunction& v) {
  const double tol = domain_tolerance(u.lo(), u.hi());
  return std::fabs(u.lo() - v.lo()) <= tol && std::fabs(u.hi() - v.hi()) <= tol;
}

inline void require_same_domain(const StepFunction& u, const StepFunction& v, const char* op) {
  if (!same_domain(u, v))
    fail(ErrorKind::MismatchedDomains,
         std::string(op) + ": domains [" + std::to_string(u.lo()) + ", " + std::to_string(u.hi()) +
             "] and [" + std::to_string(v.lo()) + ", " + std::to_string(v.hi()) + "] differ");
}

/// Sorted union of two breakpoint sets; points closer than tol collapse.
inline std::vector<double> merge_breakpoints(const std::vector<double>& a,
                                             const std::vector<double>& b) {
  std::vector<double> all;
  all.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(all));
  const double tol = domain_tolerance(a.front(), a.back());
  std::vector<double> out;
  out.reserve(all.size());
  for (double x : all)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  out.front() = a.front();
  out.back() = a.back();
  return out;
}

}  // namespace detail

/// Both functions re-expressed on the union of their breakpoints.
inline std::pair<StepFunction, StepFunction> common_refinement(const StepFunction& u,
                                                               const StepFunction& v) {
  detail::require_same_domain(u, v, "common_refinement");
  const auto breaks = detail::merge_breakpoints(u.breakpoints(), v.breakpoints());
  return {u.refined(breaks), v.refined(breaks)};
}

/// Λ_w f = ∫ f(x) w(x) dx for a single-channel f.
inline ResponseVector apply_operator(const StepFunction& w, const StepFunction& f) {
  if (f.channels() != 1)
    fail(ErrorKind::InvalidArgument, "apply_operator: f must have exactly one channel");
  auto [wr, fr] = common_refinement(w, f);
  Vector acc = Vector::Zero(w.channels());
  for (std::size_t k = 0; k < wr.pieces(); ++k)
    acc += (wr.width(k) * fr.scalar_value(k)) * wr.value(k).transpose();
  return ResponseVector(std::move(acc), w.labels());
}

/// G_ij = ∫ weight · w_i · w_j. Without a weight this is the plain Gram matrix.
inline Matrix gram_matrix(const StepFunction& w,
                          const std::optional<StepFunction>& weight = std::nullopt) {
  const Eigen::Index m = w.channels();
  Matrix g = Matrix::Zero(m, m);
  if (!weight) {
    for (std::size_t k = 0; k < w.pieces(); ++k) {
      const Vector v = w.value(k).transpose();
      g.noalias() += w.width(k) * v * v.transpose();
    }
    return g;
  }
  if (weight->channels() != 1)
    fail(ErrorKind::InvalidArgument, "gram_matrix: weight must be single-channel");
  auto [wr, nu] = common_refinement(w, *weight);
  for (std::size_t k = 0; k < wr.pieces(); ++k) {
    if (nu.scalar_value(k) < 0.0)
      fail(ErrorKind::InvalidArgument, "gram_matrix: weight must be nonnegative");
    const Vector v = wr.value(k).transpose();
    g.noalias() += (wr.width(k) * nu.scalar_value(k)) * v * v.transpose();
  }
  return g;
}

/// Channels count as dependent when λ_min(Gram) < 1e-10 · trace / m.
inline bool channels_independent(const Matrix& gram) {
  const double trace = gram.trace();
  if (!(trace > 0.0)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= 1e-10 * trace / double(gram.rows());
}

inline bool channels_independent(const StepFunction& w) {
  return channels_independent(gram_matrix(w));
}

/// Cell averages on the uniform n-grid of [0,1]: piece j is n·∫_{I_j} f.
inline StepFunction project_Pn(const StepFunction& f, std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "project_Pn: n must be positive");
  const double tol = detail::domain_tolerance(0.0, 1.0);
  if (std::fabs(f.lo()) > tol || std::fabs(f.hi() - 1.0) > tol)
    fail(ErrorKind::Domain, "project_Pn: domain must be [0,1]; reparameterize first");
  Matrix cells = Matrix::Zero(static_cast<Eigen::Index>(n), f.channels());
  const auto& br = f.breakpoints();
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double c0 = double(j) / double(n);
    const double c1 = double(j + 1) / double(n);
    while (k + 1 < f.pieces() && br[k + 1] <= c0) ++k;
    if (k + 1 == f.pieces() || br[k + 1] >= c1) {
      // cell inside one piece: the average is the piece value itself
      cells.row(static_cast<Eigen::Index>(j)) = f.value(k);
      continue;
    }
    for (std::size_t p = k; p < f.pieces() && br[p] < c1; ++p) {
      const double overlap = std::min(c1, br[p + 1]) - std::max(c0, br[p]);
      if (overlap > 0.0) cells.row(static_cast<Eigen::Index>(j)) += (double(n) * overlap) * f.value(p);
    }
  }
  return StepFunction::uniform(0.0, 1.0, std::move(cells), f.labels());
}

/// ⟨t, w⟩ = Σ t_i w_i as a single-channel function.
inline StepFunction linear_combination(const StepFunction& w, const Vector& t) {
  if (t.size() != w.channels())
    fail(ErrorKind::InvalidArgument, "linear_combination: coefficient dimension mismatch");
  return w.with_values(w.values() * t, {"<t,w>"});
}

/// σ applied piecewise.
inline StepFunction squash(const StepFunction& f, Regime regime = Regime::Bounded) {
  if (f.channels() != 1) fail(ErrorKind::InvalidArgument, "squash: f must be single-channel");
  Matrix v(static_cast<Eigen::Index>(f.pieces()), 1);
  for (std::size_t k = 0; k < f.pieces(); ++k)
    v(static_cast<Eigen::Index>(k), 0) = sigma(f.scalar_value(k), regime);
  return f.with_values(std::move(v), f.labels());
}

/// Pointwise product of a single-channel function with every channel of w.
inline StepFunction multiply(const StepFunction& scalar_fn, const StepFunction& w) {
  if (scalar_fn.channels() != 1)
    fail(ErrorKind::InvalidArgument, "multiply: first factor must be single-channel");
  auto [s, wr] = common_refinement(scalar_fn, w);
  Matrix v = wr.values();
  for (Eigen::Index k = 0; k < v.rows(); ++k) v.row(k) *= s.values()(k, 0);
  return wr.with_values(std::move(v), w.labels());
}

}  // namespace centroid

#endif  // CENTROID_STEPFN_HPP
