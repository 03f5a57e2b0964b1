#ifndef CENTROID_ZONOTOPE_HPP
#define CENTROID_ZONOTOPE_HPP

// The image Z = Λ_w(Q∞) of the unit cube. For a step responsivity it is the
// zonotope {Σ f_k g_k : f_k ∈ [0,1]} with generators g_k = μ_k ω_k.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "centroid/error.hpp"
#include "centroid/stepfn.hpp"

namespace centroid {

class ZonotopeModel {
 public:
  /// Generators as rows of an N×m matrix.
  explicit ZonotopeModel(Matrix generators) : gens_(std::move(generators)) {
    if (gens_.rows() < 1 || gens_.cols() < 1)
      fail(ErrorKind::InvalidArgument, "ZonotopeModel: empty generator set");
    white_ = gens_.colwise().sum().transpose();
  }

  explicit ZonotopeModel(const StepFunction& w) : ZonotopeModel(generators_of(w)) {}

  static Matrix generators_of(const StepFunction& w) {
    Matrix g = w.values();
    for (std::size_t k = 0; k < w.pieces(); ++k) g.row(static_cast<Eigen::Index>(k)) *= w.width(k);
    return g;
  }

  const Matrix& generators() const { return gens_; }
  const Vector& white_point() const { return white_; }
  Eigen::Index dimension() const { return gens_.cols(); }

  /// ψ_Z(u) = Σ_k max(⟨u, g_k⟩, 0); positively homogeneous in u.
  double support(const Vector& u) const {
    if (u.size() != dimension())
      fail(ErrorKind::InvalidArgument, "support: direction has wrong dimension");
    if (u.norm() == 0.0) fail(ErrorKind::InvalidArgument, "support: zero direction");
    return (gens_ * u).cwiseMax(0.0).sum();
  }

  ResponseVector involute(const ResponseVector& y) const {
    return ResponseVector(white_ - y.components, y.labels);
  }

  /// Unit facet normals (one of each ± pair). m=1: {1}; m=2: perpendiculars of
  /// generators; m=3: normalized cross products of non-parallel generator pairs.
  std::vector<Vector> facet_normals() const {
    const Eigen::Index m = dimension();
    if (m > 3)
      fail(ErrorKind::UnsupportedDimension,
           "membership test supports m <= 3; rely on solver diagnostics for m = " +
               std::to_string(m));
    std::vector<Vector> normals;
    if (m == 1) {
      normals.push_back(Vector::Ones(1));
      return normals;
    }
    // Zero generators carry no facet information.
    std::vector<Vector> g;
    for (Eigen::Index k = 0; k < gens_.rows(); ++k)
      if (gens_.row(k).norm() > 0.0) g.push_back(gens_.row(k).transpose());
    if (m == 2) {
      for (const auto& v : g) {
        Vector n(2);
        n << -v[1], v[0];
        normals.push_back(n / n.norm());
      }
      return normals;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Eigen::Vector3d a = g[i];
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        const Eigen::Vector3d b = g[j];
        const Eigen::Vector3d c = a.cross(b);
        const double cn = c.norm();
        if (cn < 1e-12 * a.norm() * b.norm()) continue;
        normals.push_back(Vector(c / cn));
      }
    }
    return normals;
  }

  /// Strict interior test: ⟨u, y⟩ < ψ(u) - tol(u) for every facet normal ±u,
  /// tol(u) = 1e-9 (1 + |ψ(u)|). Boundary points are rejected.
  bool contains_interior(const ResponseVector& y) const {
    if (y.size() != dimension())
      fail(ErrorKind::InvalidArgument, "contains_interior: response has wrong dimension");
    const auto normals = facet_normals();
    if (normals.empty()) return false;  // all generators parallel: Z is a segment
    for (const auto& u : normals) {
      const Vector proj = gens_ * u;
      const double up = proj.cwiseMax(0.0).sum();
      const double down = (-proj).cwiseMax(0.0).sum();
      const double yu = y.components.dot(u);
      if (!(yu < up - 1e-9 * (1.0 + std::fabs(up)))) return false;
      if (!(-yu < down - 1e-9 * (1.0 + std::fabs(down)))) return false;
    }
    return true;
  }

 private:
  Matrix gens_;
  Vector white_;
};

}  // namespace centroid

#endif  // CENTROID_ZONOTOPE_HPP
