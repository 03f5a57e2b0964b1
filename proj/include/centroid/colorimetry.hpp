#ifndef CENTROID_COLORIMETRY_HPP
#define CENTROID_COLORIMETRY_HPP

// Spectral reflectance and light-source estimation from tristimulus values.
//
// A spectra CSV has header `wavelength,<name1>,<name2>,...` on a uniform grid
// a, a+Δ, ..., b. Row λ is the value on the cell [λ, λ+Δ), so a windowed table
// becomes a step function on [a, b+Δ] and every integral is an exact sum.
// The responsivity is w(λ) = I(λ)·(x̄, ȳ, z̄)(λ), optionally mapped to LMS.

#include <Eigen/Dense>

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "centroid/error.hpp"
#include "centroid/reparam.hpp"
#include "centroid/saddle.hpp"
#include "centroid/stepfn.hpp"

namespace centroid {

enum class SpectraKind { CmfSet, Illuminant, ReflectanceSet, EmissionSet };

inline std::string to_string(SpectraKind k) {
  switch (k) {
    case SpectraKind::CmfSet: return "cmf-set";
    case SpectraKind::Illuminant: return "illuminant";
    case SpectraKind::ReflectanceSet: return "reflectance-set";
    case SpectraKind::EmissionSet: return "emission-set";
  }
  return "unknown";
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidArgument, where + ": '" + s + "' is not a number");
  }
}

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

class SpectraTable {
 public:
  SpectraTable(std::vector<double> wavelengths, std::vector<std::string> names, Matrix columns,
               SpectraKind kind)
      : wl_(std::move(wavelengths)), names_(std::move(names)), cols_(std::move(columns)), kind_(kind) {
    if (wl_.size() < 2) fail(ErrorKind::InvalidArgument, "spectra table needs at least two rows");
    if (cols_.rows() != static_cast<Eigen::Index>(wl_.size()) ||
        cols_.cols() != static_cast<Eigen::Index>(names_.size()))
      fail(ErrorKind::InvalidArgument, "spectra table: shape does not match header");
    step_ = (wl_.back() - wl_.front()) / double(wl_.size() - 1);
    if (!(step_ > 0.0)) fail(ErrorKind::InvalidArgument, "spectra table: wavelengths must increase");
    for (std::size_t i = 0; i < wl_.size(); ++i) {
      const double expect = wl_.front() + step_ * double(i);
      if (std::fabs(wl_[i] - expect) > 1e-6 * step_)
        fail(ErrorKind::InvalidArgument, "spectra table: non-uniform grid at line " +
                                             std::to_string(i + 2) + " (wavelength " +
                                             std::to_string(wl_[i]) + ")");
    }
    if (kind_ == SpectraKind::ReflectanceSet) {
      std::string bad;
      int reported = 0;
      for (Eigen::Index r = 0; r < cols_.rows(); ++r)
        for (Eigen::Index c = 0; c < cols_.cols(); ++c) {
          const double v = cols_(r, c);
          if (v >= 0.0 && v <= 1.0) continue;
          if (reported++ < 10)
            bad += " line " + std::to_string(r + 2) + " column '" + names_[static_cast<std::size_t>(c)] +
                   "' = " + std::to_string(v) + ";";
        }
      if (reported > 0)
        fail(ErrorKind::InvalidArgument, "reflectance values outside [0,1] (" +
                                             std::to_string(reported) + " cells):" + bad);
    }
  }

  static SpectraTable load_csv(const std::string& path, SpectraKind kind) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open spectra file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
      ++line_no;
      if (!detail::trim(line).empty()) {
        header = detail::split_csv_line(line);
        break;
      }
    }
    if (header.size() < 2 || header.front() != "wavelength")
      fail(ErrorKind::InvalidArgument, path + ": header must be 'wavelength,<name>,...'");
    std::vector<std::string> names(header.begin() + 1, header.end());
    std::vector<double> wl;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      ++line_no;
      if (detail::trim(line).empty()) continue;
      const auto cells = detail::split_csv_line(line);
      const std::string where = path + ":" + std::to_string(line_no);
      if (cells.size() != header.size())
        fail(ErrorKind::InvalidArgument, where + ": expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(cells.size()));
      wl.push_back(detail::parse_number(cells[0], where));
      std::vector<double> row;
      for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(detail::parse_number(cells[c], where));
      rows.push_back(std::move(row));
    }
    Matrix cols(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < names.size(); ++c)
        cols(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    try {
      return SpectraTable(std::move(wl), std::move(names), std::move(cols), kind);
    } catch (const Error& e) {
      fail(e.kind(), path + ": " + e.what());
    }
  }

  const std::vector<double>& wavelengths() const { return wl_; }
  const std::vector<std::string>& names() const { return names_; }
  const Matrix& columns() const { return cols_; }
  SpectraKind kind() const { return kind_; }
  double step() const { return step_; }
  std::size_t rows() const { return wl_.size(); }

  Eigen::Index index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) fail(ErrorKind::InvalidArgument, "no column named '" + name + "'");
    return static_cast<Eigen::Index>(std::distance(names_.begin(), it));
  }
  Vector column(const std::string& name) const { return cols_.col(index_of(name)); }

  /// Rows with lo ≤ λ ≤ hi.
  SpectraTable window(double lo, double hi) const {
    const double eps = 1e-6 * step_;
    std::vector<double> wl;
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < wl_.size(); ++i)
      if (wl_[i] >= lo - eps && wl_[i] <= hi + eps) {
        wl.push_back(wl_[i]);
        keep.push_back(static_cast<Eigen::Index>(i));
      }
    if (wl.size() < 2)
      fail(ErrorKind::InvalidArgument, "window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                           "] keeps fewer than two rows");
    Matrix cols(static_cast<Eigen::Index>(keep.size()), cols_.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) cols.row(static_cast<Eigen::Index>(r)) = cols_.row(keep[r]);
    return SpectraTable(std::move(wl), names_, std::move(cols), kind_);
  }

  bool same_grid(const SpectraTable& other) const {
    if (other.rows() != rows()) return false;
    for (std::size_t i = 0; i < rows(); ++i)
      if (std::fabs(wl_[i] - other.wl_[i]) > 1e-6 * step_) return false;
    return true;
  }

  /// Cell boundaries λ_0, λ_0+Δ, ..., λ_last+Δ.
  std::vector<double> cell_breaks() const {
    std::vector<double> b(wl_.size() + 1);
    for (std::size_t i = 0; i <= wl_.size(); ++i) b[i] = wl_.front() + step_ * double(i);
    return b;
  }

  StepFunction as_step(const Matrix& values, std::vector<std::string> labels = {}) const {
    return StepFunction(cell_breaks(), values, std::move(labels));
  }
  StepFunction as_step(const std::string& name) const {
    return as_step(Matrix(column(name)), {name});
  }

 private:
  std::vector<double> wl_;
  std::vector<std::string> names_;
  Matrix cols_;
  SpectraKind kind_;
  double step_ = 0.0;
};

inline void write_spectra_csv(std::ostream& out, const std::vector<double>& wavelengths,
                              const std::vector<std::string>& names, const Matrix& columns) {
  char buf[64];
  out << "wavelength";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < wavelengths.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", wavelengths[r]);
    out << buf;
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", columns(static_cast<Eigen::Index>(r), c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

/// Responsivity CSV in one of two layouts:
///   `lo,hi,<ch1>,...`       one row per piece [lo, hi), contiguous;
///   `wavelength,<ch1>,...`  a uniform-grid table, row λ covering [λ, λ+Δ).
inline StepFunction load_responsivity_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open responsivity file '" + path + "'");
  std::string line;
  std::getline(in, line);
  const auto header = detail::split_csv_line(line);
  if (!header.empty() && header.front() == "wavelength") {
    const auto table = SpectraTable::load_csv(path, SpectraKind::CmfSet);
    return table.as_step(table.columns(), table.names());
  }
  if (header.size() < 3 || header[0] != "lo" || header[1] != "hi")
    fail(ErrorKind::InvalidArgument, path + ": header must be 'lo,hi,<channel>,...' or 'wavelength,<channel>,...'");
  std::vector<double> breaks;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (cells.size() != header.size())
      fail(ErrorKind::InvalidArgument, where + ": expected " + std::to_string(header.size()) + " fields");
    const double lo = detail::parse_number(cells[0], where);
    const double hi = detail::parse_number(cells[1], where);
    if (breaks.empty()) breaks.push_back(lo);
    else if (lo != breaks.back())
      fail(ErrorKind::InvalidArgument, where + ": pieces must be contiguous (lo != previous hi)");
    breaks.push_back(hi);
    std::vector<double> row;
    for (std::size_t c = 2; c < cells.size(); ++c) row.push_back(detail::parse_number(cells[c], where));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::InvalidArgument, path + ": no pieces");
  Matrix v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 2));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return StepFunction(std::move(breaks), std::move(v), std::vector<std::string>(header.begin() + 2, header.end()));
}

// ---------------------------------------------------------------------------
// Configuration

enum class EstimatorMethod { Centroid, Hawkyard };
enum class ColorBasis { XYZ, LMS };

inline std::string to_string(EstimatorMethod m) { return m == EstimatorMethod::Centroid ? "centroid" : "hawkyard"; }
inline std::string to_string(ColorBasis b) { return b == ColorBasis::XYZ ? "XYZ" : "LMS"; }

struct EstimatorConfig {
  EstimatorMethod method = EstimatorMethod::Centroid;
  ColorBasis basis = ColorBasis::XYZ;
  bool equalize = true;
  std::optional<Vector> alpha;            // defaults to all ones
  Matrix lms_matrix = Matrix::Identity(3, 3);
  std::string illuminant = "E";           // "E" or a column of the illuminant table
  double window_lo = 400.0;
  double window_hi = 700.0;
  std::optional<double> white_y;          // rescale so the white point's Y equals this
  SaddleOptions solver;

  void validate() const {
    if (!(window_hi > window_lo)) fail(ErrorKind::InvalidArgument, "window: hi must exceed lo");
    if (basis == ColorBasis::LMS) {
      if (lms_matrix.rows() != 3 || lms_matrix.cols() != 3)
        fail(ErrorKind::InvalidArgument, "lms_matrix must be 3x3");
      Eigen::FullPivLU<Matrix> lu(lms_matrix);
      if (!lu.isInvertible()) fail(ErrorKind::InvalidArgument, "lms_matrix is not invertible");
    }
    if (alpha && alpha->size() != 3) fail(ErrorKind::InvalidArgument, "alpha must have 3 entries");
    if (white_y && !(*white_y > 0.0 && std::isfinite(*white_y)))
      fail(ErrorKind::InvalidArgument, "white_y must be positive");
  }
};

inline Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::InvalidArgument, "matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      fail(ErrorKind::InvalidArgument, "matrix rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return M;
}

/// Reads {"matrix": [[...],[...],[...]]} (or a bare array of rows).
inline Matrix load_matrix_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open matrix file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, path + ": " + e.what());
  }
  return matrix_from_json(j.is_object() ? j.at("matrix") : j);
}

inline EstimatorConfig config_from_json(const nlohmann::json& j) {
  EstimatorConfig c;
  try {
    if (j.contains("method")) {
      const auto m = j.at("method").get<std::string>();
      if (m == "centroid") c.method = EstimatorMethod::Centroid;
      else if (m == "hawkyard") c.method = EstimatorMethod::Hawkyard;
      else fail(ErrorKind::InvalidArgument, "unknown method '" + m + "'");
    }
    if (j.contains("basis")) {
      const auto b = j.at("basis").get<std::string>();
      if (b == "XYZ") c.basis = ColorBasis::XYZ;
      else if (b == "LMS") c.basis = ColorBasis::LMS;
      else fail(ErrorKind::InvalidArgument, "unknown basis '" + b + "'");
    }
    if (j.contains("equalize")) c.equalize = j.at("equalize").get<bool>();
    if (j.contains("alpha")) {
      const auto a = j.at("alpha").get<std::vector<double>>();
      c.alpha = Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
    }
    if (j.contains("lms_matrix")) c.lms_matrix = matrix_from_json(j.at("lms_matrix"));
    if (j.contains("illuminant")) c.illuminant = j.at("illuminant").get<std::string>();
    if (j.contains("window")) {
      const auto w = j.at("window").get<std::vector<double>>();
      if (w.size() != 2) fail(ErrorKind::InvalidArgument, "window must be [lo, hi]");
      c.window_lo = w[0];
      c.window_hi = w[1];
    }
    if (j.contains("white_y")) c.white_y = j.at("white_y").get<double>();
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      if (t.contains("abs")) c.solver.tol_abs = t.at("abs").get<double>();
      if (t.contains("rel")) c.solver.tol_rel = t.at("rel").get<double>();
      if (t.contains("max_iterations")) c.solver.max_iterations = t.at("max_iterations").get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const EstimatorConfig& c) {
  nlohmann::json j;
  j["method"] = to_string(c.method);
  j["basis"] = to_string(c.basis);
  j["equalize"] = c.equalize;
  if (c.alpha) j["alpha"] = std::vector<double>(c.alpha->data(), c.alpha->data() + c.alpha->size());
  if (c.basis == ColorBasis::LMS) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < c.lms_matrix.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(c.lms_matrix.cols()));
      for (Eigen::Index k = 0; k < c.lms_matrix.cols(); ++k) row[static_cast<std::size_t>(k)] = c.lms_matrix(r, k);
      rows.push_back(row);
    }
    j["lms_matrix"] = rows;
  }
  j["illuminant"] = c.illuminant;
  j["window"] = {c.window_lo, c.window_hi};
  if (c.white_y) j["white_y"] = *c.white_y;
  j["tolerances"] = {{"abs", c.solver.tol_abs}, {"rel", c.solver.tol_rel},
                     {"max_iterations", c.solver.max_iterations}};
  return j;
}

// ---------------------------------------------------------------------------
// Colorimetric system: grid + responsivity

struct ColorimetricSystem {
  std::vector<double> wavelengths;
  double step = 0.0;
  StepFunction w;                 // I·CMF in the chosen basis, N cells × 3
  Matrix to_basis;                // maps XYZ to the basis (identity for XYZ)
  Vector white_point;             // Λ_w 1

  Vector to_xyz(const Vector& y) const { return to_basis.lu().solve(y); }
  Vector from_xyz(const Vector& xyz) const { return to_basis * xyz; }
};

/// Illuminant values on the windowed CMF grid; "E" is the equal-energy I ≡ 1.
inline Vector illuminant_on(const SpectraTable& cmf_window, const std::optional<SpectraTable>& illuminants,
                            const std::string& name) {
  if (name == "E") return Vector::Ones(static_cast<Eigen::Index>(cmf_window.rows()));
  if (!illuminants) fail(ErrorKind::InvalidArgument, "illuminant '" + name + "' needs an illuminant table");
  const SpectraTable win = illuminants->window(cmf_window.wavelengths().front(), cmf_window.wavelengths().back());
  if (!win.same_grid(cmf_window))
    fail(ErrorKind::MismatchedDomains,
         "illuminant grid (step " + std::to_string(illuminants->step()) +
             ") does not match the CMF grid (step " + std::to_string(cmf_window.step()) + ")");
  return win.column(name);
}

inline ColorimetricSystem build_system(const SpectraTable& cmf, const std::optional<SpectraTable>& illuminants,
                                       const EstimatorConfig& cfg) {
  cfg.validate();
  const SpectraTable win = cmf.window(cfg.window_lo, cfg.window_hi);
  if (win.columns().cols() != 3) fail(ErrorKind::InvalidArgument, "CMF table must have three columns");
  const Vector I = illuminant_on(win, illuminants, cfg.illuminant);
  Matrix xyz = I.asDiagonal() * win.columns();
  if (cfg.white_y) xyz *= *cfg.white_y / (win.step() * xyz.col(1).sum());
  ColorimetricSystem sys{win.wavelengths(), win.step(), win.as_step(xyz, {"X", "Y", "Z"}),
                         Matrix::Identity(3, 3), Vector()};
  if (cfg.basis == ColorBasis::LMS) {
    sys.to_basis = cfg.lms_matrix;
    sys.w = sys.w.with_values(xyz * cfg.lms_matrix.transpose(), {"L", "M", "S"});
  }
  sys.white_point = sys.w.integral();
  return sys;
}

inline StepFunction spectrum_on(const ColorimetricSystem& sys, const Vector& values, std::string label = "r") {
  if (values.size() != static_cast<Eigen::Index>(sys.wavelengths.size()))
    fail(ErrorKind::MismatchedDomains, "spectrum has " + std::to_string(values.size()) +
                                           " samples, grid has " + std::to_string(sys.wavelengths.size()));
  return sys.w.with_values(Matrix(values), {std::move(label)});
}

inline ResponseVector tristimulus(const ColorimetricSystem& sys, const StepFunction& r) {
  return apply_operator(sys.w, r);
}

/// XYZ = Σ Δ I r (x̄, ȳ, z̄) for tables sharing one grid.
inline ResponseVector tristimulus(const SpectraTable& cmf, const Vector& illuminant, const Vector& reflectance) {
  const auto N = static_cast<Eigen::Index>(cmf.rows());
  if (illuminant.size() != N || reflectance.size() != N)
    fail(ErrorKind::MismatchedDomains, "tristimulus: illuminant/reflectance do not share the CMF grid");
  const Vector weight = cmf.step() * illuminant.cwiseProduct(reflectance);
  return ResponseVector(cmf.columns().transpose() * weight, cmf.names());
}

// ---------------------------------------------------------------------------
// Estimators

struct ReflectanceEstimate {
  StepFunction estimate;
  Vector tau0;
  int iterations = 0;
  double relative_residual = 0.0;  // |Λ_w r - y|∞ / |y|∞
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<std::string> warnings;
};

inline Vector alpha_of(const EstimatorConfig& cfg) { return cfg.alpha ? *cfg.alpha : default_alpha(3); }

inline double relative_error(const Vector& got, const Vector& want) {
  const double scale = want.cwiseAbs().maxCoeff();
  const double err = (got - want).cwiseAbs().maxCoeff();
  return scale > 0.0 ? err / scale : err;
}

inline ReflectanceEstimate estimate_reflectance(const ColorimetricSystem& sys, const EstimatorConfig& cfg,
                                                const ResponseVector& y) {
  const SaddleResult sr = cfg.equalize
                              ? solve_shortcut(sys.w, alpha_of(cfg), y, Regime::Bounded, cfg.solver)
                              : solve_saddlepoint(sys.w, y, Regime::Bounded, cfg.solver);
  ReflectanceEstimate out{sr.estimate.with_values(sr.estimate.values(), {"reflectance"}),
                          sr.tau0, sr.iterations, 0.0, sr.estimate.values().minCoeff(),
                          sr.estimate.values().maxCoeff(), sr.warnings};
  out.relative_residual = relative_error(tristimulus(sys, out.estimate).components, y.components);
  return out;
}

struct HawkyardResult {
  StepFunction clamped;
  StepFunction raw;
  double clamp_fraction = 0.0;
  Vector alpha;
  double relative_residual = 0.0;  // pre-clamp
};

/// raw = Σ α_j w̃_j with w̃ = w / Σ_i w_i and (∫ w w̃ᵀ) α = y.
inline HawkyardResult hawkyard_estimate(const ColorimetricSystem& sys, const ResponseVector& y) {
  const StepFunction& w = sys.w;
  const Vector S = w.values().rowwise().sum();
  for (Eigen::Index k = 0; k < S.size(); ++k)
    if (!(S[k] > 0.0))
      fail(ErrorKind::NonPositiveCombination,
           "hawkyard: channel sum is not positive at " + std::to_string(sys.wavelengths[static_cast<std::size_t>(k)]) + " nm");
  Matrix wt = w.values();
  for (Eigen::Index k = 0; k < wt.rows(); ++k) wt.row(k) /= S[k];
  Matrix M = Matrix::Zero(w.channels(), w.channels());
  for (std::size_t k = 0; k < w.pieces(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    M += w.width(k) * w.values().row(i).transpose() * wt.row(i);
  }
  Eigen::FullPivLU<Matrix> lu(M);
  if (!lu.isInvertible()) fail(ErrorKind::RankDeficient, "hawkyard: singular 3x3 system");
  HawkyardResult h{w.with_values(Matrix(wt.rows(), 1), {"reflectance"}),
                   w.with_values(Matrix(wt.rows(), 1), {"reflectance"}), 0.0, lu.solve(y.components), 0.0};
  const Vector raw = wt * h.alpha;
  const Vector clamped = raw.cwiseMax(0.0).cwiseMin(1.0);
  std::size_t altered = 0;
  for (Eigen::Index k = 0; k < raw.size(); ++k) altered += clamped[k] != raw[k];
  h.raw = w.with_values(Matrix(raw), {"reflectance"});
  h.clamped = w.with_values(Matrix(clamped), {"reflectance"});
  h.clamp_fraction = double(altered) / double(raw.size());
  h.relative_residual = relative_error(tristimulus(sys, h.raw).components, y.components);
  return h;
}

struct LightsourceEstimate {
  bool estimable = false;
  std::optional<StepFunction> spectrum;
  Vector tau0;
  double relative_residual = 0.0;
  std::string reason;
};

/// Emission spectrum -1/⟨τ₀, w̃⟩ (equalized) or -1/⟨τ₀, w⟩ reproducing y, or
/// estimable = false when the unbounded saddlepoint equation has no root.
inline LightsourceEstimate estimate_lightsource(const ColorimetricSystem& sys, const EstimatorConfig& cfg,
                                                const ResponseVector& y) {
  LightsourceEstimate out;
  try {
    const SaddleResult sr = cfg.equalize
                                ? solve_shortcut(sys.w, alpha_of(cfg), y, Regime::Unbounded, cfg.solver)
                                : solve_saddlepoint(sys.w, y, Regime::Unbounded, cfg.solver);
    out.estimable = true;
    out.tau0 = sr.tau0;
    out.spectrum = sr.estimate.with_values(sr.estimate.values(), {"emission"});
    out.relative_residual = relative_error(tristimulus(sys, *out.spectrum).components, y.components);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotEstimable) throw;
    out.reason = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residual statistics over a reflectance set

struct SampleResidual {
  std::string name;
  bool ok = false;
  std::string error;
  Vector response;
  double max_abs_residual = 0.0;
  double mean_abs_residual = 0.0;
  double clamp_fraction = 0.0;       // Hawkyard only
  double response_residual = 0.0;    // relative tristimulus mismatch of the estimate
};

struct ResidualStats {
  std::vector<double> wavelengths;
  Vector mean_residual;
  Vector mean_positive;   // mean of max(residual, 0)
  Vector mean_negative;   // mean of min(residual, 0)
  Vector mean_abs;
  std::size_t succeeded = 0;
  std::vector<SampleResidual> samples;
};

struct SampleOutcome {
  SampleResidual summary;
  Vector residual;  // estimated - true, per cell
};

inline SampleOutcome residual_of_sample(const ColorimetricSystem& sys, const EstimatorConfig& cfg,
                                        const std::string& name, const Vector& truth) {
  SampleOutcome out;
  out.summary.name = name;
  try {
    const StepFunction r = spectrum_on(sys, truth);
    const ResponseVector y = tristimulus(sys, r);
    out.summary.response = y.components;
    Vector est;
    if (cfg.method == EstimatorMethod::Centroid) {
      const auto e = estimate_reflectance(sys, cfg, y);
      if (!(e.min_value > 0.0 && e.max_value < 1.0))
        throw std::logic_error("centroid estimate left (0,1) for sample '" + name + "'");
      est = e.estimate.values().col(0);
      out.summary.response_residual = e.relative_residual;
    } else {
      const auto h = hawkyard_estimate(sys, y);
      est = h.clamped.values().col(0);
      out.summary.clamp_fraction = h.clamp_fraction;
      out.summary.response_residual = h.relative_residual;
    }
    out.residual = est - truth;
    out.summary.max_abs_residual = out.residual.cwiseAbs().maxCoeff();
    out.summary.mean_abs_residual = out.residual.cwiseAbs().mean();
    out.summary.ok = true;
  } catch (const Error& e) {
    out.summary.error = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return out;
}

inline ResidualStats residual_stats(const SpectraTable& dataset, const ColorimetricSystem& sys,
                                    const EstimatorConfig& cfg, std::size_t threads = 1) {
  if (dataset.kind() != SpectraKind::ReflectanceSet)
    fail(ErrorKind::InvalidArgument, "residual_stats needs a reflectance set");
  const SpectraTable win = dataset.window(sys.wavelengths.front(), sys.wavelengths.back());
  if (win.rows() != sys.wavelengths.size())
    fail(ErrorKind::MismatchedDomains, "dataset grid does not cover the estimator grid");
  for (std::size_t i = 0; i < win.rows(); ++i)
    if (std::fabs(win.wavelengths()[i] - sys.wavelengths[i]) > 1e-6 * sys.step)
      fail(ErrorKind::MismatchedDomains, "dataset grid does not match the estimator grid");

  const auto count = static_cast<std::size_t>(win.columns().cols());
  std::vector<SampleOutcome> outcomes(count);
  auto work = [&](std::size_t s) {
    outcomes[s] = residual_of_sample(sys, cfg, win.names()[s], win.columns().col(static_cast<Eigen::Index>(s)));
  };
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t s = 0; s < count; ++s) work(s);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t]() {
        for (std::size_t s = t; s < count; s += threads) work(s);
      });
    for (auto& th : pool) th.join();
  }

  ResidualStats st;
  st.wavelengths = sys.wavelengths;
  const auto N = static_cast<Eigen::Index>(sys.wavelengths.size());
  std::vector<detail::CompensatedSum> sr(static_cast<std::size_t>(N)), sp(sr), sn(sr), sa(sr);
  for (auto& o : outcomes) {
    if (o.summary.ok) {
      ++st.succeeded;
      for (Eigen::Index k = 0; k < N; ++k) {
        const double r = o.residual[k];
        const auto i = static_cast<std::size_t>(k);
        sr[i].add(r);
        sp[i].add(std::max(r, 0.0));
        sn[i].add(std::min(r, 0.0));
        sa[i].add(std::fabs(r));
      }
    }
    st.samples.push_back(std::move(o.summary));
  }
  const double denom = st.succeeded > 0 ? double(st.succeeded) : 1.0;
  st.mean_residual.resize(N);
  st.mean_positive.resize(N);
  st.mean_negative.resize(N);
  st.mean_abs.resize(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    st.mean_residual[k] = sr[i].value() / denom;
    st.mean_positive[k] = sp[i].value() / denom;
    st.mean_negative[k] = sn[i].value() / denom;
    st.mean_abs[k] = sa[i].value() / denom;
  }
  return st;
}

}  // namespace centroid

#endif  // CENTROID_COLORIMETRY_HPP
