#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "centroid/centroid.hpp"
#include "cli_output.hpp"

using namespace centroid;
using centroid::cli::json;
using centroid::cli::LogLevel;
using centroid::cli::to_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolver = 4;
constexpr int kExitInternal = 1;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::BoundaryOrExteriorResponse:
    case ErrorKind::NotEstimable:
    case ErrorKind::Infeasible:
      return kExitInfeasible;
    case ErrorKind::MaxIterations:
      return kExitSolver;
    default:
      return kExitInput;
  }
}

std::string default_data_dir() {
  if (const char* env = std::getenv("CENTROID_DATA_DIR"); env && *env) return env;
#ifdef CENTROID_DEFAULT_DATA_DIR
  return CENTROID_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

void emit(const json& j) {
  cli::write_json(std::cout, j);
  std::cout << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Options shared by every colorimetric subcommand.
struct ColorOptions {
  std::string cmf;
  std::string illuminants;
  std::string config;
  std::string illuminant;
  std::string basis;
  std::string lms_matrix;
  std::string method;
  std::vector<double> window;
  std::vector<double> alpha;
  std::optional<double> white_y;
  bool equalize = false;
  bool no_equalize = false;
};

void add_color_options(CLI::App* app, ColorOptions& o) {
  app->add_option("--cmf", o.cmf, "colour-matching functions CSV (wavelength,x_bar,y_bar,z_bar)");
  app->add_option("--illuminants", o.illuminants, "illuminant table CSV");
  app->add_option("--config", o.config, "estimator configuration JSON");
  app->add_option("--illuminant", o.illuminant, "illuminant name, or E for equal energy");
  app->add_option("--basis", o.basis, "XYZ or LMS")->check(CLI::IsMember({"XYZ", "LMS", "xyz", "lms"}));
  app->add_option("--lms-matrix", o.lms_matrix, "3x3 XYZ-to-LMS matrix JSON (default: bundled HPE)");
  app->add_option("--window", o.window, "wavelength window lo,hi")->delimiter(',')->expected(2);
  app->add_option("--alpha", o.alpha, "positive-combination weights a,b,c")->delimiter(',')->expected(3);
  app->add_option("--white-y", o.white_y, "scale responsivities so the white point has this Y");
  app->add_flag("--equalize", o.equalize, "solve with equalized responsivities (default)");
  app->add_flag("--no-equalize", o.no_equalize, "solve with the raw responsivities")->excludes("--equalize");
}

struct Context {
  EstimatorConfig cfg;
  SpectraTable cmf;
  std::optional<SpectraTable> illuminants;
  ColorimetricSystem sys;
};

Context make_context(const ColorOptions& o, const std::string& data_dir) {
  EstimatorConfig cfg;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) fail(ErrorKind::Io, "cannot open config '" + o.config + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      fail(ErrorKind::InvalidArgument, o.config + ": " + e.what());
    }
    cfg = config_from_json(j);
  }
  if (!o.illuminant.empty()) cfg.illuminant = o.illuminant;
  if (!o.basis.empty()) cfg.basis = (o.basis == "LMS" || o.basis == "lms") ? ColorBasis::LMS : ColorBasis::XYZ;
  if (cfg.basis == ColorBasis::LMS && (!o.lms_matrix.empty() || cfg.lms_matrix.isIdentity()))
    cfg.lms_matrix = load_matrix_json(o.lms_matrix.empty() ? data_dir + "/hpe_matrix.json" : o.lms_matrix);
  if (o.window.size() == 2) {
    cfg.window_lo = o.window[0];
    cfg.window_hi = o.window[1];
  }
  if (o.alpha.size() == 3) cfg.alpha = to_vector(o.alpha);
  if (o.white_y) cfg.white_y = o.white_y;
  if (o.equalize) cfg.equalize = true;
  if (o.no_equalize) cfg.equalize = false;
  if (!o.method.empty()) cfg.method = o.method == "hawkyard" ? EstimatorMethod::Hawkyard : EstimatorMethod::Centroid;
  cfg.validate();

  const std::string cmf_path = o.cmf.empty() ? data_dir + "/cie1931_2deg_5nm.csv" : o.cmf;
  SpectraTable cmf = SpectraTable::load_csv(cmf_path, SpectraKind::CmfSet);
  std::optional<SpectraTable> ill;
  if (cfg.illuminant != "E")
    ill = SpectraTable::load_csv(o.illuminants.empty() ? data_dir + "/cie_illuminants.csv" : o.illuminants,
                                 SpectraKind::Illuminant);
  cli::log(LogLevel::Info, "cmf " + cmf_path + ", illuminant " + cfg.illuminant + ", basis " + to_string(cfg.basis));
  ColorimetricSystem sys = build_system(cmf, ill, cfg);
  return Context{cfg, std::move(cmf), std::move(ill), std::move(sys)};
}

// --xyz is converted into the working basis; --response is taken as-is.
ResponseVector response_from(const Context& c, const std::vector<double>& xyz, const std::vector<double>& native) {
  if (!xyz.empty() && !native.empty()) fail(ErrorKind::InvalidArgument, "give either --xyz or --response");
  if (xyz.empty() && native.empty()) fail(ErrorKind::InvalidArgument, "a response is required (--xyz or --response)");
  const std::vector<double>& v = xyz.empty() ? native : xyz;
  if (v.size() != 3) fail(ErrorKind::InvalidArgument, "response must have 3 components");
  const Vector y = xyz.empty() ? to_vector(v) : c.sys.from_xyz(to_vector(v));
  return ResponseVector(y, c.sys.w.labels());
}

json system_json(const Context& c) {
  return json{{"config", config_to_json(c.cfg)},
              {"cells", c.sys.wavelengths.size()},
              {"step", c.sys.step},
              {"white_point", to_json(c.sys.white_point)}};
}

void write_spectrum(const std::string& path, const std::vector<double>& wl, const std::string& name,
                    const Vector& v) {
  auto out = open_out(path);
  write_spectra_csv(out, wl, {name}, Matrix(v));
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  ColorOptions color;
  std::vector<double> xyz, response;
  std::string out;
};

int cmd_estimate(const EstimateArgs& a, const std::string& data_dir) {
  const Context c = make_context(a.color, data_dir);
  const ResponseVector y = response_from(c, a.xyz, a.response);
  json j = system_json(c);
  j["response"] = to_json(y.components);
  Vector values;
  if (c.cfg.method == EstimatorMethod::Centroid) {
    const auto e = estimate_reflectance(c.sys, c.cfg, y);
    for (const auto& w : e.warnings) cli::log(LogLevel::Warn, w);
    values = e.estimate.values().col(0);
    j["method"] = "centroid";
    j["tau0"] = to_json(e.tau0);
    j["iterations"] = e.iterations;
    j["relative_residual"] = e.relative_residual;
    j["min"] = e.min_value;
    j["max"] = e.max_value;
    j["warnings"] = e.warnings;
  } else {
    const auto h = hawkyard_estimate(c.sys, y);
    values = h.clamped.values().col(0);
    j["method"] = "hawkyard";
    j["alpha"] = to_json(h.alpha);
    j["relative_residual_before_clamp"] = h.relative_residual;
    j["clamp_fraction"] = h.clamp_fraction;
    j["raw_min"] = h.raw.values().minCoeff();
    j["raw_max"] = h.raw.values().maxCoeff();
    j["response_of_clamped"] = to_json(tristimulus(c.sys, h.clamped).components);
  }
  if (!a.out.empty()) {
    write_spectrum(a.out, c.sys.wavelengths, "reflectance", values);
    j["output"] = a.out;
  } else {
    j["estimate"] = to_json(values);
  }
  j["wavelengths"] = c.sys.wavelengths;
  emit(j);
  return kExitOk;
}

struct BatchArgs {
  ColorOptions color;
  std::string dataset, out, estimates_out;
  std::size_t threads = 1;
};

int cmd_batch(const BatchArgs& a, const std::string& data_dir) {
  const Context c = make_context(a.color, data_dir);
  const SpectraTable data = SpectraTable::load_csv(a.dataset, SpectraKind::ReflectanceSet);
  const ResidualStats st = residual_stats(data, c.sys, c.cfg, a.threads);
  json j = system_json(c);
  j["method"] = to_string(c.cfg.method);
  j["dataset"] = a.dataset;
  j["samples"] = st.samples.size();
  j["succeeded"] = st.succeeded;
  json per = json::array();
  for (const auto& s : st.samples) {
    json e{{"name", s.name}, {"ok", s.ok}};
    if (s.ok) {
      e["max_abs_residual"] = s.max_abs_residual;
      e["mean_abs_residual"] = s.mean_abs_residual;
      e["response_residual"] = s.response_residual;
      if (c.cfg.method == EstimatorMethod::Hawkyard) e["clamp_fraction"] = s.clamp_fraction;
    } else {
      e["error"] = s.error;
      cli::log(LogLevel::Warn, s.name + ": " + s.error);
    }
    per.push_back(e);
  }
  j["per_sample"] = per;
  j["overall_mean_abs"] = st.mean_abs.mean();
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    Matrix cols(static_cast<Eigen::Index>(st.wavelengths.size()), 4);
    cols << st.mean_residual, st.mean_positive, st.mean_negative, st.mean_abs;
    write_spectra_csv(out, st.wavelengths, {"mean_residual", "mean_positive", "mean_negative", "mean_abs"}, cols);
    j["output"] = a.out;
  } else {
    j["wavelengths"] = st.wavelengths;
    j["mean_residual"] = to_json(st.mean_residual);
    j["mean_positive"] = to_json(st.mean_positive);
    j["mean_negative"] = to_json(st.mean_negative);
    j["mean_abs"] = to_json(st.mean_abs);
  }
  emit(j);
  return st.succeeded == st.samples.size() ? kExitOk : kExitInfeasible;
}

struct InsideArgs {
  ColorOptions color;
  std::vector<double> xyz, response;
};

int cmd_inside(const InsideArgs& a, const std::string& data_dir) {
  const Context c = make_context(a.color, data_dir);
  const ResponseVector y = response_from(c, a.xyz, a.response);
  const ZonotopeModel z(c.sys.w);
  const bool inside = z.contains_interior(y);
  json j{{"response", to_json(y.components)}, {"white_point", to_json(c.sys.white_point)}, {"inside", inside}};
  emit(j);
  if (!inside) cli::log(LogLevel::Info, "response is not in the interior of the object-colour solid");
  return inside ? kExitOk : kExitInfeasible;
}

struct EqualizeArgs {
  ColorOptions color;
  std::string out;
};

int cmd_equalize(const EqualizeArgs& a, const std::string& data_dir) {
  const Context c = make_context(a.color, data_dir);
  const Vector alpha = alpha_of(c.cfg);
  const Reparameterization rep = build_equalization(c.sys.w, alpha);
  const StepFunction eq = equalized_responsivities(rep, c.sys.w);
  const StepFunction nw = normalized_responsivities(c.sys.w, alpha);
  json j = system_json(c);
  j["alpha"] = to_json(alpha);
  j["C"] = rep.C;
  j["omega_knots"] = rep.omega;
  j["lambda_knots"] = rep.lambda;
  j["equalized_values"] = to_json(eq.values());
  j["equalized_combination"] = to_json(Vector(eq.values() * alpha));
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    out << "wavelength";
    for (const auto& l : nw.labels()) out << "," << l;
    out << "\n";
    for (std::size_t k = 0; k < nw.pieces(); ++k) {
      out << cli::format_double(c.sys.wavelengths[k]);
      for (Eigen::Index i = 0; i < nw.channels(); ++i) out << "," << cli::format_double(nw.value(k)[i]);
      out << "\n";
    }
    j["normalized_output"] = a.out;
  }
  emit(j);
  return kExitOk;
}

struct SolveArgs {
  std::string w, out;
  std::vector<double> y;
  bool unbounded = false;
};

int cmd_solve(const SolveArgs& a) {
  const StepFunction w = load_responsivity_csv(a.w);
  const ResponseVector y(to_vector(a.y), w.labels());
  const SaddleResult r = solve_saddlepoint(w, y, a.unbounded ? Regime::Unbounded : Regime::Bounded);
  for (const auto& msg : r.warnings) cli::log(LogLevel::Warn, msg);
  json j{{"regime", a.unbounded ? "unbounded" : "bounded"},
         {"tau0", to_json(r.tau0)},
         {"iterations", r.iterations},
         {"response_residual", to_json(r.response_residual)},
         {"condition_estimate", r.condition_estimate},
         {"breakpoints", w.breakpoints()},
         {"warnings", r.warnings}};
  const Vector v = r.estimate.values().col(0);
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    out << "lo,hi,estimate\n";
    for (std::size_t k = 0; k < r.estimate.pieces(); ++k)
      out << cli::format_double(r.estimate.breakpoints()[k]) << "," << cli::format_double(r.estimate.breakpoints()[k + 1])
          << "," << cli::format_double(v[static_cast<Eigen::Index>(k)]) << "\n";
    j["output"] = a.out;
  } else {
    j["estimate"] = to_json(v);
  }
  emit(j);
  return kExitOk;
}

struct VolumeArgs {
  std::string w;
  std::vector<double> y;
  std::size_t n = 0;
  bool no_phi = false;
  bool exact = false;
};

int cmd_volume(const VolumeArgs& a) {
  const StepFunction w = load_responsivity_csv(a.w);
  const ResponseVector y(to_vector(a.y));
  const VolumeEstimate v = asymptotic_volume(w, y, a.n, !a.no_phi);
  json j{{"n", a.n},
         {"include_phi_n", !a.no_phi},
         {"tau0", to_json(v.tau0)},
         {"log_volume", v.log_volume},
         {"volume", v.volume},
         {"h_at_saddle", v.h_at_saddle},
         {"log_det_hessian", v.log_det_hessian},
         {"log_phi_n", v.log_phi_n},
         {"log_exterior_norm", v.log_exterior_norm}};
  if (a.exact) {
    if (w.channels() != 1) fail(ErrorKind::UnsupportedDimension, "--exact needs a single-channel responsivity");
    using Big = boost::multiprecision::cpp_bin_float_100;
    const FiniteReduction red = reduce(w, a.n);
    const Big exact = exact_section_volume_m1<Big>(red, a.y[0]);
    if (!(exact > 0)) fail(ErrorKind::BoundaryOrExteriorResponse, "exact section volume is zero at this response");
    const double log_exact = static_cast<double>(log(exact));
    j["exact_log_volume"] = log_exact;
    j["exact_volume"] = static_cast<double>(exact);
    j["log_error"] = v.log_volume - log_exact;
  }
  emit(j);
  return kExitOk;
}

struct VerifyArgs {
  std::string w, out;
  std::vector<double> y;
  std::size_t n = 0;
  HitAndRunOptions opt;
};

int cmd_verify(const VerifyArgs& a) {
  const StepFunction w = load_responsivity_csv(a.w);
  const ResponseVector y(to_vector(a.y));
  cli::log(LogLevel::Info, "hit-and-run: n=" + std::to_string(a.n) + " samples=" + std::to_string(a.opt.sample_count) +
                               " chains=" + std::to_string(a.opt.chains) + " seed=" + std::to_string(a.opt.seed));
  const CentroidReport r = empirical_centroid_vs_formula(w, y, a.n, a.opt);
  json j{{"n", a.n},
         {"tau0", to_json(r.tau0)},
         {"max_abs_z", r.max_abs_z},
         {"l1_distance", r.l1_distance},
         {"samples", r.stats.sample_count},
         {"seed", r.stats.seed},
         {"chains", r.stats.chains},
         {"burn_in", r.stats.burn_in},
         {"thinning", r.stats.thinning},
         {"constraint_violation_max", r.stats.constraint_violation_max},
         {"degenerate_chords", r.stats.degenerate_chords}};
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    out << "cell,sampled_mean,predicted,standard_error,z\n";
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
      const auto& c = r.cells[k];
      out << k << "," << cli::format_double(c.sampled_mean) << "," << cli::format_double(c.predicted) << ","
          << cli::format_double(c.standard_error) << "," << cli::format_double(c.z) << "\n";
    }
    j["output"] = a.out;
  } else {
    json cells = json::array();
    for (const auto& c : r.cells)
      cells.push_back({{"sampled_mean", c.sampled_mean},
                       {"predicted", c.predicted},
                       {"standard_error", c.standard_error},
                       {"z", c.z}});
    j["cells"] = cells;
  }
  emit(j);
  return kExitOk;
}

struct LightArgs {
  ColorOptions color;
  std::vector<double> xyz, response;
  std::string out;
};

int cmd_lightsource(const LightArgs& a, const std::string& data_dir) {
  const Context c = make_context(a.color, data_dir);
  const ResponseVector y = response_from(c, a.xyz, a.response);
  const LightsourceEstimate e = estimate_lightsource(c.sys, c.cfg, y);
  json j = system_json(c);
  j["response"] = to_json(y.components);
  j["estimable"] = e.estimable;
  if (!e.estimable) {
    j["reason"] = e.reason;
    emit(j);
    std::cerr << "centroid: error kind=NotEstimable: " << e.reason << "\n";
    return kExitInfeasible;
  }
  j["tau0"] = to_json(e.tau0);
  j["relative_residual"] = e.relative_residual;
  const Vector v = e.spectrum->values().col(0);
  if (!a.out.empty()) {
    write_spectrum(a.out, c.sys.wavelengths, "emission", v);
    j["output"] = a.out;
  } else {
    j["wavelengths"] = c.sys.wavelengths;
    j["spectrum"] = to_json(v);
  }
  emit(j);
  return kExitOk;
}

struct TristimulusArgs {
  ColorOptions color;
  std::string spectrum;
  bool emission = false;
};

int cmd_tristimulus(const TristimulusArgs& a, const std::string& data_dir) {
  const Context c = make_context(a.color, data_dir);
  const SpectraTable s = SpectraTable::load_csv(a.spectrum, a.emission ? SpectraKind::EmissionSet
                                                                       : SpectraKind::ReflectanceSet);
  const SpectraTable win = s.window(c.sys.wavelengths.front(), c.sys.wavelengths.back());
  if (win.rows() != c.sys.wavelengths.size())
    fail(ErrorKind::MismatchedDomains, a.spectrum + ": grid does not cover the working window");
  json out = json::array();
  for (Eigen::Index k = 0; k < win.columns().cols(); ++k) {
    const auto r = tristimulus(c.sys, spectrum_on(c.sys, win.columns().col(k)));
    json e{{"name", win.names()[static_cast<std::size_t>(k)]}, {"response", to_json(r.components)}};
    e["xyz"] = to_json(c.sys.to_xyz(r.components));
    out.push_back(e);
  }
  json j = system_json(c);
  j["spectra"] = out;
  emit(j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centroid spectral estimation from responses of step-function responsivities"};
  app.require_subcommand(1);
  std::string level = "warn";
  std::string data_dir = default_data_dir();
  app.add_option("--log-level", level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.add_option("--data-dir", data_dir, "directory holding the bundled tables (env CENTROID_DATA_DIR)");

  EstimateArgs est;
  auto* s_est = app.add_subcommand("estimate", "centroid (or Hawkyard) reflectance for one response");
  add_color_options(s_est, est.color);
  s_est->add_option("--method", est.color.method, "centroid or hawkyard")->check(CLI::IsMember({"centroid", "hawkyard"}));
  s_est->add_option("--xyz", est.xyz, "tristimulus X,Y,Z")->delimiter(',');
  s_est->add_option("--response", est.response, "response in the working basis")->delimiter(',');
  s_est->add_option("--out", est.out, "write the estimate CSV here");

  BatchArgs bat;
  auto* s_bat = app.add_subcommand("batch", "residual statistics over a reflectance set");
  add_color_options(s_bat, bat.color);
  s_bat->add_option("--method", bat.color.method, "centroid or hawkyard")->check(CLI::IsMember({"centroid", "hawkyard"}));
  s_bat->add_option("--dataset", bat.dataset, "reflectance CSV")->required();
  s_bat->add_option("--out", bat.out, "per-wavelength residual means CSV");
  s_bat->add_option("--threads", bat.threads, "worker threads")->check(CLI::PositiveNumber);

  InsideArgs ins;
  auto* s_ins = app.add_subcommand("inside", "exact interior test of a response");
  add_color_options(s_ins, ins.color);
  s_ins->add_option("--xyz", ins.xyz, "tristimulus X,Y,Z")->delimiter(',');
  s_ins->add_option("--response", ins.response, "response in the working basis")->delimiter(',');

  EqualizeArgs eqa;
  auto* s_eq = app.add_subcommand("equalize", "equalized and normalized responsivities");
  add_color_options(s_eq, eqa.color);
  s_eq->add_option("--out", eqa.out, "write normalized responsivities CSV here");

  SolveArgs sol;
  auto* s_sol = app.add_subcommand("solve", "saddlepoint root and centroid for any step-function responsivity");
  s_sol->add_option("--w", sol.w, "responsivity CSV (lo,hi,... or wavelength,...)")->required();
  s_sol->add_option("--y", sol.y, "response")->delimiter(',')->required();
  s_sol->add_flag("--unbounded", sol.unbounded, "nonnegative unbounded functions instead of [0,1]");
  s_sol->add_option("--out", sol.out, "write the estimate (lo,hi,estimate) CSV here");

  VolumeArgs vol;
  auto* s_vol = app.add_subcommand("volume", "asymptotic volume of the finite-dimensional section");
  s_vol->add_option("--w", vol.w, "responsivity CSV (lo,hi,... or wavelength,...)")->required();
  s_vol->add_option("--y", vol.y, "response")->delimiter(',')->required();
  s_vol->add_option("--n", vol.n, "number of cells")->required()->check(CLI::PositiveNumber);
  s_vol->add_flag("--no-phi", vol.no_phi, "drop the misalignment correction");
  s_vol->add_flag("--exact", vol.exact, "also compute the exact volume (single channel)");

  VerifyArgs ver;
  auto* s_ver = app.add_subcommand("verify-centroid", "hit-and-run check of the centroid formula");
  s_ver->add_option("--w", ver.w, "responsivity CSV")->required();
  s_ver->add_option("--y", ver.y, "response")->delimiter(',')->required();
  s_ver->add_option("--n", ver.n, "number of cells")->required()->check(CLI::PositiveNumber);
  s_ver->add_option("--samples", ver.opt.sample_count, "retained samples (all chains)");
  s_ver->add_option("--seed", ver.opt.seed, "RNG seed");
  s_ver->add_option("--chains", ver.opt.chains, "independent chains")->check(CLI::PositiveNumber);
  s_ver->add_option("--threads", ver.opt.threads, "worker threads")->check(CLI::PositiveNumber);
  s_ver->add_option("--burn-in", ver.opt.burn_in, "steps discarded per chain (0: 10n)");
  s_ver->add_option("--thinning", ver.opt.thinning, "steps between retained samples (0: n)");
  s_ver->add_option("--out", ver.out, "per-cell report CSV");

  LightArgs lig;
  auto* s_lig = app.add_subcommand("lightsource", "emission spectrum estimate (unbounded case)");
  add_color_options(s_lig, lig.color);
  s_lig->add_option("--xyz", lig.xyz, "tristimulus X,Y,Z")->delimiter(',');
  s_lig->add_option("--response", lig.response, "response in the working basis")->delimiter(',');
  s_lig->add_option("--out", lig.out, "write the spectrum CSV here");

  TristimulusArgs tri;
  auto* s_tri = app.add_subcommand("tristimulus", "responses of spectra in a CSV");
  add_color_options(s_tri, tri.color);
  s_tri->add_option("--spectrum", tri.spectrum, "spectra CSV (wavelength,<name>,...)")->required();
  s_tri->add_flag("--emission", tri.emission, "values are emissions, not reflectances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "centroid: error kind=InvalidArgument: " << e.what() << "\n";
    return kExitInput;
  }

  cli::log_level() = level == "error" ? LogLevel::Error
                     : level == "info" ? LogLevel::Info
                     : level == "debug" ? LogLevel::Debug
                                        : LogLevel::Warn;
  try {
    if (s_est->parsed()) return cmd_estimate(est, data_dir);
    if (s_bat->parsed()) return cmd_batch(bat, data_dir);
    if (s_ins->parsed()) return cmd_inside(ins, data_dir);
    if (s_eq->parsed()) return cmd_equalize(eqa, data_dir);
    if (s_sol->parsed()) return cmd_solve(sol);
    if (s_vol->parsed()) return cmd_volume(vol);
    if (s_ver->parsed()) return cmd_verify(ver);
    if (s_lig->parsed()) return cmd_lightsource(lig, data_dir);
    if (s_tri->parsed()) return cmd_tristimulus(tri, data_dir);
  } catch (const Error& e) {
    std::cerr << "centroid: error kind=" << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "centroid: error kind=Internal: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInput;
}
