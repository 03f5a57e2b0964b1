// Recover reflectances of the synthetic set from their XYZ under D65 and compare methods.
#include <cstdio>

#include "centroid/centroid.hpp"

using namespace centroid;

int main() {
  const std::string data = CENTROID_DEMO_DATA_DIR;
  const auto cmf = SpectraTable::load_csv(data + "/cie1931_2deg_5nm.csv", SpectraKind::CmfSet);
  const auto ill = SpectraTable::load_csv(data + "/cie_illuminants.csv", SpectraKind::Illuminant);
  const auto set = SpectraTable::load_csv(data + "/synthetic_reflectances.csv", SpectraKind::ReflectanceSet);

  EstimatorConfig cfg;
  cfg.illuminant = "D65";
  const ColorimetricSystem sys = build_system(cmf, ill, cfg);

  std::printf("%-12s %14s %14s %10s\n", "sample", "centroid RMS", "Hawkyard RMS", "clamped");
  const SpectraTable win = set.window(400, 700);
  for (Eigen::Index s = 0; s < win.columns().cols(); ++s) {
    const Vector truth = win.columns().col(s);
    const ResponseVector y = tristimulus(sys, spectrum_on(sys, truth));
    const auto c = estimate_reflectance(sys, cfg, y);
    const auto h = hawkyard_estimate(sys, y);
    const double rc = std::sqrt((c.estimate.values().col(0) - truth).squaredNorm() / double(truth.size()));
    const double rh = std::sqrt((h.clamped.values().col(0) - truth).squaredNorm() / double(truth.size()));
    std::printf("%-12s %14.5f %14.5f %9.0f%%\n", win.names()[static_cast<std::size_t>(s)].c_str(), rc, rh,
                100.0 * h.clamp_fraction);
  }

  EstimatorConfig hk = cfg;
  hk.method = EstimatorMethod::Hawkyard;
  const ResidualStats a = residual_stats(win, sys, cfg);
  const ResidualStats b = residual_stats(win, sys, hk);
  std::printf("\nmean |residual| over wavelengths: centroid %.5f, Hawkyard %.5f\n", a.mean_abs.mean(),
              b.mean_abs.mean());
}
