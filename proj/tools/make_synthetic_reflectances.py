"""Writes data/synthetic_reflectances.csv: 20 smooth reflectance spectra on 400-700 nm at 5 nm.

Four flat grays plus sixteen curves built from logistic edges and Gaussian bumps,
squeezed into [0.02, 0.98]. No randomness: rerunning gives byte-identical output.
"""
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[1] / "data" / "synthetic_reflectances.csv"
wl = np.arange(400, 701, 5, dtype=float)


def edge(center, width, rising=True):
    s = 1.0 / (1.0 + np.exp(-(wl - center) / width))
    return s if rising else 1.0 - s


def bump(center, width):
    return np.exp(-0.5 * ((wl - center) / width) ** 2)


def squeeze(v):
    v = (v - v.min()) / (v.max() - v.min()) if v.max() > v.min() else v
    return 0.02 + 0.96 * v


spectra = {
    "gray10": np.full_like(wl, 0.10),
    "gray30": np.full_like(wl, 0.30),
    "gray50": np.full_like(wl, 0.50),
    "gray90": np.full_like(wl, 0.90),
    "red_edge": squeeze(edge(600, 12)),
    "orange_edge": squeeze(edge(570, 15)),
    "yellow_edge": squeeze(edge(510, 10)),
    "blue_falloff": squeeze(edge(490, 14, rising=False)),
    "violet_falloff": squeeze(edge(440, 10, rising=False)),
    "green_leaf": squeeze(0.7 * bump(550, 25) + 0.9 * edge(690, 6) + 0.1),
    "cyan_band": squeeze(bump(490, 35)),
    "green_band": squeeze(bump(530, 30)),
    "yellow_band": squeeze(bump(575, 25)),
    "magenta": squeeze(bump(420, 30) + bump(690, 40)),
    "purple": squeeze(0.8 * bump(430, 25) + 0.5 * edge(640, 20)),
    "skin": 0.15 + 0.5 * edge(580, 20) + 0.05 * bump(540, 20),
    "sky": 0.6 - 0.4 * edge(500, 40),
    "brick": 0.08 + 0.35 * edge(590, 18) - 0.03 * bump(540, 30),
    "olive": 0.1 + 0.2 * bump(560, 40) + 0.05 * edge(620, 30),
    "pale_rose": 0.55 + 0.3 * edge(600, 25) - 0.1 * bump(530, 30),
}

for name, v in spectra.items():
    assert np.all((v >= 0.0) & (v <= 1.0)), name

with open(OUT, "w") as f:
    f.write("wavelength," + ",".join(spectra) + "\n")
    for i, lam in enumerate(wl):
        f.write("%g," % lam + ",".join("%.6f" % spectra[k][i] for k in spectra) + "\n")
print(f"wrote {OUT} ({len(spectra)} spectra x {len(wl)} wavelengths)")
