"""Regenerate src/heraldfock/data/ppktp_group_slowness.txt.

Group slowness k' = n_g / c from two published KTP Sellmeier fits:
n_y from K. Koenig and F. Wong (1995), n_z from K. Fradkin et al. (1999).
Group index n_g = n - lambda dn/dlambda via a central difference.

Run from the repository root:  python3 tools/make_ktp_table.py
"""

from pathlib import Path

import numpy as np

C = 2.99792458e8
WAVELENGTHS_NM = [400.0, 788.0, 800.0, 1576.0, 1930.0, 3860.0]


def n_y(lam_um):
    l2 = lam_um**2
    return np.sqrt(2.09930 + 0.922683 / (1 - 0.0467695 / l2) - 0.0138408 * l2)


def n_z(lam_um):
    l2 = lam_um**2
    return np.sqrt(
        2.12725 + 1.18431 / (1 - 0.0514852 / l2) + 0.6603 / (1 - 100.00507 / l2) - 9.68956e-3 * l2
    )


def group_index(n, lam_um, h=1e-4):
    return n(lam_um) - lam_um * (n(lam_um + h) - n(lam_um - h)) / (2 * h)


def main():
    out = Path(__file__).resolve().parents[1] / "src/heraldfock/data/ppktp_group_slowness.txt"
    lines = [
        "# PP-KTP group slowness k' = dk/domega (s/m) per crystal axis",
        "# version: 1",
        "# n_y: Koenig & Wong 1995; n_z: Fradkin et al. 1999; n_g by central difference",
        "# wavelength_nm  k_y  k_z",
    ]
    for lam in WAVELENGTHS_NM:
        ky = group_index(n_y, lam / 1000) / C
        kz = group_index(n_z, lam / 1000) / C
        lines.append(f"{lam:.1f} {ky:.10e} {kz:.10e}")
    out.write_text("\n".join(lines) + "\n")
    print(out.read_text())


if __name__ == "__main__":
    main()
