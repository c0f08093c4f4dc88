#!/usr/bin/env python3
"""Regenerate the material data files shipped under src/tmreverse/data/.

Two files are produced:

* lithium_niobate_e.json: congruent lithium niobate, extraordinary index,
  room-temperature Sellmeier fit (Jundt, Opt. Lett. 22, 1553 (1997)).

* pcf_bragg_fig7.json: a synthesized inverse-group-velocity table for a
  photonic crystal fiber with zero-dispersion points at 740 nm and
  1200 nm.  The published curve for this fiber is only available as a
  plot, so the table is generated from a smooth quartic slowness model
  calibrated to the fiber's known walk-off behaviour: relative to the
  747.5 nm pump, the 1692.4 nm band trails by 37 ps/m and the 1200 nm
  band leads by 15 ps/m (100 m of fiber walks 3.7 ns and 1.5 ns off).
  The generating coefficients are recorded in the file for refinement
  checks.
"""

import json
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "tmreverse" / "data"

C_M_PER_S = 299792458.0


def lithium_niobate() -> dict:
    return {
        "material": "congruent LiNbO3, extraordinary index",
        "form": "sellmeier",
        "coefficients": {
            "variant": "poles",
            "A": 5.35583,
            "B": [0.100473, 100.0],
            "C": [0.20692 ** 2, 11.34927 ** 2],
            "D": -0.015334,
        },
        "valid_range_nm": [400.0, 5000.0],
        "axis": "extraordinary (type-0 configuration, all waves e-polarized)",
        "temperature_C": 24.5,
        "source": ("Sellmeier fit for congruent lithium niobate n_e at room "
                   "temperature, D. H. Jundt, Opt. Lett. 22, 1553 (1997)"),
    }


def _omega(lambda_nm: float) -> float:
    return 2.0 * math.pi * C_M_PER_S / (lambda_nm * 1e-9)


def pcf_slowness() -> dict:
    """Quartic beta'(omega) with GVD zeros at 740 and 1200 nm.

    beta2(w) = (c0 + c1 w) (w - w1)(w - w2), integrated analytically,
    with c0, c1 fixed by the two walk-off calibration points.
    """
    w1, w2 = _omega(740.0), _omega(1200.0)
    w_ref = _omega(747.5)    # short pump; slowness offsets measured from here
    w_s, w_r = _omega(1692.4), _omega(1200.0)

    def primitive_moments(w):
        # integral of (w-w1)(w-w2) dw and of w (w-w1)(w-w2) dw
        p0 = w ** 3 / 3 - (w1 + w2) * w ** 2 / 2 + w1 * w2 * w
        p1 = w ** 4 / 4 - (w1 + w2) * w ** 3 / 3 + w1 * w2 * w ** 2 / 2
        return p0, p1

    def deltas(w_to, w_from):
        a0, a1 = primitive_moments(w_to)
        b0, b1 = primitive_moments(w_from)
        return a0 - b0, a1 - b1

    # beta'(w_s) - beta'(w_ref) = -37 ps/m; beta'(w_r) - beta'(w_ref) = +15 ps/m
    rows = np.array([deltas(w_s, w_ref), deltas(w_r, w_ref)])
    target_ps = np.array([-37.0, 15.0])
    c0, c1 = np.linalg.solve(rows, target_ps * 1e-12)   # beta' in s/m internally

    beta_ref = 1.47 / C_M_PER_S  # group index ~1.47 at the pump; offsets only matter

    def beta_prime_s_m(lambda_nm):
        w = _omega(lambda_nm)
        d0, d1 = deltas(w, w_ref)
        return beta_ref + c0 * d0 + c1 * d1

    lambdas = np.linspace(500.0, 1800.0, 261)
    rows_out = [[float(l), float(beta_prime_s_m(l) * 1e12)] for l in lambdas]
    return {
        "material": "photonic crystal fiber, two zero-dispersion points",
        "form": "slowness_table",
        "rows": rows_out,
        "valid_range_nm": [500.0, 1800.0],
        "source": ("synthesized inverse-group-velocity profile: quartic in omega "
                   "with GVD zeros at 740 nm and 1200 nm, calibrated so that "
                   "relative to 747.5 nm the 1692.4 nm band trails by 37 ps/m "
                   "and the 1200 nm band leads by 15 ps/m"),
        "generator": {
            "kind": "quartic_slowness",
            "zero_gvd_nm": [740.0, 1200.0],
            "reference_nm": 747.5,
            "beta_prime_ref_ps_m": beta_ref * 1e12,
            "c0": c0,
            "c1": c1,
        },
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, payload in (("lithium_niobate_e", lithium_niobate()),
                          ("pcf_bragg_fig7", pcf_slowness())):
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
