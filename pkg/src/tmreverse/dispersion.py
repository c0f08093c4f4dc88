"""Refractive-index models, group slownesses, and conversion-design points.

Wavelengths are given in nm at the API surface.  Group slowness beta' is
reported in ps/m, group-velocity dispersion in ps^2/m, propagation
constants in rad/m, poling periods in um, and medium lengths in m, so a
walk-off limit reads directly as T_max[ps] = |sigma[ps/m]| * L[m].

Material data lives in JSON files (see load_material) rather than in
code; the package ships a congruent lithium niobate extraordinary-index
fit and a synthesized two-zero-dispersion fiber slowness table.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from importlib import resources

import numpy as np
from scipy.interpolate import CubicSpline, make_interp_spline

C_M_PER_S = 299792458.0
_PS_PER_S = 1e12


class WavelengthRangeError(ValueError):
    """Requested wavelength outside the model's validity range."""


class ModelCapabilityError(ValueError):
    """The model cannot supply the requested quantity (e.g. absolute n)."""


class _ModelBase:
    name: str
    valid_range_nm: tuple

    def check_range(self, lambda_nm: float, margin: float = 0.0):
        lo, hi = self.valid_range_nm
        if not (lo + margin <= lambda_nm <= hi - margin):
            raise WavelengthRangeError(
                f"{self.name}: {lambda_nm:.6g} nm outside validity range "
                f"[{lo:.6g}, {hi:.6g}] nm")

    def index(self, lambda_nm: float) -> float:
        raise ModelCapabilityError(f"{self.name} does not provide absolute n")

    def group_slowness_ps_m(self, lambda_nm: float) -> float:
        """beta' = d beta / d omega in ps/m, by Richardson-extrapolated
        central differences in omega."""
        omega = _omega(lambda_nm)
        h = 1e-5 * omega
        self.check_range(_lambda(omega + 2 * h))
        self.check_range(_lambda(omega - 2 * h))
        d1 = (self._beta_omega(omega + h) - self._beta_omega(omega - h)) / (2 * h)
        d2 = (self._beta_omega(omega + h / 2) - self._beta_omega(omega - h / 2)) / h
        return (4.0 * d2 - d1) / 3.0 * _PS_PER_S

    def gvd_ps2_m(self, lambda_nm: float) -> float:
        """beta'' = d^2 beta / d omega^2 in ps^2/m."""
        omega = _omega(lambda_nm)
        h = 1e-3 * omega
        self.check_range(_lambda(omega + 2 * h))
        self.check_range(_lambda(omega - 2 * h))

        def second(hh):
            return (self._beta_omega(omega + hh) - 2.0 * self._beta_omega(omega)
                    + self._beta_omega(omega - hh)) / hh ** 2

        return (4.0 * second(h / 2) - second(h)) / 3.0 * _PS_PER_S ** 2

    def _beta_omega(self, omega: float) -> float:
        lam = _lambda(omega)
        return self.index(lam) * omega / C_M_PER_S


def _omega(lambda_nm: float) -> float:
    return 2.0 * math.pi * C_M_PER_S / (lambda_nm * 1e-9)


def _lambda(omega: float) -> float:
    return 2.0 * math.pi * C_M_PER_S / omega * 1e9


@dataclass
class SellmeierModel(_ModelBase):
    """n^2(lambda) from a Sellmeier fit; lambda in um inside the formula.

    variant 'poles':    n^2 = A + sum B_i / (lam^2 - C_i) + D lam^2
    variant 'lambda2':  n^2 = A + sum B_i lam^2 / (lam^2 - C_i)
    """

    name: str
    variant: str
    A: float
    B: tuple
    C: tuple
    D: float
    valid_range_nm: tuple

    def index(self, lambda_nm: float) -> float:
        self.check_range(lambda_nm)
        lam2 = (lambda_nm * 1e-3) ** 2
        if self.variant == "poles":
            n2 = self.A + self.D * lam2
            for b, c in zip(self.B, self.C):
                n2 += b / (lam2 - c)
        elif self.variant == "lambda2":
            n2 = self.A + self.D * lam2
            for b, c in zip(self.B, self.C):
                n2 += b * lam2 / (lam2 - c)
        else:
            raise ValueError(f"unknown Sellmeier variant {self.variant!r}")
        if n2 <= 1.0:
            raise WavelengthRangeError(
                f"{self.name}: n^2 = {n2:.4g} <= 1 at {lambda_nm:.6g} nm")
        return math.sqrt(n2)


@dataclass
class IndexTableModel(_ModelBase):
    """Tabulated (lambda_nm, n) pairs with spline interpolation."""

    name: str
    lambdas_nm: np.ndarray
    indices: np.ndarray
    valid_range_nm: tuple
    order: int = 3

    def __post_init__(self):
        lam = np.asarray(self.lambdas_nm, dtype=float)
        if np.any(np.diff(lam) <= 0):
            raise ValueError(f"{self.name}: table wavelengths must increase strictly")
        n = np.asarray(self.indices, dtype=float)
        if np.any(n <= 1.0):
            raise ValueError(f"{self.name}: tabulated n must exceed 1")
        self.lambdas_nm = lam
        self.indices = n
        self._spline = make_interp_spline(lam, n, k=self.order)

    def index(self, lambda_nm: float) -> float:
        self.check_range(lambda_nm)
        return float(self._spline(lambda_nm))


@dataclass
class SlownessTableModel(_ModelBase):
    """Tabulated inverse group velocity (lambda_nm, beta' in ps/m).

    Used for waveguides whose curves are published without an index fit;
    absolute beta (hence poling period) is not available.
    """

    name: str
    lambdas_nm: np.ndarray
    slowness_ps_m: np.ndarray
    valid_range_nm: tuple

    def __post_init__(self):
        lam = np.asarray(self.lambdas_nm, dtype=float)
        if np.any(np.diff(lam) <= 0):
            raise ValueError(f"{self.name}: table wavelengths must increase strictly")
        self.lambdas_nm = lam
        self.slowness_ps_m = np.asarray(self.slowness_ps_m, dtype=float)
        self._spline = CubicSpline(lam, self.slowness_ps_m)

    def group_slowness_ps_m(self, lambda_nm: float) -> float:
        self.check_range(lambda_nm)
        return float(self._spline(lambda_nm))

    def gvd_ps2_m(self, lambda_nm: float) -> float:
        # beta'' = d beta'/d omega = (d beta'/d lambda) * (-lambda^2 / (2 pi c))
        self.check_range(lambda_nm)
        dbp_dlam = float(self._spline(lambda_nm, 1))            # ps/m per nm
        dlam_domega = -(lambda_nm * 1e-9) ** 2 / (2.0 * math.pi * C_M_PER_S) * 1e9
        return dbp_dlam * dlam_domega * _PS_PER_S               # ps*s -> ps^2


def load_material(source) -> _ModelBase:
    """Build a model from a material JSON file path or parsed dict.

    Schema: {material, form: sellmeier|table|slowness_table,
    coefficients|rows, valid_range_nm, source, ...extras}.
    """
    if isinstance(source, dict):
        payload = source
    else:
        with open(source) as fh:
            payload = json.load(fh)
    name = payload["material"]
    form = payload["form"]
    valid = tuple(payload["valid_range_nm"])
    if form == "sellmeier":
        coef = payload["coefficients"]
        return SellmeierModel(name=name, variant=coef.get("variant", "poles"),
                              A=coef["A"], B=tuple(coef["B"]), C=tuple(coef["C"]),
                              D=coef.get("D", 0.0), valid_range_nm=valid)
    rows = np.asarray(payload["rows"], dtype=float)
    if form == "table":
        return IndexTableModel(name=name, lambdas_nm=rows[:, 0], indices=rows[:, 1],
                               valid_range_nm=valid,
                               order=int(payload.get("interpolation_order", 3)))
    if form == "slowness_table":
        return SlownessTableModel(name=name, lambdas_nm=rows[:, 0],
                                  slowness_ps_m=rows[:, 1], valid_range_nm=valid)
    raise ValueError(f"unknown material form {form!r}")


def builtin_material(key: str) -> _ModelBase:
    """Load one of the shipped data files by stem name."""
    text = resources.files("tmreverse").joinpath(f"data/{key}.json").read_text()
    return load_material(json.loads(text))


# ---------------------------------------------------------------------------
# Spec-level operations
# ---------------------------------------------------------------------------

def beta(model: _ModelBase, lambda_nm: float) -> float:
    """Propagation constant n * omega / c in rad/m."""
    model.check_range(lambda_nm)
    return model.index(lambda_nm) * _omega(lambda_nm) / C_M_PER_S


def group_slowness(model: _ModelBase, lambda_nm: float) -> float:
    """Inverse group velocity in ps/m."""
    return model.group_slowness_ps_m(lambda_nm)


def gvd(model: _ModelBase, lambda_nm: float) -> float:
    """Group-velocity dispersion beta'' in ps^2/m."""
    return model.gvd_ps2_m(lambda_nm)


def sfg_idler_wavelength(lambda_s_nm: float, lambda_p_nm: float) -> float:
    """Energy conservation for sum-frequency generation: 1/lr = 1/ls + 1/lp."""
    if lambda_s_nm <= 0 or lambda_p_nm <= 0:
        raise ValueError("wavelengths must be positive")
    return 1.0 / (1.0 / lambda_s_nm + 1.0 / lambda_p_nm)


def bragg_idler_wavelength(lambda_s_nm: float, lambda_p1_nm: float,
                           lambda_p2_nm: float) -> float:
    """Four-wave Bragg scattering: omega_r = omega_s + omega_p1 - omega_p2."""
    inv = 1.0 / lambda_s_nm + 1.0 / lambda_p1_nm - 1.0 / lambda_p2_nm
    if inv <= 0:
        raise ValueError("pump pair pushes the idler frequency to or below zero")
    return 1.0 / inv


NO_POLING_NEEDED = math.inf


def qpm_poling_period(model: _ModelBase, lambda_s_nm: float,
                      lambda_p_nm: float) -> float:
    """First-order poling period (um) cancelling the zeroth-order mismatch.

    Returns NO_POLING_NEEDED (infinity) when the process is already
    phase matched.
    """
    lambda_r_nm = sfg_idler_wavelength(lambda_s_nm, lambda_p_nm)
    mismatch = (beta(model, lambda_r_nm) - beta(model, lambda_s_nm)
                - beta(model, lambda_p_nm))
    if abs(mismatch) < 1e-9:
        return NO_POLING_NEEDED
    return 2.0 * math.pi / abs(mismatch) * 1e6


@dataclass(frozen=True)
class DesignPoint:
    """One feasibility evaluation of a conversion geometry."""

    lambda_s_nm: float
    lambda_p_nm: float
    lambda_r_nm: float
    poling_period_um: float | None
    sigma_s_ps_m: float
    sigma_r_ps_m: float
    m: float
    magnification: float
    t_max_s_ps: float
    t_max_r_ps: float
    feasible: bool

    def as_dict(self) -> dict:
        return asdict(self)


def design_point(model: _ModelBase, lambda_s_nm: float, lambda_p_nm: float,
                 length_m: float) -> DesignPoint:
    """Evaluate an SFG design: slowness offsets from the pump, spectral and
    temporal magnification, walk-off duration limits, sign feasibility."""
    lambda_r_nm = sfg_idler_wavelength(lambda_s_nm, lambda_p_nm)
    bp_p = group_slowness(model, lambda_p_nm)
    sigma_s = group_slowness(model, lambda_s_nm) - bp_p
    sigma_r = group_slowness(model, lambda_r_nm) - bp_p
    try:
        poling = qpm_poling_period(model, lambda_s_nm, lambda_p_nm)
    except ModelCapabilityError:
        poling = None
    return _make_point(lambda_s_nm, lambda_p_nm, lambda_r_nm, poling,
                       sigma_s, sigma_r, length_m)


def bragg_scattering_point(model: _ModelBase, lambda_s_nm: float,
                           lambda_p1_nm: float, lambda_p2_nm: float,
                           length_m: float) -> DesignPoint:
    """Four-wave Bragg-scattering design; offsets are taken relative to the
    short (pulsed) pump lambda_p2, whose frame defines local time."""
    lambda_r_nm = bragg_idler_wavelength(lambda_s_nm, lambda_p1_nm, lambda_p2_nm)
    bp_p = group_slowness(model, lambda_p2_nm)
    sigma_s = group_slowness(model, lambda_s_nm) - bp_p
    sigma_r = group_slowness(model, lambda_r_nm) - bp_p
    return _make_point(lambda_s_nm, lambda_p2_nm, lambda_r_nm, None,
                       sigma_s, sigma_r, length_m)


def _make_point(ls, lp, lr, poling, sigma_s, sigma_r, length_m) -> DesignPoint:
    if sigma_r == 0.0 or sigma_s == 0.0:
        m = math.nan
        mag = math.nan
    else:
        m = sigma_s / sigma_r
        mag = 1.0 / abs(m)
    return DesignPoint(
        lambda_s_nm=ls, lambda_p_nm=lp, lambda_r_nm=lr,
        poling_period_um=poling,
        sigma_s_ps_m=sigma_s, sigma_r_ps_m=sigma_r,
        m=m, magnification=mag,
        t_max_s_ps=abs(sigma_s) * length_m,
        t_max_r_ps=abs(sigma_r) * length_m,
        feasible=sigma_s * sigma_r < 0.0,
    )


def ppln_sweep(model: _ModelBase, lambda_s_nm: float, pump_nm: np.ndarray,
               length_m: float) -> list:
    """design_point evaluated over a pump-wavelength sweep."""
    return [design_point(model, lambda_s_nm, float(lp), length_m) for lp in pump_nm]
