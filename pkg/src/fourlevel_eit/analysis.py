"""Derived spectral metrics and least-squares parameter fits."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .atomic import AtomSystem, FieldConfig, Model
from .constants import OMEGA_D1, TWO_PI
from .doppler import ThermalState, doppler_fwhm
from .errors import DataGridMismatchError, NoPeakError, UnresolvedHalfMaxError
from .rbdata import BeamConfig, T_MAX, T_MIN, rabi_from_power
from .spectra import CellConfig, Spectrum, spectrum_scan, susceptibility

__all__ = [
    "TransparencyResult",
    "FitResult",
    "SpectrumModel",
    "peak_search_halfwidth",
    "transparency",
    "eit_fwhm",
    "light_shift_single",
    "light_shift_four_level",
    "normalized_separation",
    "fit_temperature",
    "fit_decoherence",
    "metrics_sweep",
    "linear_r2",
]


# ------------------------------------------------------------- transparency


@dataclass(frozen=True)
class TransparencyResult:
    """EIT contrast 1 - Im χ_EIT / Im χ_Abs at the transmission peak."""

    transparency: float
    delta_peak: float
    im_chi_eit: float
    im_chi_abs: float
    convention: str = "control_off"


def peak_search_halfwidth(atom: AtomSystem, fields: FieldConfig) -> float:
    """Half-width of the δ window searched for the EIT peak.

    The peak is displaced by a light shift of order Ω31²/ω43 (in either
    direction depending on the dipole ratios), so the window is symmetric.
    """
    g = atom.gamma_nat
    return fields.omega_c31**2 / max(atom.omega43, g) + 5.0 * g


def _im_total(model, atom, cell, fields, delta, broadening):
    return np.imag(susceptibility(model, atom, cell, fields.with_(delta_2=delta), broadening).total)


def transparency(
    model,
    atom: AtomSystem,
    cell: CellConfig,
    fields: FieldConfig,
    broadening="doppler_analytic",
    convention: str = "control_off",
    points: int = 401,
    max_widen: int = 3,
) -> TransparencyResult:
    """Locate the EIT transmission maximum and compare against absorption.

    The minimum of Im χ_total (maximum transmission) is found on a coarse grid
    over the search window and refined by bounded Brent minimization between
    the neighbouring grid points. ``convention="control_off"`` takes χ_Abs
    from the control-off susceptibility at the peak frequency;
    ``"flank_minimum"`` takes it from the strongest absorption of the
    controlled spectrum inside the window.

    Raises
    ------
    NoPeakError
        When the optimum sits on the window edge even after widening.
    """
    if fields.omega_c31 == 0:
        off = fields
        im = float(_im_total(model, atom, cell, off, float(np.asarray(fields.delta_2)), broadening))
        return TransparencyResult(0.0, float(np.asarray(fields.delta_2)), im, im, convention)
    hw = peak_search_halfwidth(atom, fields)
    for _ in range(max_widen + 1):
        grid = np.linspace(-hw, hw, points)
        im = _im_total(model, atom, cell, fields, grid, broadening)
        i = int(np.argmin(im))
        if 0 < i < points - 1:
            break
        hw *= 2.0
    else:
        raise NoPeakError("no interior transmission maximum in the search window")
    f = lambda d: float(_im_total(model, atom, cell, fields, d, broadening))  # noqa: E731
    res = optimize.minimize_scalar(f, bounds=(grid[i - 1], grid[i + 1]), method="bounded", options={"xatol": 1e-6 * atom.gamma_nat})
    dp, im_eit = (float(res.x), float(res.fun)) if res.fun <= im[i] else (float(grid[i]), float(im[i]))
    if convention == "control_off":
        im_abs = float(_im_total(model, atom, cell, fields.with_(omega_c31=0.0), dp, broadening))
    elif convention == "flank_minimum":
        im_abs = float(np.max(im))
    else:
        raise ValueError(f"unknown transparency convention {convention!r}")
    return TransparencyResult(1.0 - im_eit / im_abs, dp, im_eit, im_abs, convention)


# --------------------------------------------------------------------- FWHM


def eit_fwhm(spectrum: Spectrum, window=None) -> float:
    """Full width at half maximum of the EIT transmission peak (rad/s).

    The peak is the highest interior local maximum of transmission (inside
    ``window = (lo, hi)`` if given). The baseline is the mean of the nearest
    local minima on either side (or the grid ends), and the half-maximum
    crossings are linearly interpolated.

    Raises
    ------
    NoPeakError, UnresolvedHalfMaxError
    """
    x = np.asarray(spectrum.delta, dtype=float)
    y = np.asarray(spectrum.transmission, dtype=float)
    if x.size < 3:
        raise NoPeakError("need at least three points")
    interior = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    if window is not None:
        interior = interior[(x[interior] >= window[0]) & (x[interior] <= window[1])]
    if interior.size == 0:
        raise NoPeakError("no transmission maximum in the window")
    p = int(interior[np.argmax(y[interior])])
    lft = p
    while lft > 0 and y[lft - 1] <= y[lft]:
        lft -= 1
    rgt = p
    while rgt < y.size - 1 and y[rgt + 1] <= y[rgt]:
        rgt += 1
    base = 0.5 * (y[lft] + y[rgt])
    half = 0.5 * (y[p] + base)

    def crossing(idx):
        # walk from the peak towards idx until the level drops below half
        step = 1 if idx > p else -1
        j = p
        while j != idx and y[j + step] > half:
            j += step
        if j == idx:
            raise UnresolvedHalfMaxError("transmission never reaches half maximum on one side")
        k = j + step
        return x[j] + (half - y[j]) * (x[k] - x[j]) / (y[k] - y[j])

    return float(crossing(rgt) - crossing(lft))


def linear_r2(x, y) -> float:
    """Coefficient of determination of a least-squares straight line."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    ss_res = np.sum((y - A @ coef) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    return float(1.0 - ss_res / ss_tot)


# --------------------------------------------------------------- light shift


def light_shift_single(omega_rabi: float, detuning: float) -> float:
    """Far-detuned two-photon light shift Ω² / (4Δ) (rad/s)."""
    if detuning == 0:
        raise ZeroDivisionError("light shift needs a non-zero detuning")
    return omega_rabi**2 / (4.0 * detuning)


def light_shift_four_level(atom: AtomSystem, fields: FieldConfig) -> float:
    """Sum of the light shifts through |3> (detuning Δ) and |4> (detuning Δ + ω43)."""
    D = float(fields.delta_1)
    o = fields.omega_c31
    return light_shift_single(o, D) + light_shift_single(atom.alpha * o, D + atom.omega43)


def normalized_separation(atom: AtomSystem, thermal: ThermalState, omega_optical: float = OMEGA_D1) -> float:
    """Excited-state splitting in units of the Doppler FWHM."""
    return atom.omega43 / doppler_fwhm(thermal, omega_optical)


# ------------------------------------------------------------------ fitting


@dataclass
class FitResult:
    """Outcome of a least-squares fit.

    ``history`` holds the best residual after each objective evaluation and
    is therefore non-increasing. ``converged`` false means the estimates are
    unreliable.
    """

    parameters: dict
    units: dict
    rss: float
    iterations: int
    evaluations: int
    converged: bool
    message: str = ""
    per_spectrum_rss: list = field(default_factory=list)
    history: list = field(default_factory=list)

    @property
    def reliable(self) -> bool:
        return self.converged

    def to_dict(self) -> dict:
        return {
            "parameters": {k: float(v) for k, v in self.parameters.items()},
            "units": dict(self.units),
            "rss": float(self.rss),
            "iterations": int(self.iterations),
            "evaluations": int(self.evaluations),
            "converged": bool(self.converged),
            "reliable": bool(self.reliable),
            "message": self.message,
            "per_spectrum_rss": [float(r) for r in self.per_spectrum_rss],
            "history": [float(h) for h in self.history],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class SpectrumModel:
    """Everything needed to simulate one measured spectrum."""

    atom: AtomSystem
    cell: CellConfig
    fields: FieldConfig
    model: Model = Model.FOUR_LEVEL
    broadening: str = "doppler_analytic"


def _check_data(spec: Spectrum):
    x = np.asarray(spec.delta, float)
    y = np.asarray(spec.transmission, float)
    if x.ndim != 1 or x.shape != y.shape:
        raise DataGridMismatchError("delta and transmission arrays must be 1-D and equally long")
    if x.size < 3:
        raise DataGridMismatchError("need at least three data points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataGridMismatchError("data contain non-finite values")
    if not np.all(np.diff(x) > 0):
        raise DataGridMismatchError("delta grid must be strictly increasing")
    return x, y


class _Tracker:
    def __init__(self, fn):
        self.fn = fn
        self.best = np.inf
        self.history = []

    def __call__(self, p):
        r = self.fn(p)
        if r < self.best:
            self.best = r
        self.history.append(self.best)
        return r


def _bounded(track, lo, hi, xatol, maxiter):
    res = optimize.minimize_scalar(track, bounds=(lo, hi), method="bounded", options={"xatol": xatol, "maxiter": maxiter})
    x = float(res.x)
    at_edge = min(x - lo, hi - x) < 2.0 * xatol
    ok = bool(res.success) and not at_edge
    msg = str(res.message) + ("; estimate at search bound" if at_edge else "")
    return res, x, ok, msg


def fit_temperature(
    measured: Spectrum,
    atom: AtomSystem,
    cell: CellConfig,
    fields: FieldConfig | None = None,
    bounds=(T_MIN + 1.0, T_MAX - 1.0),
    broadening="doppler_analytic",
    xatol: float = 0.01,
    maxiter: int = 500,
) -> FitResult:
    """Fit the cell temperature to a control-off transmission spectrum.

    Temperature sets both the vapor density (saturated vapor law, any density
    override on ``cell`` is ignored) and the Doppler width. The objective is
    the plain sum of squared transmission residuals.
    """
    x, y = _check_data(measured)
    f0 = (fields or FieldConfig(0.0)).with_(omega_c31=0.0)
    base = replace(cell, density=None)

    def rss(T):
        c = replace(base, temperature=float(T))
        t = spectrum_scan(Model.FOUR_LEVEL, atom, c, f0, x, broadening).transmission
        return float(np.sum((t - y) ** 2))

    track = _Tracker(rss)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res, T, ok, msg = _bounded(track, bounds[0], bounds[1], xatol, maxiter)
    return FitResult(
        parameters={"temperature": T},
        units={"temperature": "K"},
        rss=float(res.fun),
        iterations=int(getattr(res, "nit", res.nfev)),
        evaluations=int(res.nfev),
        converged=ok,
        message=msg,
        per_spectrum_rss=[float(res.fun)],
        history=track.history,
    )


def _model_transmission(sm: SpectrumModel, x, gamma21):
    a = sm.atom.with_(gamma21=float(gamma21))
    return spectrum_scan(sm.model, a, sm.cell, sm.fields, x, sm.broadening).transmission


def fit_decoherence(
    measured,
    setups,
    bounds=None,
    xatol: float | None = None,
    maxiter: int = 500,
) -> FitResult:
    """Fit one ground-state decoherence rate shared by several spectra.

    Parameters
    ----------
    measured : list of Spectrum
    setups : list of SpectrumModel
        Simulation setup for each measured spectrum (same order).
    bounds : (float, float), optional
        Search interval for γ21 in rad/s; default [0, 2γ].
    """
    measured = list(measured)
    setups = list(setups)
    if not measured or len(measured) != len(setups):
        raise DataGridMismatchError("need one setup per measured spectrum and at least one spectrum")
    data = [_check_data(m) for m in measured]
    g = setups[0].atom.gamma_nat
    lo, hi = bounds if bounds is not None else (0.0, 2.0 * g)
    xatol = 1e-4 * g if xatol is None else xatol

    def parts(g21):
        return [float(np.sum((_model_transmission(s, x, g21) - y) ** 2)) for s, (x, y) in zip(setups, data)]

    track = _Tracker(lambda g21: float(sum(parts(g21))))
    res, g21, ok, msg = _bounded(track, lo, hi, xatol, maxiter)
    if not ok and lo == 0.0 and g21 - lo < 2.0 * xatol:
        # zero decoherence is a physical bound, not a failure
        ok = bool(res.success)
        msg = str(res.message) + "; estimate at zero decoherence"
    return FitResult(
        parameters={"gamma21": g21, "gamma21_over_gamma": g21 / g},
        units={"gamma21": "rad/s", "gamma21_over_gamma": "1"},
        rss=float(res.fun),
        iterations=int(getattr(res, "nit", res.nfev)),
        evaluations=int(res.nfev),
        converged=ok,
        message=msg,
        per_spectrum_rss=parts(g21),
        history=track.history,
    )


# -------------------------------------------------------------------- sweeps

SWEEPS = ("control_power", "gamma21", "omega43_norm", "rabi_over_gamma")


def metrics_sweep(
    model,
    atom: AtomSystem,
    cell: CellConfig,
    fields: FieldConfig,
    parameter: str,
    values,
    broadening="doppler_analytic",
    beam_diameter: float | None = None,
    fwhm: bool = True,
    fwhm_points: int = 1201,
):
    """Transparency, peak position and FWHM along a one-parameter sweep.

    ``parameter`` is one of ``control_power`` (W, requires
    ``beam_diameter``), ``rabi_over_gamma``, ``gamma21`` (in units of γ) or
    ``omega43_norm`` (ω43 over the Doppler FWHM of ``cell``).

    Returns a list of dicts, one per sweep value.
    """
    if parameter not in SWEEPS:
        raise ValueError(f"sweep parameter must be one of {SWEEPS}")
    g = atom.gamma_nat
    rows = []
    for val in np.asarray(values, dtype=float).reshape(-1):
        a, f = atom, fields
        if parameter == "control_power":
            if beam_diameter is None:
                raise ValueError("control_power sweeps need beam_diameter")
            f = fields.with_(omega_c31=rabi_from_power(BeamConfig(val, beam_diameter), atom.d31))
        elif parameter == "rabi_over_gamma":
            f = fields.with_(omega_c31=val * g)
        elif parameter == "gamma21":
            a = atom.with_(gamma21=val * g)
        else:
            a = atom.with_(omega43=val * doppler_fwhm(cell.thermal, fields.omega_control))
        tr = transparency(model, a, cell, f, broadening)
        row = {
            "value": float(val),
            "omega_c31": float(f.omega_c31),
            "transparency": tr.transparency,
            "delta_peak": tr.delta_peak,
            "fwhm": float("nan"),
        }
        if fwhm:
            hw = peak_search_halfwidth(a, f)
            grid = np.linspace(-3.0 * hw, 3.0 * hw, fwhm_points)
            spec = spectrum_scan(model, a, cell, f, grid, broadening)
            try:
                row["fwhm"] = eit_fwhm(spec, window=(-hw, hw))
            except (NoPeakError, UnresolvedHalfMaxError):
                pass
        rows.append(row)
    return rows


def mhz(w) -> float:
    return float(w) / (TWO_PI * 1e6)
