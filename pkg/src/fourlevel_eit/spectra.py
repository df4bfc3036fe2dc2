"""Probe transmission spectra and (δ, Δ) contour maps."""

from __future__ import annotations

import enum
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .atomic import AtomSystem, FieldConfig, Model, Susceptibility, chi_model
from .constants import C_LIGHT
from .doppler import ThermalState, doppler_susceptibility
from .errors import ConfigurationError, NumericalError
from .rbdata import isotope, number_density

__all__ = [
    "Broadening",
    "CellConfig",
    "Spectrum",
    "ContourMap",
    "ScanError",
    "transmission",
    "probe_chi_total",
    "susceptibility",
    "spectrum_scan",
    "contour_scan",
    "normalize_rows",
]

#: |χ| above which the dilute-medium transmission law is flagged.
DILUTE_LIMIT = 0.1


class Broadening(str, enum.Enum):
    NONE = "none"
    DOPPLER_ANALYTIC = "doppler_analytic"
    DOPPLER_NUMERIC = "doppler_numeric"


class ScanError(NumericalError):
    """Evaluation failure at a specific grid point."""

    def __init__(self, message, index):
        super().__init__(f"{message} (grid index {index})")
        self.index = index


@dataclass(frozen=True)
class CellConfig:
    """Vapor cell.

    Parameters
    ----------
    isotope : str
        "Rb85" or "Rb87".
    temperature : float
        Kelvin.
    length : float
        Metres, > 0.
    density : float, optional
        Number density override (m⁻³); otherwise from the vapor-pressure law.
    """

    isotope: str
    temperature: float
    length: float
    density: float | None = None

    def __post_init__(self):
        isotope(self.isotope)
        if not self.length > 0:
            raise ConfigurationError("cell length must be > 0")
        if self.density is not None and not self.density > 0:
            raise ConfigurationError("density override must be > 0")
        if not self.temperature > 0:
            raise ConfigurationError("temperature must be > 0 K")

    @property
    def number_density(self) -> float:
        if self.density is not None:
            return float(self.density)
        return float(number_density(self.temperature, self.isotope))

    @property
    def thermal(self) -> ThermalState:
        return ThermalState(self.temperature, isotope(self.isotope).mass_kg, self.number_density)

    def to_dict(self) -> dict:
        return {
            "isotope": isotope(self.isotope).name,
            "temperature_K": float(self.temperature),
            "length_m": float(self.length),
            "density_m3": self.number_density,
            "density_overridden": self.density is not None,
        }


@dataclass
class Spectrum:
    """Transmission and susceptibility sampled on a δ grid (rad/s)."""

    delta: np.ndarray
    transmission: np.ndarray
    chi32: np.ndarray
    chi42: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def chi_total(self):
        return self.chi32 + self.chi42


@dataclass
class ContourMap:
    """Transmission over a Δ × δ grid; rows are Δ, columns are δ."""

    delta: np.ndarray
    Delta: np.ndarray
    transmission: np.ndarray
    chi32: np.ndarray
    chi42: np.ndarray
    normalization: str = "raw"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (np.size(self.Delta), np.size(self.delta))
        if np.shape(self.transmission) != shape:
            raise ConfigurationError(f"transmission matrix shape {np.shape(self.transmission)} != {shape}")

    @property
    def chi_total(self):
        return self.chi32 + self.chi42


def transmission(chi_total, L, omega_probe):
    """Beer-Lambert intensity transmission exp(-(ω/c) Im χ L).

    Gain (Im χ < 0) gives T > 1 and is not clamped.
    """
    chi = np.asarray(chi_total)
    if np.any(np.abs(chi) > DILUTE_LIMIT):
        warnings.warn("|chi| is not small; the dilute transmission law is inaccurate", RuntimeWarning, stacklevel=2)
    t = np.exp(-(omega_probe / C_LIGHT) * np.imag(chi) * L)
    return t[()] if t.ndim == 0 else t


def probe_chi_total(sus: Susceptibility):
    """Total probe susceptibility χ32 + χ42."""
    return sus.chi32 + sus.chi42


def susceptibility(model, atom: AtomSystem, cell: CellConfig, fields: FieldConfig, broadening="doppler_analytic") -> Susceptibility:
    """Evaluate a model with or without Doppler averaging."""
    b = Broadening(broadening)
    if b is Broadening.NONE:
        return chi_model(model, atom, fields, cell.number_density)
    method = "analytic" if b is Broadening.DOPPLER_ANALYTIC else "numeric"
    return doppler_susceptibility(model, atom, fields, cell.thermal, method=method)


def _validate_grid(g, name):
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size < 1:
        raise ConfigurationError(f"{name} grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(g)):
        raise ConfigurationError(f"{name} grid must be finite")
    if g.size > 1 and not np.all(np.diff(g) > 0):
        raise ConfigurationError(f"{name} grid must be strictly increasing")
    return g


def _evaluate(model, atom, cell, fields, d1, d2, broadening):
    try:
        sus = susceptibility(model, atom, cell, fields.with_(delta_1=d1, delta_2=d2), broadening)
        return np.asarray(sus.chi32), np.asarray(sus.chi42), sus.meta
    except NumericalError:
        pass
    # locate the first failing point for the diagnostic
    f1, f2 = np.broadcast_arrays(d1, d2)
    for i in range(f1.size):
        try:
            susceptibility(model, atom, cell, fields.with_(delta_1=f1.flat[i], delta_2=f2.flat[i]), broadening)
        except NumericalError as exc:
            raise ScanError(str(exc), int(i)) from exc
    raise ScanError("evaluation failed", -1)


def _chunks(n, parts):
    parts = max(1, min(int(parts), n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [(edges[i], edges[i + 1]) for i in range(parts)]


def _parallel_eval(model, atom, cell, fields, d1, d2, broadening, threads):
    """Evaluate flattened detuning arrays in contiguous chunks; results in index order."""
    n = d1.size
    spans = _chunks(n, threads)

    def work(span):
        a, b = span
        try:
            return _evaluate(model, atom, cell, fields, d1[a:b], d2[a:b], broadening)
        except ScanError as exc:
            raise ScanError(str(exc).split(" (grid index")[0], a + exc.index) from exc

    if len(spans) == 1:
        results = [work(spans[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            results = list(pool.map(work, spans))
    c32 = np.concatenate([r[0].reshape(-1) for r in results])
    c42 = np.concatenate([r[1].reshape(-1) for r in results])
    fallback = sum(int(r[2].get("numeric_fallback_points", 0)) for r in results)
    return c32, c42, fallback


def _metadata(model, atom, cell, fields, broadening, extra=None):
    meta = {
        "code_version": __version__,
        "model": Model(model).value,
        "broadening": Broadening(broadening).value,
        "atom": atom.to_dict(),
        "cell": cell.to_dict(),
        "fields": {
            "omega_c31": float(fields.omega_c31),
            "omega_p32": float(fields.omega_p32),
            "omega_control": float(fields.omega_control),
        },
        "conventions": {
            "units": "angular frequencies in rad/s",
            "optical_dephasing_default": "gamma/2",
            "doppler_width_symbol": "velocity width u = sqrt(2 kB T / m)",
            "absorption_sign": "Im chi > 0 absorbs",
        },
    }
    if np.ndim(fields.delta_1) == 0:
        meta["fields"]["delta_1"] = float(fields.delta_1)
    if extra:
        meta.update(extra)
    return meta


def spectrum_scan(
    model,
    atom: AtomSystem,
    cell: CellConfig,
    fields: FieldConfig,
    delta_grid,
    broadening="doppler_analytic",
    threads: int = 1,
) -> Spectrum:
    """Transmission versus two-photon detuning at fixed Δ = ``fields.delta_1``.

    Raises
    ------
    ScanError
        Numerical failure, with the offending grid index attached.
    """
    grid = _validate_grid(delta_grid, "delta")
    d1 = np.full(grid.shape, float(fields.delta_1))
    c32, c42, fb = _parallel_eval(model, atom, cell, fields, d1, grid, broadening, threads)
    t = transmission(c32 + c42, cell.length, fields.omega_control)
    meta = _metadata(model, atom, cell, fields, broadening, {"numeric_fallback_points": fb})
    return Spectrum(grid, np.asarray(t).reshape(-1), c32, c42, meta)


def normalize_rows(t):
    """Scale every fixed-Δ spectrum (matrix row) to unit maximum."""
    t = np.asarray(t, dtype=float)
    m = np.max(t, axis=1, keepdims=True)
    return t / np.where(m > 0, m, 1.0)


def contour_scan(
    model,
    atom: AtomSystem,
    cell: CellConfig,
    fields: FieldConfig,
    delta_grid,
    Delta_grid,
    broadening="doppler_analytic",
    normalization: str = "raw",
    threads: int = 1,
) -> ContourMap:
    """Transmission map over (Δ, δ), row-major in Δ.

    ``normalization`` is ``"raw"`` (absolute transmission) or
    ``"per_column_max"`` (each single-Δ spectrum divided by its maximum,
    as done for experimentally normalized maps).
    """
    dg = _validate_grid(delta_grid, "delta")
    Dg = _validate_grid(Delta_grid, "Delta")
    if normalization not in ("raw", "per_column_max"):
        raise ConfigurationError(f"unknown normalization {normalization!r}")
    D1, D2 = np.meshgrid(Dg, dg, indexing="ij")
    c32, c42, fb = _parallel_eval(model, atom, cell, fields, D1.ravel(), D2.ravel(), broadening, threads)
    shape = D1.shape
    c32 = c32.reshape(shape)
    c42 = c42.reshape(shape)
    t = np.asarray(transmission(c32 + c42, cell.length, fields.omega_control)).reshape(shape)
    if normalization == "per_column_max":
        t = normalize_rows(t)
    meta = _metadata(model, atom, cell, fields, broadening, {"numeric_fallback_points": fb})
    return ContourMap(dg, Dg, t, c32, c42, normalization, meta)
