"""Dressed states of the control-coupled {|3>, |4>, |1>} subsystem.

The rotating-frame Hamiltonian in the basis (|3>, |4>, |1>) is

    H/ħ = [[-Δ, 0, Ω31/2], [0, ω43 - Δ, Ω41/2], [Ω31/2, Ω41/2, 0]]

and its energies are ħλ/2. Probe resonances are located by mapping each λ
branch to a two-photon detuning through an affine relation that is fixed by
calibration against the unbroadened absorption maxima.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .atomic import AtomSystem, FieldConfig, chi_four_level
from .constants import TWO_PI
from .errors import CalibrationError, ConfigurationError

__all__ = [
    "DressedSolution",
    "BranchCalibration",
    "dressed_hamiltonian",
    "dressed_eigenvalues",
    "dressed_eigenvectors",
    "cubic_coefficients",
    "calibrate_branches",
    "resonance_branches",
    "absorption_maxima",
    "calibration_grid",
    "vanish_point",
]


@dataclass(frozen=True)
class DressedSolution:
    """Eigen-decomposition of 2H/ħ at one (Δ, Ω31)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, basis (|3>, |4>, |1>)


def dressed_hamiltonian(atom: AtomSystem, fields: FieldConfig, delta_1=None) -> np.ndarray:
    """H/ħ (rad/s) as a real symmetric 3x3 matrix; ``delta_1`` overrides Δ."""
    D = float(fields.delta_1 if delta_1 is None else delta_1)
    o31 = fields.omega_c31
    o41 = atom.alpha * o31
    return np.array(
        [
            [-D, 0.0, 0.5 * o31],
            [0.0, atom.omega43 - D, 0.5 * o41],
            [0.5 * o31, 0.5 * o41, 0.0],
        ]
    )


def cubic_coefficients(atom: AtomSystem, fields: FieldConfig, delta_1=None):
    """Coefficients (1, c2, c1, c0) of the characteristic cubic of 2H/ħ."""
    D = float(fields.delta_1 if delta_1 is None else delta_1)
    w = atom.omega43
    o31 = fields.omega_c31
    o41 = atom.alpha * o31
    return np.array(
        [
            1.0,
            4.0 * D - 2.0 * w,
            4.0 * D * D - 4.0 * D * w - o31**2 - o41**2,
            -2.0 * D * o31**2 - 2.0 * D * o41**2 + 2.0 * w * o31**2,
        ]
    )


def dressed_eigenvalues(atom: AtomSystem, fields: FieldConfig, delta_1=None) -> np.ndarray:
    """Three real λ (ascending), dressed energies ħλ/2, from a symmetric eigensolve."""
    return np.linalg.eigvalsh(2.0 * dressed_hamiltonian(atom, fields, delta_1))


def _printed_vector(lam, D, o31, o41):
    den = 2.0 * D + lam
    v = np.array([o31 / den, -(-2.0 * D * lam - lam**2 + o31**2) / (o41 * den), 1.0])
    return v / np.linalg.norm(v)


def dressed_eigenvectors(atom: AtomSystem, fields: FieldConfig, delta_1=None) -> DressedSolution:
    """Normalized eigenvectors (columns) with matching eigenvalues.

    The closed-form component expression is used when 2Δ + λ is well away
    from zero and Ω41 > 0; otherwise the eigensolver vector is kept. Each
    vector's sign is fixed so its largest component is positive.
    """
    D = float(fields.delta_1 if delta_1 is None else delta_1)
    o31 = fields.omega_c31
    o41 = atom.alpha * o31
    lam, vecs = np.linalg.eigh(2.0 * dressed_hamiltonian(atom, fields, D))
    scale = max(abs(D), atom.omega43, o31, o41, 1.0)
    out = np.empty_like(vecs)
    for k in range(3):
        v = vecs[:, k]
        if o41 > 0 and abs(2.0 * D + lam[k]) > 1e-6 * scale:
            p = _printed_vector(lam[k], D, o31, o41)
            if np.all(np.isfinite(p)) and np.linalg.norm(2.0 * dressed_hamiltonian(atom, fields, D) @ p - lam[k] * p) < 1e-8 * scale:
                v = p
        i = np.argmax(np.abs(v))
        out[:, k] = v if v[i] > 0 else -v
    return DressedSolution(lam, out)


# ------------------------------------------------------------------ branches


@dataclass(frozen=True)
class BranchCalibration:
    """Affine map δ_k(Δ) = sign · λ_k(Δ_sign · Δ) / 2 + offset_slope · Δ.

    ``residuals`` are the distances (rad/s) between each reference absorption
    maximum and its nearest calibrated branch.
    """

    sign: float
    delta_sign: float
    offset_slope: float
    reference_Delta: tuple
    residuals: tuple
    cell: float

    def to_dict(self) -> dict:
        return {
            "sign": self.sign,
            "delta_sign": self.delta_sign,
            "offset_slope": self.offset_slope,
            "reference_Delta_MHz": [d / (TWO_PI * 1e6) for d in self.reference_Delta],
            "residuals_MHz": [r / (TWO_PI * 1e6) for r in self.residuals],
            "grid_cell_MHz": self.cell / (TWO_PI * 1e6),
        }


def _map(cal_sign, dsign, slope, atom, fields, Delta):
    lam = dressed_eigenvalues(atom, fields, dsign * Delta)
    return cal_sign * lam / 2.0 + slope * Delta


def absorption_maxima(atom: AtomSystem, fields: FieldConfig, delta_grid, Delta) -> np.ndarray:
    """Interior local maxima (δ values) of unbroadened four-level Im χ at fixed Δ."""
    grid = np.asarray(delta_grid, dtype=float)
    im = np.imag(chi_four_level(atom, fields.with_(delta_1=Delta, delta_2=grid), 1.0).total)
    i = np.where((im[1:-1] > im[:-2]) & (im[1:-1] >= im[2:]))[0] + 1
    return grid[i], im[i]


def calibration_grid(atom: AtomSystem, fields: FieldConfig, cell: float = TWO_PI * 0.4e6) -> np.ndarray:
    """Default δ grid (rad/s) for branch calibration.

    Symmetric about zero with half-width max(40 MHz, 1.25 Ω_eff/2), where
    Ω_eff² = Ω31² + Ω41², so both Autler-Townes components at Δ = 0 are
    inside. Grid spacing is close to ``cell``.
    """
    o31 = fields.omega_c31
    half = max(TWO_PI * 40e6, 0.625 * float(np.hypot(o31, atom.alpha * o31)))
    n = max(3, int(round(2.0 * half / cell)))
    return np.linspace(-half, half, n)


def calibrate_branches(atom: AtomSystem, fields: FieldConfig, delta_grid, reference_Delta=None) -> BranchCalibration:
    """Fix the λ -> δ mapping against absorption maxima at reference Δ values.

    Candidates are sign ∈ {+1, -1}, Hamiltonian Δ convention ∈ {+1, -1} and
    offset slope ∈ {-2, -1, 0, 1, 2}. At each reference Δ the strongest
    interior absorption maximum on ``delta_grid`` must lie within one grid cell
    of some branch, and every branch inside the window must have an absorption
    maximum within one cell. Among passing candidates the one with the
    smallest summed residual wins.

    Raises
    ------
    CalibrationError
        If no candidate matches all reference points.
    """
    grid = np.asarray(delta_grid, dtype=float)
    if grid.size < 3:
        raise ConfigurationError("calibration needs at least 3 delta grid points")
    cell = float(np.max(np.diff(grid)))
    if reference_Delta is None:
        reference_Delta = (0.5 * atom.omega43, 0.0, -atom.omega43)
    refs = []
    for D in reference_Delta:
        pos, val = absorption_maxima(atom, fields, grid, D)
        if pos.size == 0:
            raise CalibrationError(f"no absorption maximum at reference Delta={D}")
        refs.append((D, pos, pos[np.argmax(val)]))
    lo, hi = grid[0] + cell, grid[-1] - cell
    best = None
    for sign, dsign, slope in itertools.product((1.0, -1.0), (1.0, -1.0), (0.0, 1.0, -1.0, 2.0, -2.0)):
        ok = True
        resid = []
        for D, peaks, top in refs:
            br = _map(sign, dsign, slope, atom, fields, D)
            r = float(np.min(np.abs(br - top)))
            inside = br[(br > lo) & (br < hi)]
            if r > cell or any(np.min(np.abs(peaks - b)) > cell for b in inside):
                ok = False
                break
            resid.append(r)
        if ok and (best is None or sum(resid) < sum(best[3])):
            best = (sign, dsign, slope, resid)
    if best is None:
        raise CalibrationError("no affine branch mapping matches the reference absorption maxima")
    return BranchCalibration(best[0], best[1], best[2], tuple(float(d) for d in reference_Delta), tuple(best[3]), cell)


def resonance_branches(
    atom: AtomSystem,
    fields: FieldConfig,
    Delta_grid,
    delta_grid=None,
    calibration: BranchCalibration | None = None,
):
    """Probe-resonance δ of each dressed branch for every Δ.

    Returns
    -------
    branches : ndarray, shape (len(Delta_grid), 3)
        Sorted by eigenvalue index.
    calibration : BranchCalibration
    """
    if calibration is None:
        if delta_grid is None:
            delta_grid = calibration_grid(atom, fields)
        calibration = calibrate_branches(atom, fields, delta_grid)
    Dg = np.asarray(Delta_grid, dtype=float)
    out = np.array(
        [_map(calibration.sign, calibration.delta_sign, calibration.offset_slope, atom, fields, D) for D in Dg]
    ).reshape(Dg.size, 3)
    return out, calibration


# ------------------------------------------------------------ vanish point


def vanish_point(atom: AtomSystem, omega_c31: float):
    """(Δ, δ) at which the closed-form transparency condition predicts no absorption.

    Δ = [4 ω43² Ω31 + (Ω31 - Ω41)(Ω31 + Ω41)²] / [4 ω43 (Ω31 + Ω41)]
    δ = (Ω31² - Ω41²) / (4 ω43), with Ω41 = α Ω31.
    """
    w = atom.omega43
    o31 = float(omega_c31)
    o41 = atom.alpha * o31
    if w == 0:
        raise ZeroDivisionError("omega43 must be non-zero")
    if o31 + o41 == 0:
        raise ZeroDivisionError("Omega31 + Omega41 must be non-zero")
    Dv = (4.0 * w * w * o31 + (o31 - o41) * (o31 + o41) ** 2) / (4.0 * w * (o31 + o41))
    dv = (o31**2 - o41**2) / (4.0 * w)
    return Dv, dv
