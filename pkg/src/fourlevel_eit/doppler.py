"""Velocity-averaged susceptibilities for co-propagating control and probe.

Only the one-photon detuning is Doppler shifted, Δ -> Δ + k v with
k = ω_c / c. The Maxwellian weight is N0 exp(-v²/u²) / (√π u).

Two independent evaluations are provided: a closed form built from the
Faddeeva function, and adaptive Gauss-Legendre quadrature used as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atomic import (
    AtomSystem,
    FieldConfig,
    Model,
    Susceptibility,
    chi_model,
)
from .constants import C_LIGHT, EPS0, HBAR, K_B
from .errors import ConfigurationError, QuadratureConvergenceError, RootDegeneracyError
from .faddeeva import doppler_kernel

__all__ = [
    "ThermalState",
    "DopplerRoots",
    "doppler_shift_detuning",
    "doppler_roots",
    "chi_doppler_analytic",
    "chi_doppler_numeric",
    "doppler_susceptibility",
    "doppler_fwhm",
    "velocity_weight",
]

#: Relative pole separation below which the two-pole partial fraction is refused.
ROOT_SEPARATION_RTOL = 1e-7
#: Velocity cutoff in units of u; exp(-64) ~ 1.6e-28 of the peak weight.
V_CUTOFF = 8.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


@dataclass(frozen=True)
class ThermalState:
    """Thermal vapor.

    Parameters
    ----------
    temperature : float
        Kelvin, > 0.
    mass : float
        Atomic mass (kg).
    density : float
        Total number density N0 (m⁻³).
    """

    temperature: float
    mass: float
    density: float

    def __post_init__(self):
        if not self.temperature > 0:
            raise ConfigurationError(f"temperature must be > 0 K, got {self.temperature}")
        if not self.mass > 0:
            raise ConfigurationError("mass must be > 0")
        if not self.density >= 0:
            raise ConfigurationError("density must be >= 0")

    @property
    def u(self) -> float:
        """Most probable speed √(2 k_B T / m); u/√2 is the rms speed along one axis."""
        return float(np.sqrt(2.0 * K_B * self.temperature / self.mass))


@dataclass(frozen=True)
class DopplerRoots:
    """Poles of the velocity-resolved four-level susceptibility.

    χ_ij(v) = (N d_ij² / ε0 ħ k) (v + K_ij) / ((v - a1)(v - a2)) and the
    velocity average is A_ij · [(a1 + K) J(a1) - (a2 + K) J(a2)] / (a1 - a2)
    with J(a) = ∫ exp(-v²/u²) / (v - a) dv.
    """

    a1: np.ndarray
    a2: np.ndarray
    A32: float
    A42: float
    K32: np.ndarray
    K42: np.ndarray


def doppler_shift_detuning(delta_1, v, omega_control):
    """One-photon detuning seen by an atom moving with velocity ``v`` along the beams."""
    return delta_1 + v * omega_control / C_LIGHT


def velocity_weight(v, thermal: ThermalState):
    """Maxwellian density per unit velocity, integrating to ``thermal.density``."""
    u = thermal.u
    return thermal.density * np.exp(-((np.asarray(v) / u) ** 2)) / (np.sqrt(np.pi) * u)


def doppler_fwhm(thermal: ThermalState, omega_optical: float) -> float:
    """Full width at half maximum of the Doppler profile (rad/s)."""
    return omega_optical * thermal.u / C_LIGHT * 2.0 * np.sqrt(np.log(2.0))


def _prefactor(thermal: ThermalState, dipole: float, k: float) -> float:
    return dipole**2 * thermal.density / (np.sqrt(np.pi) * thermal.u * EPS0 * HBAR * k)


def _stable_quadratic(qa, qb, qc):
    s = np.sqrt(qb * qb - 4.0 * qa * qc)
    sgn = np.where((np.conj(qb) * s).real >= 0, 1.0, -1.0)
    q = -0.5 * (qb + sgn * s)
    r1 = q / qa
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(q != 0, qc / q, -qb / qa - r1)
    return r1, r2


def _roots_masked(atom: AtomSystem, fields: FieldConfig, thermal: ThermalState):
    k = fields.omega_control / C_LIGHT
    d1 = np.asarray(fields.delta_1, dtype=float)
    d2 = np.asarray(fields.delta_2, dtype=float)
    d1, d2 = np.broadcast_arrays(d1, d2)
    d30 = atom.gamma32 + 1j * (d1 + d2)
    d40 = atom.gamma42 + 1j * (atom.omega43 + d1 + d2)
    g = atom.gamma21 + 1j * d2
    om2 = fields.omega_c31**2
    al, be = atom.alpha, atom.beta
    zero = g == 0
    g = np.where(zero, 1.0, g)
    # D(v) = 4 g d3(v) d4(v) + Ω²(d4(v) + α² d3(v)) with d(v) = d0 + i k v
    qa = -4.0 * g * k * k + 0j
    qb = 1j * k * (4.0 * g * (d30 + d40) + (1.0 + al * al) * om2)
    qc = 4.0 * g * d30 * d40 + om2 * (d40 + al * al * d30)
    a1, a2 = _stable_quadratic(qa, qb, qc)
    scale = np.maximum(np.maximum(np.abs(a1), np.abs(a2)), thermal.u)
    bad = zero | (np.abs(a1 - a2) <= ROOT_SEPARATION_RTOL * scale)
    K32 = -1j * (d40 + al * (al - be) * om2 / (4.0 * g)) / k
    K42 = -1j * (d30 + (be - al) * om2 / (4.0 * be * g)) / k
    roots = DopplerRoots(
        a1=a1,
        a2=a2,
        A32=_prefactor(thermal, atom.d32, k),
        A42=_prefactor(thermal, atom.d42, k),
        K32=K32,
        K42=K42,
    )
    return roots, bad


def doppler_roots(atom: AtomSystem, fields: FieldConfig, thermal: ThermalState) -> DopplerRoots:
    """Velocity poles a1, a2 and coefficients of the four-level integrand.

    Raises
    ------
    RootDegeneracyError
        When γ21 + iδ = 0 (the quadratic degenerates to linear) or the two
        roots nearly coincide.
    """
    roots, bad = _roots_masked(atom, fields, thermal)
    if np.any(bad):
        raise RootDegeneracyError("velocity poles are undefined (gamma21 + i*delta = 0) or coincide")
    return roots


def _two_pole(A, K, r: DopplerRoots, u):
    j1 = doppler_kernel(r.a1, u)
    j2 = doppler_kernel(r.a2, u)
    return A * ((r.a1 + K) * j1 - (r.a2 + K) * j2) / (r.a1 - r.a2)


def _single_pole(A, a, u):
    return A * doppler_kernel(a, u)


def _analytic_components(model: Model, atom, fields, thermal, strict=True):
    """Closed-form components and a mask of points where the closed form is undefined."""
    k = fields.omega_control / C_LIGHT
    u = thermal.u
    d1 = np.asarray(fields.delta_1, dtype=float)
    d2 = np.asarray(fields.delta_2, dtype=float)
    d1, d2 = np.broadcast_arrays(d1, d2)
    d30 = atom.gamma32 + 1j * (d1 + d2)
    d40 = atom.gamma42 + 1j * (atom.omega43 + d1 + d2)
    A32 = _prefactor(thermal, atom.d32, k)
    A42 = _prefactor(thermal, atom.d42, k)
    om = fields.omega_c31

    nobad = np.zeros(d1.shape, bool)
    if model is Model.FOUR_LEVEL and om > 0:
        r, bad = _roots_masked(atom, fields, thermal)
        if np.any(bad):
            if strict:
                raise RootDegeneracyError("velocity poles are undefined (gamma21 + i*delta = 0) or coincide")
            # park degenerate points on harmless values; caller overwrites them
            r = DopplerRoots(
                np.where(bad, 1j * u, r.a1), np.where(bad, -1j * u, r.a2), r.A32, r.A42, r.K32, r.K42
            )
        return _two_pole(A32, r.K32, r, u), _two_pole(A42, r.K42, r, u), bad

    if om == 0:
        # control off: each transition is a bare Lorentzian in Δ + δ + k v
        c32 = _single_pole(A32, 1j * d30 / k, u)
        c42 = _single_pole(A42, 1j * d40 / k, u)
        if model is Model.SINGLE_LAMBDA3:
            c42 = np.zeros_like(c42)
        elif model is Model.SINGLE_LAMBDA4:
            c32 = np.zeros_like(c32)
        return c32, c42, nobad

    # isolated lambdas: χ(v) ∝ 2 i g / (4 g d(v) + Ω²) has a single pole
    g = atom.gamma21 + 1j * d2
    zero = g == 0
    gs = np.where(zero, 1.0, g)

    def lam(A, d0, om_eff):
        a = 1j * (d0 + om_eff**2 / (4.0 * gs)) / k
        return np.where(zero, 0j, _single_pole(A, a, u))

    c32 = lam(A32, d30, om) if model is not Model.SINGLE_LAMBDA4 else np.zeros(d1.shape, complex)
    c42 = lam(A42, d40, atom.alpha * om) if model is not Model.SINGLE_LAMBDA3 else np.zeros(d1.shape, complex)
    return c32, c42, nobad


def _squeeze(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def _select(c32, c42, transition):
    t = str(transition)
    if t == "32":
        return _squeeze(c32)
    if t == "42":
        return _squeeze(c42)
    raise ConfigurationError(f"probe transition must be '32' or '42', got {transition!r}")


def chi_doppler_analytic(atom, fields, thermal, transition="32", model=Model.FOUR_LEVEL):
    """Closed-form Doppler-averaged susceptibility of one probe transition.

    Raises
    ------
    RootDegeneracyError
        When the velocity poles are undefined or coincide; fall back to
        :func:`chi_doppler_numeric`.
    """
    c32, c42, _ = _analytic_components(Model(model), atom, fields, thermal)
    return _select(c32, c42, transition)


# ---------------------------------------------------------------- quadrature


def _gl(f_vals, half):
    # f_vals shape (..., n_intervals, 15), half-widths (n_intervals,)
    return (f_vals * _GL_WEIGHTS).sum(axis=-1) * half


def _pole_velocities(model, atom, fields, k):
    """Real parts and widths of integrand poles used as initial breakpoints."""
    d1 = np.atleast_1d(np.asarray(fields.delta_1, dtype=float))
    d2 = np.atleast_1d(np.asarray(fields.delta_2, dtype=float))
    d1, d2 = np.broadcast_arrays(d1, d2)
    d30 = atom.gamma32 + 1j * (d1 + d2)
    d40 = atom.gamma42 + 1j * (atom.omega43 + d1 + d2)
    poles = [1j * d30 / k, 1j * d40 / k]
    om2 = fields.omega_c31**2
    g = atom.gamma21 + 1j * d2
    nz = g != 0
    gs = np.where(nz, g, 1.0)
    if om2 > 0:
        if model is Model.FOUR_LEVEL:
            al2 = atom.alpha**2
            qa = -4.0 * gs * k * k + 0j
            qb = 1j * k * (4.0 * gs * (d30 + d40) + (1.0 + al2) * om2)
            qc = 4.0 * gs * d30 * d40 + om2 * (d40 + al2 * d30)
            r1, r2 = _stable_quadratic(qa, qb, qc)
            lin = 1j * (d40 + al2 * d30) / ((1.0 + al2) * k)
            poles += [np.where(nz, r1, lin), np.where(nz, r2, lin)]
        else:
            poles += [
                np.where(nz, 1j * (d30 + om2 / (4.0 * gs)) / k, poles[0]),
                np.where(nz, 1j * (d40 + atom.alpha**2 * om2 / (4.0 * gs)) / k, poles[1]),
            ]
    return np.stack(poles, axis=-1)


def chi_doppler_numeric_both(
    model,
    atom: AtomSystem,
    fields: FieldConfig,
    thermal: ThermalState,
    rtol: float = 1e-8,
    max_depth: int = 48,
):
    """Adaptive Gauss-Legendre velocity average of both probe components.

    All grid points (broadcast over ``delta_1`` and ``delta_2``) are
    integrated together. Each panel is compared against its two halves; a
    panel is accepted when the difference is below its share of
    ``rtol`` × |integral| (or of 1e-15 × ∫|integrand|, which handles
    identically-zero integrands). The rule and the refinement order are
    fixed, so results are deterministic.

    Returns
    -------
    chi32, chi42 : ndarray
        Same shape as the broadcast detuning arrays.

    Raises
    ------
    QuadratureConvergenceError
        If any panel is still unresolved after ``max_depth`` halvings.
    """
    model = Model(model)
    k = fields.omega_control / C_LIGHT
    u = thermal.u
    d1 = np.asarray(fields.delta_1, dtype=float)
    d2 = np.asarray(fields.delta_2, dtype=float)
    d1, d2 = np.broadcast_arrays(d1, d2)
    shape = d1.shape
    d1f = d1.ravel()
    d2f = d2.ravel()
    npts = d1f.size
    vmax = V_CUTOFF * u
    width = 2.0 * vmax

    # initial panels: uniform split refined around every pole
    poles = _pole_velocities(model, atom, fields.with_(delta_1=d1f, delta_2=d2f), k).reshape(npts, -1)
    base = np.linspace(-vmax, vmax, 17)
    owners, los, his = [], [], []
    for i in range(npts):
        pts = [base]
        for p in poles[i]:
            w = abs(p.imag)
            pts.append(p.real + np.array([-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0]) * w)
        edges = np.unique(np.clip(np.concatenate(pts), -vmax, vmax))
        owners.append(np.full(edges.size - 1, i))
        los.append(edges[:-1])
        his.append(edges[1:])
    owner = np.concatenate(owners)
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    keep = hi > lo
    owner, lo, hi = owner[keep], lo[keep], hi[keep]

    def integrand(own, v):
        f = fields.with_(
            delta_1=doppler_shift_detuning(d1f[own][:, None], v, fields.omega_control),
            delta_2=d2f[own][:, None] + np.zeros_like(v),
        )
        sus = chi_model(model, atom, f, 1.0)
        wgt = velocity_weight(v, thermal)
        return np.stack([np.asarray(sus.chi32) * wgt, np.asarray(sus.chi42) * wgt])

    def panel(own, a, b):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        v = mid[:, None] + half[:, None] * _GL_NODES
        return _gl(integrand(own, v), half)

    acc = np.zeros((2, npts), dtype=complex)
    coarse = panel(owner, lo, hi)
    for depth in range(max_depth + 1):
        if owner.size == 0:
            break
        mid = 0.5 * (lo + hi)
        left = panel(owner, lo, mid)
        right = panel(owner, mid, hi)
        fine = left + right
        # current best estimate of every integral and of its absolute size
        est = acc.copy()
        absest = np.abs(acc).copy()
        for c in range(2):
            est[c] += np.bincount(owner, weights=fine[c].real, minlength=npts)
            est[c] += 1j * np.bincount(owner, weights=fine[c].imag, minlength=npts)
            absest[c] += np.bincount(owner, weights=np.abs(fine[c]), minlength=npts)
        share = (hi - lo) / width
        tol = np.maximum(rtol * np.abs(est[:, owner]), 1e-15 * absest[:, owner]) * share
        err = np.abs(fine - coarse)
        done = np.all(err <= tol, axis=0)
        for c in range(2):
            acc[c] += np.bincount(owner[done], weights=fine[c, done].real, minlength=npts)
            acc[c] += 1j * np.bincount(owner[done], weights=fine[c, done].imag, minlength=npts)
        todo = ~done
        if not np.any(todo):
            owner = owner[todo]
            break
        if depth == max_depth:
            bad = np.unique(owner[todo])
            raise QuadratureConvergenceError(
                f"velocity quadrature did not converge for {bad.size} grid point(s), first index {bad[0]}"
            )
        o, a, m, b = owner[todo], lo[todo], mid[todo], hi[todo]
        owner = np.concatenate([o, o])
        lo = np.concatenate([a, m])
        hi = np.concatenate([m, b])
        coarse = np.concatenate([left[:, todo], right[:, todo]], axis=1)
        order = np.lexsort((lo, owner))
        owner, lo, hi, coarse = owner[order], lo[order], hi[order], coarse[:, order]

    return acc[0].reshape(shape), acc[1].reshape(shape)


def chi_doppler_numeric(atom, fields, thermal, transition="32", model=Model.FOUR_LEVEL, rtol=1e-8):
    """Quadrature Doppler-averaged susceptibility of one probe transition."""
    c32, c42 = chi_doppler_numeric_both(model, atom, fields, thermal, rtol=rtol)
    return _select(c32, c42, transition)


def doppler_susceptibility(model, atom, fields, thermal, method="analytic") -> Susceptibility:
    """Doppler-averaged susceptibility with provenance.

    Parameters
    ----------
    method : {"analytic", "numeric"}
        ``"analytic"`` uses the closed form and transparently re-evaluates
        points with degenerate poles by quadrature; the number of such points
        is recorded in ``meta["numeric_fallback_points"]``.
    """
    model = Model(model)
    if method == "numeric":
        c32, c42 = chi_doppler_numeric_both(model, atom, fields, thermal)
        return Susceptibility(_squeeze(c32), _squeeze(c42), model, True, {"method": "numeric"})
    if method != "analytic":
        raise ConfigurationError(f"unknown Doppler method {method!r}")
    c32, c42, bad = _analytic_components(model, atom, fields, thermal, strict=False)
    if np.any(bad):
        d1, d2 = np.broadcast_arrays(np.asarray(fields.delta_1, float), np.asarray(fields.delta_2, float))
        n32, n42 = chi_doppler_numeric_both(model, atom, fields.with_(delta_1=d1[bad], delta_2=d2[bad]), thermal)
        c32 = np.array(c32, copy=True)
        c42 = np.array(c42, copy=True)
        c32[bad], c42[bad] = n32, n42
    meta = {"method": "analytic", "numeric_fallback_points": int(np.sum(bad))}
    return Susceptibility(_squeeze(c32), _squeeze(c42), model, True, meta)
