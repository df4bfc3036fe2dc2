"""Level scheme, weak-probe steady state and bare susceptibilities.

The four-level scheme has two ground states |1>, |2> and two excited states
|3>, |4> separated by ``omega43``. The control field drives |1> -> |3>, |4>
and the weak probe drives |2> -> |3>, |4>. All population sits in |2>.

Sign conventions: ``delta_1`` (Δ) is the control detuning from |1> -> |3>,
``delta_2`` (δ) is the two-photon detuning, and positive Im χ means absorption.
All frequencies are angular (rad/s).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import EPS0, GAMMA_D1, HBAR, OMEGA_D1, TWO_PI
from .errors import ConfigurationError, DegenerateDenominatorError, SingularSystemError

__all__ = [
    "AtomSystem",
    "FieldConfig",
    "CoherenceSet",
    "Model",
    "Susceptibility",
    "WeakProbeWarning",
    "denominator_Z",
    "sigma32_analytic",
    "sigma42_analytic",
    "chi_from_sigma",
    "chi_four_level",
    "chi_two_three_level",
    "chi_single_lambda",
    "chi_model",
    "steady_state_oracle",
]

#: Absolute floor on |Z| below which the denominator counts as zero.
Z_ABS_FLOOR = 1e-300
#: Relative floor (against the natural scale of Z) that triggers a warning.
Z_REL_WARN = 1e-30


class WeakProbeWarning(UserWarning):
    """The probe is not weak compared with the control."""


class Model(str, enum.Enum):
    """Which level scheme produces the susceptibility."""

    FOUR_LEVEL = "four_level"
    TWO_THREE_LEVEL = "two_three_level"
    SINGLE_LAMBDA3 = "single_lambda3"
    SINGLE_LAMBDA4 = "single_lambda4"


@dataclass(frozen=True)
class AtomSystem:
    """Four-level scheme parameters.

    Parameters
    ----------
    omega43 : float
        Excited-state splitting (rad/s), > 0.
    alpha, beta : float
        Dipole ratios d41/d31 and d42/d32.
    d31, d32 : float
        Dipole moments (C m). ``d31`` sets control Rabi frequencies when the
        control is specified by power; ``d32`` sets the probe susceptibility.
    omega21 : float
        Ground-state splitting (rad/s), bookkeeping only.
    gamma_nat : float
        Natural linewidth γ (rad/s).
    gamma31, gamma32, gamma41, gamma42 : float, optional
        Optical coherence dephasing rates. Default ``gamma_nat / 2``.
    gamma43 : float, optional
        Excited-state coherence dephasing. Default ``gamma_nat``. It does not
        enter the weak-probe susceptibility.
    gamma21 : float
        Ground-state decoherence rate.
    """

    omega43: float
    alpha: float
    beta: float
    d31: float
    d32: float
    omega21: float = 0.0
    gamma_nat: float = GAMMA_D1
    gamma31: float | None = None
    gamma32: float | None = None
    gamma41: float | None = None
    gamma42: float | None = None
    gamma43: float | None = None
    gamma21: float = 0.0

    def __post_init__(self):
        half = self.gamma_nat / 2.0
        for name in ("gamma31", "gamma32", "gamma41", "gamma42"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, half)
        if self.gamma43 is None:
            object.__setattr__(self, "gamma43", self.gamma_nat)
        rates = ("gamma_nat", "gamma31", "gamma32", "gamma41", "gamma42", "gamma43", "gamma21")
        for name in rates:
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ConfigurationError(f"{name} must be finite and >= 0, got {v}")
        if not self.omega43 > 0:
            raise ConfigurationError(f"omega43 must be > 0, got {self.omega43}")
        for name in ("alpha", "beta", "d31", "d32"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def d41(self) -> float:
        return self.alpha * self.d31

    @property
    def d42(self) -> float:
        return self.beta * self.d32

    def with_(self, **changes) -> "AtomSystem":
        """Copy with fields replaced (dephasing defaults are not recomputed)."""
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class FieldConfig:
    """Optical fields.

    ``delta_1`` and ``delta_2`` may be numpy arrays; every kernel broadcasts
    over them. Derived couplings Ω41 = α Ω31 and Ω42 = β Ω32 are never stored.
    """

    omega_c31: float
    delta_1: float | np.ndarray = 0.0
    delta_2: float | np.ndarray = 0.0
    omega_p32: float = TWO_PI * 1e3
    omega_control: float = OMEGA_D1

    def __post_init__(self):
        if not np.isfinite(self.omega_c31) or self.omega_c31 < 0:
            raise ConfigurationError(f"omega_c31 must be finite and >= 0, got {self.omega_c31}")
        if not self.omega_p32 > 0:
            raise ConfigurationError("omega_p32 must be > 0")
        if self.omega_c31 > 0 and self.omega_p32 / self.omega_c31 > 0.1:
            warnings.warn(
                f"probe/control Rabi ratio {self.omega_p32 / self.omega_c31:.3g} exceeds 0.1; "
                "the weak-probe solution may be inaccurate",
                WeakProbeWarning,
                stacklevel=3,
            )

    def with_(self, **changes) -> "FieldConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class CoherenceSet:
    """Rotating-frame coherences of the weak-probe steady state."""

    sigma42: complex
    sigma32: complex
    sigma41: complex = 0j
    sigma31: complex = 0j
    sigma43: complex = 0j
    sigma21: complex = 0j


@dataclass(frozen=True)
class Susceptibility:
    """Probe susceptibility split by excited state.

    ``chi32`` and ``chi42`` are complex scalars or arrays with identical shape.
    """

    chi32: complex | np.ndarray
    chi42: complex | np.ndarray
    model: Model
    broadened: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def total(self):
        return self.chi32 + self.chi42


def _detuning_factors(atom: AtomSystem, delta_1, delta_2):
    d1 = np.asarray(delta_1, dtype=float)
    d2 = np.asarray(delta_2, dtype=float)
    d3 = atom.gamma32 + 1j * (d1 + d2)
    d4 = atom.gamma42 + 1j * (atom.omega43 + d1 + d2)
    g = atom.gamma21 + 1j * d2
    return d3, d4, g


def _z_poly(alpha, om2, d3, d4, g):
    # Z = 8 g (ω43 - iγ42 + δ + Δ)(γ32 + i(Δ + δ)) + 2|Ω|²[(ω43 - iγ42 + δ + Δ) + α²(-iγ32 + δ + Δ)]
    # with (ω43 - iγ42 + δ + Δ) = -i d4 and (-iγ32 + δ + Δ) = -i d3.
    return 8.0 * g * (-1j * d4) * d3 + 2.0 * om2 * (-1j * d4 + alpha**2 * (-1j * d3))


def _check_z(z, scale):
    z = np.asarray(z)
    mag = np.abs(z)
    if np.any(mag < Z_ABS_FLOOR):
        raise DegenerateDenominatorError("steady-state denominator Z vanishes for these parameters")
    if np.any(mag < Z_REL_WARN * scale):
        warnings.warn("steady-state denominator Z is nearly singular", RuntimeWarning, stacklevel=3)


def _z_scale(atom, fields):
    s = max(
        atom.gamma_nat,
        atom.gamma32,
        atom.gamma42,
        atom.omega43,
        fields.omega_c31,
        float(np.max(np.abs(fields.delta_1))),
        float(np.max(np.abs(fields.delta_2))),
    )
    return s**3


def denominator_Z(atom: AtomSystem, fields: FieldConfig):
    """Common denominator of the weak-probe coherences.

    Evaluates the cubic polynomial in the detunings and rates directly; no
    guarding is applied.
    """
    d3, d4, g = _detuning_factors(atom, fields.delta_1, fields.delta_2)
    z = _z_poly(atom.alpha, fields.omega_c31**2, d3, d4, g)
    return z[()] if z.ndim == 0 else z


def _numerators(atom, om2, d3, d4, g):
    a, b = atom.alpha, atom.beta
    # (δ - iγ21) = -i g and (-iγ32 + δ + Δ) = -i d3
    num42 = -((a - b) * om2 + 4.0 * b * (-1j * g) * (-1j * d3))
    # 4i(γ21 + iδ)(ω43 - iγ42 + δ + Δ) = 4i g (-i d4)
    num32 = a * (a - b) * om2 + 4j * g * (-1j * d4)
    return num32, num42


def _probe_sigmas(atom: AtomSystem, fields: FieldConfig):
    d3, d4, g = _detuning_factors(atom, fields.delta_1, fields.delta_2)
    om2 = fields.omega_c31**2
    if om2 == 0:
        # control off: the ground-coherence factor g cancels exactly, leaving
        # two uncoupled two-level responses
        _check_z(d3 * d4, _z_scale(atom, fields) ** (2 / 3))
        s32 = 0.5j * fields.omega_p32 / np.asarray(d3)
        s42 = 0.5j * atom.beta * fields.omega_p32 / np.asarray(d4)
        return (s32[()] if s32.ndim == 0 else s32), (s42[()] if s42.ndim == 0 else s42)
    z = _z_poly(atom.alpha, om2, d3, d4, g)
    _check_z(z, _z_scale(atom, fields))
    num32, num42 = _numerators(atom, om2, d3, d4, g)
    s32 = num32 / z * fields.omega_p32
    s42 = num42 / z * fields.omega_p32
    return (s32[()] if s32.ndim == 0 else s32), (s42[()] if s42.ndim == 0 else s42)


def sigma42_analytic(atom: AtomSystem, fields: FieldConfig):
    """Weak-probe steady-state coherence on |2> -> |4> (linear in Ω32).

    Raises
    ------
    DegenerateDenominatorError
        If |Z| underflows.
    """
    return _probe_sigmas(atom, fields)[1]


def sigma32_analytic(atom: AtomSystem, fields: FieldConfig):
    """Weak-probe steady-state coherence on |2> -> |3> (linear in Ω32)."""
    return _probe_sigmas(atom, fields)[0]


def _dipole(atom: AtomSystem, transition) -> float:
    t = str(transition)
    if t == "32":
        return atom.d32
    if t == "42":
        return atom.d42
    raise ConfigurationError(f"probe transition must be '32' or '42', got {transition!r}")


def chi_from_sigma(atom: AtomSystem, cell_density: float, transition, sigma, rabi: float):
    """Susceptibility of one probe transition from its coherence.

    χ_ij = 2 N d_ij² σ_ij / (ε0 ħ Ω_ij), using Ω_ij = 2 d_ij E / ħ so that χ is
    independent of probe power.

    Parameters
    ----------
    transition : {"32", "42"}
    rabi : float
        Probe Rabi frequency on that transition (β Ω32 for "42").
    """
    if rabi == 0:
        raise ZeroDivisionError("probe Rabi frequency must be non-zero")
    d = _dipole(atom, transition)
    return 2.0 * cell_density * d**2 * np.asarray(sigma) / (EPS0 * HBAR * rabi)


def chi_four_level(atom: AtomSystem, fields: FieldConfig, density: float) -> Susceptibility:
    """Bare susceptibility of the coupled four-level scheme."""
    s32, s42 = _probe_sigmas(atom, fields)
    c32 = chi_from_sigma(atom, density, "32", s32, fields.omega_p32)
    c42 = chi_from_sigma(atom, density, "42", s42, atom.beta * fields.omega_p32)
    return Susceptibility(_squeeze(c32), _squeeze(c42), Model.FOUR_LEVEL)


def _lambda_sigma(omega_c, d_exc, g, omega_p):
    """Probe coherence of an isolated lambda system.

    Obtained from the four-level coherence by setting the second excited
    state's couplings to zero (α = β = 0); the common factor of the removed
    state cancels between numerator and denominator.
    """
    return 2j * g * omega_p / (4.0 * g * d_exc + omega_c**2)


def _lambda_parts(atom: AtomSystem, fields: FieldConfig, which):
    d3, d4, g = _detuning_factors(atom, fields.delta_1, fields.delta_2)
    om = fields.omega_c31
    if om == 0:
        d = d3 if which == 3 else d4
        _check_z(d, _z_scale(atom, fields) ** (1 / 3))
        return 0.5j * fields.omega_p32 * (1.0 if which == 3 else atom.beta) / d
    if which == 3:
        den = 4.0 * g * d3 + om**2
        s = _lambda_sigma(om, d3, g, fields.omega_p32)
    else:
        den = 4.0 * g * d4 + (atom.alpha * om) ** 2
        s = _lambda_sigma(atom.alpha * om, d4, g, atom.beta * fields.omega_p32)
    _check_z(den, _z_scale(atom, fields) ** (2 / 3))
    return s


def chi_single_lambda(atom: AtomSystem, fields: FieldConfig, density: float, which: int) -> Susceptibility:
    """Bare susceptibility of one isolated lambda.

    ``which=3`` keeps {|1>, |2>, |3>} with detuning Δ and dipoles (d31, d32).
    ``which=4`` keeps {|1>, |2>, |4>} with detuning Δ + ω43 and dipoles
    (α d31, β d32).
    """
    if which == 3:
        s = _lambda_parts(atom, fields, 3)
        c32 = chi_from_sigma(atom, density, "32", s, fields.omega_p32)
        return Susceptibility(_squeeze(c32), _squeeze(np.zeros_like(c32)), Model.SINGLE_LAMBDA3)
    if which == 4:
        s = _lambda_parts(atom, fields, 4)
        c42 = chi_from_sigma(atom, density, "42", s, atom.beta * fields.omega_p32)
        return Susceptibility(_squeeze(np.zeros_like(c42)), _squeeze(c42), Model.SINGLE_LAMBDA4)
    raise ConfigurationError(f"which must be 3 or 4, got {which}")


def chi_two_three_level(atom: AtomSystem, fields: FieldConfig, density: float) -> Susceptibility:
    """Sum of two independent lambda systems sharing the ground states."""
    a = chi_single_lambda(atom, fields, density, 3)
    b = chi_single_lambda(atom, fields, density, 4)
    return Susceptibility(a.chi32, b.chi42, Model.TWO_THREE_LEVEL)


def chi_model(model, atom: AtomSystem, fields: FieldConfig, density: float) -> Susceptibility:
    """Dispatch on :class:`Model`."""
    model = Model(model)
    if model is Model.FOUR_LEVEL:
        return chi_four_level(atom, fields, density)
    if model is Model.TWO_THREE_LEVEL:
        return chi_two_three_level(atom, fields, density)
    if model is Model.SINGLE_LAMBDA3:
        return chi_single_lambda(atom, fields, density, 3)
    return chi_single_lambda(atom, fields, density, 4)


def _squeeze(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def steady_state_oracle(atom: AtomSystem, fields: FieldConfig) -> CoherenceSet:
    """Brute-force steady state from the full equations of motion.

    Builds the 6x6 complex linear system for (σ43, σ42, σ41, σ32, σ31, σ12)
    with σ22 = 1, keeps every term linear in the unknowns to first order in the
    probe, and solves it. Products of a first-order coherence with a probe
    field, and terms coupling a coherence to the conjugate of another, are
    dropped. The sign and detuning conventions follow the rotating frame used
    by the analytic solution.

    Only scalar detunings are accepted.
    """
    d1 = float(fields.delta_1)
    d2 = float(fields.delta_2)
    oc = fields.omega_c31
    oc4 = atom.alpha * oc
    op = fields.omega_p32
    op4 = atom.beta * op
    w43 = atom.omega43
    h = 0.5j
    i43, i42, i41, i32, i31, i12 = range(6)
    m = np.zeros((6, 6), dtype=complex)
    rhs = np.zeros(6, dtype=complex)

    # d/dt σ43 = -(iω43 + γ43) σ43 + (i/2)(Ω41 σ13 + Ω42 σ23 - Ω13 σ41 - Ω23 σ42)
    m[i43, i43] = -(1j * w43 + atom.gamma43)
    m[i43, i41] = -h * oc
    # d/dt σ42 = -(γ42 + i(ω43 + Δ + δ)) σ42 + (i/2)(Ω41 σ12 + Ω42 σ22 - ...)
    m[i42, i42] = -(atom.gamma42 + 1j * (w43 + d1 + d2))
    m[i42, i12] = h * oc4
    rhs[i42] = -h * op4
    # d/dt σ41 = -(γ41 + i(ω43 + Δ)) σ41 + (i/2)(Ω41 σ11 + Ω42 σ21 - Ω31 σ43 - Ω41 σ44)
    m[i41, i41] = -(atom.gamma41 + 1j * (w43 + d1))
    m[i41, i43] = -h * oc
    # d/dt σ32 = -(γ32 + i(Δ + δ)) σ32 + (i/2)(Ω31 σ12 + Ω32 σ22 - ...)
    m[i32, i32] = -(atom.gamma32 + 1j * (d1 + d2))
    m[i32, i12] = h * oc
    rhs[i32] = -h * op
    # d/dt σ31 = -(γ31 + iΔ) σ31 + (i/2)(Ω31 σ11 + Ω32 σ21 - Ω31 σ33 - Ω41 σ34)
    m[i31, i31] = -(atom.gamma31 + 1j * d1)
    # d/dt σ12 = -(γ21 + iδ) σ12 + (i/2)(Ω13 σ32 + Ω14 σ42 - ...)
    m[i12, i12] = -(atom.gamma21 + 1j * d2)
    m[i12, i32] = h * oc
    m[i12, i42] = h * oc4

    # Equilibrate rows so the condition number reflects the physics, not units.
    scale = np.max(np.abs(m), axis=1)
    scale[scale == 0] = 1.0
    ms = m / scale[:, None]
    if not np.all(np.isfinite(ms)) or np.linalg.cond(ms) > 1e15:
        raise SingularSystemError("steady-state equations are singular for these parameters")
    x = np.linalg.solve(ms, rhs / scale)
    return CoherenceSet(
        sigma42=complex(x[i42]),
        sigma32=complex(x[i32]),
        sigma41=complex(x[i41]),
        sigma31=complex(x[i31]),
        sigma43=complex(x[i43]),
        sigma21=complex(np.conj(x[i12])),
    )
