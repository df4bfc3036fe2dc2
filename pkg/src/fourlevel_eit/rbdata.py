"""Rubidium D1 reference data and unit conversions.

Level assignment for a configuration (control ground F_c, probe ground F_p):
|1> = F_c, |2> = F_p, |3> = lower excited F', |4> = upper excited F'.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import Rational
from sympy.physics.wigner import wigner_6j

from .atomic import AtomSystem
from .constants import AMU, BOHR, C_LIGHT, E_CHARGE, EPS0, GAMMA_D1, HBAR, K_B, LAMBDA_D1, TWO_PI
from .errors import ConfigurationError, TemperatureRangeError

__all__ = [
    "Quantity",
    "IsotopeData",
    "BeamConfig",
    "TransitionConfig",
    "ISOTOPES",
    "isotope",
    "relative_strength",
    "number_density",
    "rabi_from_power",
    "transition_config",
    "atom_system",
    "RABI_REFERENCE",
    "constants_report",
]


@dataclass(frozen=True)
class Quantity:
    """A constant with its unit and provenance."""

    value: float
    unit: str
    source: str


@dataclass(frozen=True)
class IsotopeData:
    name: str
    nuclear_spin: Fraction
    ground_F: tuple
    excited_F: tuple
    mass: Quantity
    wavelength: Quantity
    gamma: Quantity
    omega43: Quantity
    omega21: Quantity
    extra: dict = field(default_factory=dict)

    @property
    def mass_kg(self) -> float:
        return self.mass.value

    @property
    def omega_d1(self) -> float:
        return TWO_PI * C_LIGHT / self.wavelength.value


_STECK = "D. A. Steck, Rubidium 85/87 D Line Data"
_MODEL = "model parameter of the four-level D1 treatment"

ISOTOPES = {
    "Rb85": IsotopeData(
        name="Rb85",
        nuclear_spin=Fraction(5, 2),
        ground_F=(2, 3),
        excited_F=(2, 3),
        mass=Quantity(84.911789738 * AMU, "kg", _STECK),
        wavelength=Quantity(LAMBDA_D1, "m", _STECK),
        gamma=Quantity(GAMMA_D1, "rad/s", _MODEL),
        omega43=Quantity(TWO_PI * 361e6, "rad/s", _MODEL),
        omega21=Quantity(TWO_PI * 3.035732439e9, "rad/s", _STECK),
    ),
    "Rb87": IsotopeData(
        name="Rb87",
        nuclear_spin=Fraction(3, 2),
        ground_F=(1, 2),
        excited_F=(1, 2),
        mass=Quantity(86.909180527 * AMU, "kg", _STECK),
        wavelength=Quantity(LAMBDA_D1, "m", _STECK),
        gamma=Quantity(GAMMA_D1, "rad/s", _MODEL),
        omega43=Quantity(TWO_PI * 817e6, "rad/s", _MODEL),
        omega21=Quantity(TWO_PI * 6.834682610904e9, "rad/s", _STECK),
    ),
}

_ALIASES = {"85": "Rb85", "rb85": "Rb85", "85rb": "Rb85", "87": "Rb87", "rb87": "Rb87", "87rb": "Rb87"}


def isotope(name) -> IsotopeData:
    """Look up an isotope by name ("Rb85", "85", ...)."""
    key = str(name)
    if key in ISOTOPES:
        return ISOTOPES[key]
    key = _ALIASES.get(key.lower().replace("-", "").replace("_", ""))
    if key is None:
        raise ConfigurationError(f"unknown isotope {name!r}")
    return ISOTOPES[key]


#: D1 reduced dipole matrix element <J=1/2||er||J'=1/2> (Steck convention).
D1_REDUCED_DIPOLE = Quantity(2.9931 * E_CHARGE * BOHR, "C m", _STECK)


@lru_cache(maxsize=None)
def relative_strength(iso: str, F: int, Fp: int) -> Fraction:
    """Relative hyperfine transition strength S_FF' on the D1 line.

    S_FF' = (2F'+1)(2J+1) {J J' 1; F' F I}²; for fixed F the strengths sum to one.
    """
    data = isotope(iso)
    if F not in data.ground_F or Fp not in data.excited_F:
        raise ConfigurationError(f"invalid hyperfine labels F={F}, F'={Fp} for {data.name}")
    i = Rational(data.nuclear_spin.numerator, data.nuclear_spin.denominator)
    j = Rational(1, 2)
    s = (2 * Fp + 1) * (2 * j + 1) * wigner_6j(j, j, 1, Fp, F, i) ** 2
    s = Rational(s)
    return Fraction(int(s.p), int(s.q))


def hyperfine_dipole(iso: str, F: int, Fp: int) -> float:
    """Effective dipole moment of the F -> F' component (C m).

    Isotropic-average value d = √(S_FF'/3) × reduced dipole.
    """
    return float(np.sqrt(float(relative_strength(iso, F, Fp)) / 3.0)) * D1_REDUCED_DIPOLE.value


@dataclass(frozen=True)
class BeamConfig:
    """Gaussian beam given by total power (W) and 1/e² intensity diameter (m)."""

    power: float
    diameter: float

    def __post_init__(self):
        if self.power < 0 or not self.diameter > 0:
            raise ConfigurationError("beam power must be >= 0 and diameter > 0")

    @property
    def peak_intensity(self) -> float:
        w = 0.5 * self.diameter
        return 2.0 * self.power / (np.pi * w * w)

    @property
    def peak_field(self) -> float:
        return float(np.sqrt(2.0 * self.peak_intensity / (C_LIGHT * EPS0)))


def rabi_from_power(beam: BeamConfig, dipole: float) -> float:
    """Rabi frequency Ω = 2 d E / ħ at the beam centre (rad/s)."""
    if dipole < 0:
        raise ConfigurationError("dipole must be >= 0")
    return 2.0 * dipole * beam.peak_field / HBAR


#: Power -> Rabi anchor: 200 mW in a 1 mm beam gives 18 γ on the Rb85 F=2 -> F'=2 control.
RABI_REFERENCE = {
    "power": 0.2,
    "diameter": 1e-3,
    "rabi_over_gamma": 18.0,
    "isotope": "Rb85",
    "F": 2,
    "Fp": 2,
}


def _rabi_calibration() -> float:
    ref = RABI_REFERENCE
    beam = BeamConfig(ref["power"], ref["diameter"])
    d_needed = ref["rabi_over_gamma"] * GAMMA_D1 * HBAR / (2.0 * beam.peak_field)
    return d_needed / hyperfine_dipole(ref["isotope"], ref["F"], ref["Fp"])


#: Multiplier on hyperfine dipoles for control Rabi frequencies from beam power.
CONTROL_DIPOLE_SCALE = _rabi_calibration()


@dataclass(frozen=True)
class TransitionConfig:
    """Lambda configuration of one isotope.

    Attributes
    ----------
    alpha, beta : float
        Dipole ratios d41/d31 and d42/d32.
    d31, d32 : float
        ``d31`` is the calibrated control dipole used with :func:`rabi_from_power`;
        ``d32`` is the hyperfine probe dipole used in the susceptibility.
    probe_minus_control : float
        Probe minus control optical frequency at two-photon resonance (rad/s).
    control_resonance_Delta : dict
        One-photon detuning Δ that puts the control on each excited F'.
    """

    isotope: str
    control_ground: int
    probe_ground: int
    lower_excited: int
    upper_excited: int
    alpha: float
    beta: float
    d31: float
    d32: float
    probe_minus_control: float
    control_resonance_Delta: dict


def transition_config(iso, control_ground: int, probe_ground: int | None = None) -> TransitionConfig:
    """Dipole ratios and couplings for a control/probe ground-state pairing."""
    data = isotope(iso)
    if control_ground not in data.ground_F:
        raise ConfigurationError(f"control ground F={control_ground} invalid for {data.name}")
    if probe_ground is None:
        probe_ground = [F for F in data.ground_F if F != control_ground][0]
    if probe_ground not in data.ground_F or probe_ground == control_ground:
        raise ConfigurationError(
            f"probe ground F={probe_ground} must be the other ground level of {data.name}"
        )
    lo, hi = data.excited_F
    s = lambda F, Fp: float(relative_strength(data.name, F, Fp))  # noqa: E731
    alpha = float(np.sqrt(s(control_ground, hi) / s(control_ground, lo)))
    beta = float(np.sqrt(s(probe_ground, hi) / s(probe_ground, lo)))
    d31 = CONTROL_DIPOLE_SCALE * hyperfine_dipole(data.name, control_ground, lo)
    d32 = hyperfine_dipole(data.name, probe_ground, lo)
    # the upper ground level has the higher F
    sign = 1.0 if control_ground > probe_ground else -1.0
    return TransitionConfig(
        isotope=data.name,
        control_ground=control_ground,
        probe_ground=probe_ground,
        lower_excited=lo,
        upper_excited=hi,
        alpha=alpha,
        beta=beta,
        d31=d31,
        d32=d32,
        probe_minus_control=sign * data.omega21.value,
        control_resonance_Delta={lo: 0.0, hi: -data.omega43.value},
    )


def atom_system(iso, control_ground: int, probe_ground: int | None = None, gamma21: float = 0.0, **rates) -> AtomSystem:
    """Build an :class:`AtomSystem` for a configuration.

    Extra keyword arguments override dephasing rates (``gamma32=...``) or
    ``omega43``.
    """
    data = isotope(iso)
    tc = transition_config(iso, control_ground, probe_ground)
    kw = dict(
        omega43=data.omega43.value,
        omega21=data.omega21.value,
        alpha=tc.alpha,
        beta=tc.beta,
        d31=tc.d31,
        d32=tc.d32,
        gamma_nat=data.gamma.value,
        gamma21=gamma21,
    )
    kw.update(rates)
    return AtomSystem(**kw)


# --------------------------------------------------------------- vapor density

#: Melting point of rubidium (K).
T_MELT = 312.46
T_MIN, T_MAX = 250.0, 500.0


def _log10_p_solid(T):
    return -94.04826 - 1961.258 / T - 0.03771687 * T + 42.57526 * np.log10(T)


def _log10_p_liquid(T):
    return 15.88253 - 4529.635 / T + 0.00058663 * T - 2.99138 * np.log10(T)


# the two published branches disagree by 1.6e-4 dex at the melting point; the
# solid branch is offset to meet the liquid one so the law stays monotone
_SOLID_OFFSET = _log10_p_liquid(T_MELT) - _log10_p_solid(T_MELT)


def _log10_p_torr(T):
    T = np.asarray(T, dtype=float)
    return np.where(T < T_MELT, _log10_p_solid(T) + _SOLID_OFFSET, _log10_p_liquid(T))


def _raw_density(T):
    p = 10.0 ** _log10_p_torr(T) * 133.322368
    return p / (K_B * np.asarray(T, dtype=float))


#: Reference point: Rb85 at 50 °C has 1.5e17 atoms per m³.
DENSITY_REFERENCE = (323.15, 1.5e17)
DENSITY_CALIBRATION = DENSITY_REFERENCE[1] / float(_raw_density(DENSITY_REFERENCE[0]))


def number_density(temperature, iso="Rb85"):
    """Saturated vapor number density (m⁻³) of an isotopically pure cell.

    Vapor-pressure correlation for solid and liquid rubidium (Nesmeyanov, as
    tabulated by Steck) scaled by one calibration constant.

    Raises
    ------
    TemperatureRangeError
        Outside 250 K < T < 500 K.
    """
    isotope(iso)
    T = np.asarray(temperature, dtype=float)
    if np.any(T <= T_MIN) or np.any(T >= T_MAX):
        raise TemperatureRangeError(f"temperature must lie in ({T_MIN}, {T_MAX}) K")
    n = DENSITY_CALIBRATION * _raw_density(T)
    return n[()] if n.ndim == 0 else n


def constants_report() -> dict:
    """All stored constants with units and sources, JSON-serializable."""
    out = {}
    for name, d in ISOTOPES.items():
        entry = {}
        for key in ("mass", "wavelength", "gamma", "omega43", "omega21"):
            q = getattr(d, key)
            entry[key] = {"value": q.value, "unit": q.unit, "source": q.source}
        configs = {}
        for F in d.ground_F:
            tc = transition_config(name, F)
            configs[f"control_F{F}"] = {
                "alpha": tc.alpha,
                "beta": tc.beta,
                "d31": tc.d31,
                "d32": tc.d32,
                "probe_minus_control": tc.probe_minus_control,
            }
        entry["configurations"] = configs
        entry["relative_strengths"] = {
            f"{F}->{Fp}": str(relative_strength(name, F, Fp)) for F in d.ground_F for Fp in d.excited_F
        }
        out[name] = entry
    out["d1_reduced_dipole"] = {"value": D1_REDUCED_DIPOLE.value, "unit": "C m", "source": D1_REDUCED_DIPOLE.source}
    out["control_dipole_scale"] = {"value": CONTROL_DIPOLE_SCALE, "unit": "1", "source": "power-to-Rabi anchor", **RABI_REFERENCE}
    out["density_calibration"] = {
        "value": DENSITY_CALIBRATION,
        "unit": "1",
        "reference_temperature_K": DENSITY_REFERENCE[0],
        "reference_density_m3": DENSITY_REFERENCE[1],
    }
    return out
