"""Physical constants used across modules (SI units, angular frequencies in rad/s)."""

import numpy as np
from scipy import constants as sc

TWO_PI = 2.0 * np.pi
HBAR = sc.hbar
EPS0 = sc.epsilon_0
C_LIGHT = sc.c
K_B = sc.k
AMU = sc.atomic_mass
E_CHARGE = sc.e
BOHR = sc.physical_constants["Bohr radius"][0]

#: Natural linewidth of the Rb D1 line, 2π × 5.75 MHz.
GAMMA_D1 = TWO_PI * 5.75e6
#: Rb D1 vacuum wavelength (m); identical to the precision needed for both isotopes.
LAMBDA_D1 = 794.979e-9
OMEGA_D1 = TWO_PI * C_LIGHT / LAMBDA_D1


def mhz_to_rad(f_mhz):
    """Convert a frequency quoted as f/2π in MHz to rad/s."""
    return TWO_PI * 1e6 * np.asarray(f_mhz, dtype=float)


def rad_to_mhz(w):
    """Convert an angular frequency in rad/s to f/2π in MHz."""
    return np.asarray(w, dtype=float) / (TWO_PI * 1e6)
