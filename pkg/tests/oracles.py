"""Independent high-precision references for the test suite.

Complex error functions come from mpmath's arbitrary-precision ``erfc``
evaluated at 30 significant digits; the Maxwell-Lorentz pole integral comes
from mpmath quadrature. None of these share code with scipy.
"""

from __future__ import annotations

import mpmath as mp

DPS = 30


def erfc_ref(z) -> complex:
    """erfc(z)."""
    with mp.workdps(DPS):
        return complex(mp.erfc(mp.mpc(z)))


def faddeeva_ref(z) -> complex:
    """w(z) = exp(-z^2) erfc(-iz), formed in extended precision."""
    with mp.workdps(DPS):
        z = mp.mpc(z)
        return complex(mp.exp(-z * z) * mp.erfc(-1j * z))


def pole_integral_ref(a, u) -> complex:
    """J(a) = integral over the real line of exp(-v^2/u^2) / (v - a) dv."""
    with mp.workdps(DPS):
        a = mp.mpc(a)
        u = mp.mpf(u)
        f = lambda v: mp.exp(-((v / u) ** 2)) / (v - a)  # noqa: E731
        # split at the pole's real part so the peak is a breakpoint
        pts = sorted({-12 * u, a.real - 10 * abs(a.imag), a.real, a.real + 10 * abs(a.imag), 12 * u})
        pts = [p for p in pts if -12 * u <= p <= 12 * u]
        return complex(mp.quad(f, pts))
