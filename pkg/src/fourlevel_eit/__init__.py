"""Four-level EIT and off-resonance Raman spectroscopy of alkali D1 vapor."""

__version__ = "0.1.0"
