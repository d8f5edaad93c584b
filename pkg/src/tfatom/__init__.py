"""Thomas-Fermi mean-field atoms: numerics for the universal profile,
zero-energy boundary phases, JWKB validation, channel spectra and
Aufbau-style atomic-number sequences."""

from . import aufbau, spectral, specfun, tf_core, zero_energy

__all__ = ["tf_core", "specfun", "zero_energy", "spectral", "aufbau"]
__version__ = "0.1.0"
