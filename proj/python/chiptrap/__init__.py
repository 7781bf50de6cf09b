"""Splitting microtrap toolkit: trap potentials, spectra, transition
probabilities and optimised ramps."""

from ._core import *  # noqa: F401,F403
from ._core import Error, InputError, ConfigError, NumericalError, AccuracyError, GapClosedError  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
