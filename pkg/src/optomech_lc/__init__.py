"""Amplitude noise and linewidths of an optomechanical limit cycle.

Three engines share one parameter set (:class:`SystemParams`):
``semiclassical`` (analytic slow-amplitude theory), ``langevin``
(truncated-Wigner stochastic simulation) and ``lindblad`` (master equation).
"""
from .errors import OptomechError, ValidationError
from .params import SystemParams, validate

__version__ = "0.1.0"
__all__ = ["OptomechError", "SystemParams", "ValidationError", "validate", "__version__"]
