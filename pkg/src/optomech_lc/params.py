"""Physical parameters and deterministic seeding.

All rates and frequencies are expressed in units of the cavity decay rate
``gamma_c`` and hbar = 1, so energies are frequencies.
"""
import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (NegativeDrive, NegativeOccupation, NonPositiveFrequency,
                     ValidationError)

#: gamma_m must stay below this fraction of gamma_c for the slow-amplitude
#: (semiclassical) treatment to apply.
WEAK_DAMPING_RATIO = 0.01


class WeakDampingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Cavity-resonator parameters.

    Attributes
    ----------
    omega_m : mechanical frequency
    g : optomechanical coupling
    gamma_m : mechanical damping rate
    delta : drive detuning ``omega_d - omega_c`` (positive is blue)
    omega_drive : drive strength
    gamma_c : cavity decay rate (sets the unit)
    nbar : thermal occupation of the mechanical bath
    """

    omega_m: float
    g: float
    gamma_m: float
    delta: float
    omega_drive: float
    gamma_c: float = 1.0
    nbar: float = 0.0

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def d_m(self):
        """Thermal amplitude diffusion ``gamma_m (nbar + 1/2)``."""
        return self.gamma_m * (self.nbar + 0.5)

    @property
    def alpha_free(self):
        """Steady cavity amplitude at g = 0."""
        return -1j * self.omega_drive / (self.gamma_c / 2 - 1j * self.delta)

    def as_dict(self):
        return dataclasses.asdict(self)


PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(SystemParams))


def validate(params):
    """Check every invariant of `params` and return it unchanged.

    All violations are collected before raising :class:`ValidationError`.
    A :class:`WeakDampingWarning` is emitted (not raised) when ``gamma_m`` is
    not small compared to ``gamma_c``.
    """
    violations = []
    for name in ("omega_m", "gamma_m", "gamma_c"):
        value = getattr(params, name)
        if not value > 0:
            violations.append(NonPositiveFrequency(name, value, "must be > 0"))
    if not params.omega_drive >= 0:
        violations.append(NegativeDrive("omega_drive", params.omega_drive,
                                        "must be >= 0"))
    if not params.nbar >= 0:
        violations.append(NegativeOccupation("nbar", params.nbar, "must be >= 0"))
    for name in ("g", "delta"):
        value = getattr(params, name)
        if not np.isfinite(value):
            violations.append(NonPositiveFrequency(name, value, "must be finite"))
    if violations:
        raise ValidationError(violations)
    if params.gamma_m >= WEAK_DAMPING_RATIO * params.gamma_c:
        warnings.warn(
            f"gamma_m={params.gamma_m:g} is not << gamma_c={params.gamma_c:g}; "
            "the semiclassical amplitude equation may be inaccurate",
            WeakDampingWarning, stacklevel=2)
    return params


def seed_sequence(base_seed, *key):
    """Counter-based stream splitting.

    Stream ``key`` (e.g. a trajectory index) of base seed ``base_seed`` is
    ``SeedSequence(base_seed, spawn_key=key)``; streams for different keys are
    statistically independent, and adding streams never perturbs existing ones.
    """
    return np.random.SeedSequence(int(base_seed) & (2**64 - 1),
                                  spawn_key=tuple(int(k) for k in key))


def rng_for(base_seed, *key):
    return np.random.Generator(np.random.Philox(seed_sequence(base_seed, *key)))
