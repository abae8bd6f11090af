"""Slow-amplitude (Bessel-series) theory of the blue-detuned limit cycle."""
from .bessel import bessel_j, bessel_table
from .cavity import (BackAction, CavityResponse, backaction_rates, cavity_response,
                     effective_detuning, rate_arrays)
from .fokker_planck import AmplitudeDistribution, amplitude_distribution, default_b_max
from .limit_cycle import (LimitCycle, PhaseDiffusion, dts_fano, find_limit_cycles,
                          onresonance_fano, phase_diffusion)
from .options import SemiclassicalOptions

__all__ = [
    "AmplitudeDistribution", "BackAction", "CavityResponse", "LimitCycle", "PhaseDiffusion",
    "SemiclassicalOptions", "amplitude_distribution", "backaction_rates", "bessel_j",
    "bessel_table", "cavity_response", "default_b_max", "dts_fano", "effective_detuning",
    "find_limit_cycles", "onresonance_fano", "phase_diffusion", "rate_arrays",
]
