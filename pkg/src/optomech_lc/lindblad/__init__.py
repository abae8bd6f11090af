"""Master-equation engine on a truncated number-state basis."""
from .liouvillian import HilbertConfig, Liouvillian, build_liouvillian
from .spectrum import SpectralPeak, SpectrumEstimate, spectral_peak, spectrum
from .steady import (DensityMatrix, Observables, cavity_occupation, evolve, observables,
                     steady_state)

__all__ = [
    "DensityMatrix", "HilbertConfig", "Liouvillian", "Observables", "SpectralPeak",
    "SpectrumEstimate", "build_liouvillian", "cavity_occupation", "evolve", "observables",
    "spectral_peak", "spectrum", "steady_state",
]
