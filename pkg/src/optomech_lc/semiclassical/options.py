from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class SemiclassicalOptions:
    """Numerical knobs of the semiclassical engine.

    ``measure`` selects the phase-space weight of the amplitude density:
    ``"polar"`` uses ``B dB`` (the radial marginal of the 2-D Wigner density),
    ``"flat"`` uses plain ``dB``.
    ``wigner_half`` subtracts 1/2 from the photon sum in the static shift.
    ``vacuum_force_noise`` adds the force noise that cavity vacuum
    fluctuations exert in the truncated-Wigner equations (see
    :func:`~optomech_lc.semiclassical.cavity.intrinsic_diffusion`); it is off
    for the physical prediction and on when comparing with the Langevin engine.
    """

    grid_n: int = 400
    max_grid_n: int = 6400
    b_max: Optional[float] = None
    measure: str = "polar"
    wigner_half: bool = False
    fp_tol: float = 1e-10
    fp_damping: float = 0.5
    max_iter: int = 200
    fallback_linear: bool = True
    scan_n: int = 400
    check_grid: bool = True
    vacuum_force_noise: bool = False

    def __post_init__(self):
        if self.measure not in ("polar", "flat"):
            raise ValueError(f"measure must be 'polar' or 'flat', got {self.measure!r}")
        if self.grid_n < 200:
            raise ValueError("grid_n must be >= 200")
        if not 0 < self.fp_damping <= 1:
            raise ValueError("fp_damping must lie in (0, 1]")
