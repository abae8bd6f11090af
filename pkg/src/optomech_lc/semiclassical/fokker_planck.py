"""Steady-state amplitude distribution of the slow amplitude equation."""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson, trapezoid

from ..errors import BoundaryMass, GridTooCoarse
from .cavity import intrinsic_diffusion, rate_arrays
from .options import SemiclassicalOptions

FIRST_ZERO_J0 = 2.404825557695773


def default_b_max(params):
    """Upper end of the amplitude grid.

    Covers the first limit cycle (1.2x the first zero of ``J_0(gB/omega_m)``,
    or ``5 omega_m / g`` when larger) and at least eight thermal widths.
    """
    thermal = 8.0 * np.sqrt(params.nbar + 1.0)
    if params.g == 0:
        return thermal
    scale = params.omega_m / abs(params.g)
    return max(1.2 * FIRST_ZERO_J0 * scale, 5.0 * scale, thermal)


@dataclass(frozen=True)
class AmplitudeDistribution:
    grid: np.ndarray
    potential: np.ndarray
    density: np.ndarray
    n_avg: float
    n2_avg: float
    fano: float
    mean_b2: float
    mean_b4: float
    beta_c: complex
    measure: str

    @property
    def well_depth(self):
        """Barrier height of the deepest interior minimum of U relative to
        the lower of its two flanks (0 when U has no interior minimum)."""
        u = self.potential
        i = int(np.argmin(u))
        if i == 0 or i == len(u) - 1:
            return 0.0
        return float(min(u[:i].max(), u[i:].max()) - u[i])

    @property
    def peak(self):
        return float(self.grid[int(np.argmax(self.density))])


def _moments(grid, potential, measure, beta_c2):
    shifted = potential - potential.min()
    weight = np.exp(-shifted)
    if measure == "polar":
        weight = weight * grid
    # the density is normalised for the trapezoid rule (its documented
    # contract); moments use Simpson's rule, which converges much faster
    weight = weight / trapezoid(weight, grid)
    norm = simpson(weight, x=grid)
    b2 = simpson(grid ** 2 * weight, x=grid) / norm
    b4 = simpson(grid ** 4 * weight, x=grid) / norm
    # Weyl (symmetric) ordering: <n> = <B^2> - 1/2, <n^2> = <B^4> - <B^2>
    n_sym = b2 - 0.5
    var = b4 - b2 - n_sym ** 2
    n_avg = n_sym + beta_c2
    return weight, b2, b4, n_avg, var


def amplitude_distribution(params, b_max=None, grid_n=None, opts=None, beta_c=None):
    """Normalised ``P(B)`` with the Weyl-ordered number moments.

    ``U(B)`` is the cumulative trapezoid of ``2B (gamma_m + gamma_BA) / (D_m + D_BA^-)``
    on a uniform grid of ``2 grid_n - 1`` points; the result is cross-checked
    against the embedded ``grid_n`` grid (every other point).  When `grid_n`
    is not given, the grid is doubled until that check passes (up to
    ``opts.max_grid_n``).

    `beta_c` is the static displacement whose modulus squared is added to
    ``<n>``; by default it is taken at the peak of the distribution.
    """
    opts = opts or SemiclassicalOptions()
    b_max = b_max if b_max is not None else (opts.b_max or default_b_max(params))
    auto = grid_n is None
    grid_n = grid_n or opts.grid_n
    while True:
        try:
            return _distribution(params, b_max, grid_n, opts, beta_c)
        except GridTooCoarse:
            if not auto or 2 * grid_n > opts.max_grid_n:
                raise
            grid_n *= 2


def _distribution(params, b_max, grid_n, opts, beta_c):
    grid = np.linspace(0.0, b_max, 2 * grid_n - 1)
    rates = rate_arrays(grid, params, opts)
    drift = params.gamma_m + rates["gamma_ba"]
    diffusion = intrinsic_diffusion(params, opts) + rates["d_minus"]
    integrand = 2 * grid * drift / diffusion
    potential = cumulative_trapezoid(integrand, grid, initial=0.0)

    density, b2, b4, n_avg, var = _moments(grid, potential, opts.measure, 0.0)
    if density[-1] > 1e-10 * density.max():
        raise BoundaryMass(
            f"P(b_max)/max P = {density[-1] / density.max():.2e} at b_max={b_max:g}; "
            "increase b_max")
    if beta_c is None:
        beta_c = complex(rates["beta_c"][int(np.argmax(density))])
    bc2 = abs(beta_c) ** 2
    n_avg += bc2

    if opts.check_grid:
        coarse = grid[::2]
        coarse_u = cumulative_trapezoid(integrand[::2], coarse, initial=0.0)
        n_coarse = _moments(coarse, coarse_u, opts.measure, bc2)[3]
        if abs(n_coarse - n_avg) > 1e-4 * max(abs(n_avg), 1e-2):
            raise GridTooCoarse(
                f"<n> changes from {n_coarse:.8g} to {n_avg:.8g} on grid doubling; "
                "increase grid_n")

    return AmplitudeDistribution(
        grid=grid, potential=potential, density=density,
        n_avg=float(n_avg), n2_avg=float(var + n_avg ** 2), fano=float(var / n_avg),
        mean_b2=float(b2), mean_b4=float(b4), beta_c=beta_c, measure=opts.measure)
