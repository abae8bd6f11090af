"""Limit cycles, Gaussian noise statistics and linewidths."""
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from ..errors import DegenerateState, SingularBracket
from .bessel import bessel_table
from .cavity import intrinsic_diffusion, rate_arrays
from .fokker_planck import default_b_max
from .options import SemiclassicalOptions

_ROOT_FP_TOL = 1e-15


@dataclass(frozen=True)
class PhaseDiffusion:
    direct: float
    spring: float
    total: float
    linewidth: float


@dataclass(frozen=True)
class LimitCycle:
    b0: float
    stable: bool
    gamma_ba: float
    delta_omega: float
    d_minus: float
    d_plus: float
    dgamma_db: float
    ddelta_omega_db: float
    gamma_l: float
    delta_omega_l: float
    sigma2: float
    fano: float
    n_avg: float
    beta_c: complex
    d_phi: float
    d_phi_direct: float
    d_phi_spring: float
    lambda_0: float
    lambda_m: float
    d_intrinsic: float


def _root_opts(opts):
    return replace(opts, fp_tol=min(opts.fp_tol, _ROOT_FP_TOL), max_iter=max(opts.max_iter, 400),
                   fallback_linear=True)


def _scalar(params, opts, key):
    def f(b):
        return float(rate_arrays(np.array([b]), params, opts)[key][0])
    return f


def _derivative(params, opts, b0):
    """Central difference with one Richardson step for gamma_BA and delta_omega."""
    h = max(1e-4, 1e-4 * b0)
    pts = np.array([b0 - h, b0 + h, b0 - h / 2, b0 + h / 2])
    r = rate_arrays(pts, params, opts)
    out = []
    for key in ("gamma_ba", "delta_omega"):
        v = r[key]
        coarse = (v[1] - v[0]) / (2 * h)
        fine = (v[3] - v[2]) / h
        out.append((4 * fine - coarse) / 3)
    return out


def phase_diffusion(lc, params):
    """Direct, optical-spring and total phase diffusion of a limit cycle."""
    if lc.gamma_l == 0:
        raise ValueError("phase diffusion needs a non-degenerate limit cycle")
    d_m = lc.d_intrinsic
    scale = 1.0 / (2 * lc.b0 ** 2)
    direct = scale * (d_m + lc.d_plus)
    spring = scale * 4 * lc.delta_omega_l ** 2 / lc.gamma_l ** 2 * (d_m + lc.d_minus)
    total = direct + spring
    return PhaseDiffusion(direct=direct, spring=spring, total=total, linewidth=total / 2)


def _build_cycle(params, opts, b0):
    r = rate_arrays(np.array([b0]), params, opts)
    g_ba = float(r["gamma_ba"][0])
    d_om = float(r["delta_omega"][0])
    d_minus = float(r["d_minus"][0])
    d_plus = float(r["d_plus"][0])
    beta_c = complex(r["beta_c"][0])
    dgamma, ddelta = _derivative(params, opts, b0)
    gamma_l = b0 * dgamma
    delta_omega_l = b0 * ddelta
    stable = gamma_l > 0
    d_int = intrinsic_diffusion(params, opts)
    if stable:
        sigma2 = (d_int + d_minus) / (2 * b0 * dgamma)
    else:
        sigma2 = float("nan")
    partial = LimitCycle(
        b0=b0, stable=stable, gamma_ba=g_ba, delta_omega=d_om, d_minus=d_minus, d_plus=d_plus,
        dgamma_db=dgamma, ddelta_omega_db=ddelta, gamma_l=gamma_l, delta_omega_l=delta_omega_l,
        sigma2=sigma2, fano=4 * sigma2, n_avg=b0 ** 2 - 0.5 + abs(beta_c) ** 2, beta_c=beta_c,
        d_phi=float("nan"), d_phi_direct=float("nan"), d_phi_spring=float("nan"),
        lambda_0=gamma_l / 2, lambda_m=float("nan"), d_intrinsic=d_int)
    if gamma_l == 0:
        return partial
    pd = phase_diffusion(partial, params)
    return replace(partial, d_phi=pd.total, d_phi_direct=pd.direct, d_phi_spring=pd.spring,
                   lambda_m=pd.linewidth)


def find_limit_cycles(params, b_max=None, opts=None):
    """All non-zero amplitudes with ``gamma_m + gamma_BA(B) = 0`` on ``(0, b_max]``.

    Sign changes of the total damping are bracketed on a uniform scan and
    refined by Brent's method.  An empty list means the resonator relaxes to a
    fixed point for every amplitude in range.
    """
    opts = _root_opts(opts or SemiclassicalOptions())
    b_max = b_max if b_max is not None else (opts.b_max or default_b_max(params))
    scan = np.linspace(0.0, b_max, opts.scan_n + 1)[1:]
    total = params.gamma_m + rate_arrays(scan, params, opts)["gamma_ba"]
    f = _scalar(params, opts, "gamma_ba")

    def damping(b):
        return params.gamma_m + f(b)

    cycles = []
    sign = np.sign(total)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        b0 = brentq(damping, scan[i], scan[i + 1], xtol=1e-14, rtol=1e-15, maxiter=200)
        cycles.append(_build_cycle(params, opts, b0))
    for i in np.nonzero(total == 0)[0]:
        cycles.append(_build_cycle(params, opts, float(scan[i])))
    cycles.sort(key=lambda c: c.b0)
    return cycles


def onresonance_fano(b0, params, tol=1e-10):
    """Good-cavity Fano factor at the sideband resonance.

    ``F = (nbar + 1 + g^2 B0^2 / 4 omega_m^2) J_1(z) / (J_1(z) - z J_1'(z))``.
    The bracket denominator is evaluated as ``z J_2(z)``, which equals
    ``2 J_1 - z J_0`` without cancellation at small z.
    """
    if b0 <= 0:
        raise ValueError("b0 must be > 0")
    z = params.g * b0 / params.omega_m
    j0, j1, j2 = bessel_table(2, np.array([abs(z)]))[:, 0]
    denom = abs(z) * j2
    if abs(denom) <= tol * abs(j1):
        raise SingularBracket(f"J_1 - z J_1' vanishes at z={z:.6g}")
    prefactor = params.nbar + 1 + params.g ** 2 * b0 ** 2 / (4 * params.omega_m ** 2)
    return prefactor * j1 / denom


def dts_fano(b0, nbar):
    """Fano factor of a displaced thermal state with amplitude `b0`."""
    b2 = abs(b0) ** 2
    denom = nbar + b2
    if denom == 0:
        raise DegenerateState("displaced thermal state with b0 = 0 and nbar = 0 is the vacuum")
    return (nbar * (1 + nbar) + (2 * nbar + 1) * b2) / denom
