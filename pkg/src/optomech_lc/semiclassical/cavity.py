"""Cavity response to a harmonically oscillating resonator.

With the resonator at ``beta = beta_c + B exp(-i(omega_m t + phi))`` the
cavity field is a comb of sidebands ``alpha_n`` at frequencies ``n omega_m``,
weighted by Bessel functions of the modulation index ``z = g B / omega_m``.
Averaging the radiation-pressure force over one period gives the
back-action damping, frequency shift and diffusion constants.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import NoConvergence
from .bessel import signed_table
from .options import SemiclassicalOptions

#: Below this amplitude the 1/B prefactor is replaced by its analytic limit.
SMALL_B = 1e-8
_EPS = np.finfo(float).eps


def n_max_for(z):
    """Sideband truncation: ``ceil(z) + 20``, never below 25."""
    return max(25, int(math.ceil(float(np.max(z, initial=0.0)))) + 20)


@dataclass(frozen=True)
class CavityResponse:
    amplitude: float
    phase: float
    z: float
    delta_tilde: float
    beta_c: complex
    orders: np.ndarray
    alpha_n: np.ndarray

    @property
    def photon_number(self):
        """Mean coherent photon number ``sum_n |alpha_n|^2``."""
        return float(np.sum(np.abs(self.alpha_n) ** 2))


@dataclass(frozen=True)
class BackAction:
    gamma_ba: float
    delta_omega: float
    d_minus: float
    d_plus: float


class _Sidebands:
    """Bessel table for a vector of amplitudes, orders ``-n..n``."""

    def __init__(self, amplitude, params, extra=2):
        self.amplitude = np.atleast_1d(np.asarray(amplitude, dtype=float))
        self.z = params.g * self.amplitude / params.omega_m
        self.n_max = n_max_for(np.abs(self.z))
        self.orders, self.J = signed_table(self.n_max + extra, np.abs(self.z))
        if params.g < 0:
            # J_n(-x) = (-1)^n J_n(x)
            self.J = self.J * np.where(self.orders % 2, -1.0, 1.0)[:, None]
        self.params = params

    def h(self, delta_tilde):
        p = self.params
        return p.gamma_c / 2 + 1j * (delta_tilde[None, :] + self.orders[:, None] * p.omega_m)

    def photon_sum(self, delta_tilde):
        p = self.params
        h = self.h(delta_tilde)
        inner = np.abs(self.orders) <= self.n_max
        return p.omega_drive ** 2 * np.sum(
            (self.J[inner] ** 2) / (h[inner].real ** 2 + h[inner].imag ** 2), axis=0)


def intrinsic_diffusion(params, opts):
    """Amplitude diffusion not caused by the coherent cavity field.

    Always contains the thermal part ``D_m``.  With ``opts.vacuum_force_noise``
    it also contains ``D_vv = (g^2/8) gamma_c / (gamma_c^2 + omega_m^2)``:
    in the truncated-Wigner equations the vacuum part of the cavity field
    fluctuates, and ``g/2 (|alpha|^2 - 1/2)`` then carries a force noise with
    correlation ``(g^2/16) exp(-gamma_c |t|)``.  That noise is independent of
    the oscillation amplitude because the cavity equation is linear.
    """
    d = params.d_m
    if opts.vacuum_force_noise:
        p = params
        d += p.g ** 2 / 8 * p.gamma_c / (p.gamma_c ** 2 + p.omega_m ** 2)
    return d


def static_shift(photons, params, wigner_half=False):
    """Centre of the mechanical oscillation, ``beta_c``, from the photon sum."""
    if wigner_half:
        photons = photons - 0.5
    return 0.5j * params.g * photons / (1j * params.omega_m + params.gamma_m / 2)


def _linear_detuning(bands, opts):
    p = bands.params
    bare = np.full(bands.amplitude.shape, float(p.delta))
    beta_c = static_shift(bands.photon_sum(bare), p, opts.wigner_half)
    return p.delta + p.g * beta_c.real


def _solve_detuning(bands, opts):
    """Damped fixed-point iteration for the effective detuning."""
    p = bands.params
    lam = opts.fp_damping
    dt = np.full(bands.amplitude.shape, float(p.delta))
    for _ in range(opts.max_iter):
        target = p.delta + p.g * static_shift(bands.photon_sum(dt), p, opts.wigner_half).real
        new = (1 - lam) * dt + lam * target
        change = np.abs(new - dt)
        step = np.max(change, initial=0.0)
        dt = new
        # floor at a few ulps so tight tolerances cannot stall on rounding
        if np.all(change <= np.maximum(opts.fp_tol * p.gamma_c, 4 * _EPS * np.abs(dt))):
            return dt
    if not opts.fallback_linear:
        raise NoConvergence(
            f"effective detuning did not converge in {opts.max_iter} iterations "
            f"(last step {step:.3e})")
    warnings.warn("effective detuning iteration did not converge; "
                  "using the linear (weak-coupling) form", RuntimeWarning, stacklevel=3)
    return _linear_detuning(bands, opts)


def effective_detuning(amplitude, params, opts=None):
    """Self-consistent ``(delta_tilde, beta_c)`` for each amplitude."""
    opts = opts or SemiclassicalOptions()
    bands = _Sidebands(amplitude, params)
    dt = _solve_detuning(bands, opts)
    beta_c = static_shift(bands.photon_sum(dt), params, opts.wigner_half)
    return dt, beta_c


def cavity_response(amplitude, params, phi=0.0, opts=None):
    """Sideband amplitudes and static shift for one oscillation amplitude."""
    if amplitude < 0:
        raise ValueError("amplitude must be >= 0")
    opts = opts or SemiclassicalOptions()
    bands = _Sidebands([amplitude], params, extra=0)
    dt = _solve_detuning(bands, opts)
    beta_c = complex(static_shift(bands.photon_sum(dt), params, opts.wigner_half)[0])
    n = bands.orders
    # J_{-n} is the mirror image of the symmetric order table
    j_minus = bands.J[::-1, 0]
    denom = params.gamma_c / 2 + 1j * (n * params.omega_m - dt[0])
    alpha = -1j * params.omega_drive * j_minus * np.exp(1j * phi * n) / denom
    return CavityResponse(amplitude=float(amplitude), phase=float(phi), z=float(bands.z[0]),
                          delta_tilde=float(dt[0]), beta_c=beta_c, orders=n, alpha_n=alpha)


def _rates_from_bands(bands, delta_tilde):
    p = bands.params
    h = bands.h(delta_tilde)
    J = bands.J
    n_max = bands.n_max
    k = np.abs(bands.orders)
    omega2 = p.omega_drive ** 2

    # sum over n = -N-1..N of J_n J_{n+1} / (h_n h*_{n+1})
    lo = slice(1, -2)
    hi = slice(2, -1)
    assert bands.orders[1] == -n_max - 1 and bands.orders[-2] == n_max + 1
    series = np.sum(J[lo] * J[hi] / (h[lo] * np.conj(h[hi])), axis=0)
    B = bands.amplitude
    small = np.abs(B) < SMALL_B
    safe_B = np.where(small, 1.0, B)
    complex_rate = -0.5j * p.g * omega2 * series / safe_B
    if np.any(small):
        c = list(bands.orders).index(0)
        limit = (-0.25j * p.g ** 2 * omega2 / p.omega_m) * (
            1 / (h[c] * np.conj(h[c + 1])) - 1 / (h[c - 1] * np.conj(h[c])))
        complex_rate = np.where(small, limit, complex_rate)
    gamma_ba = 2 * complex_rate.real
    delta_omega = complex_rate.imag

    # diffusion: n = -N-1..N+1, neighbours n-1 and n+1
    mid = k <= n_max + 1
    centre = np.nonzero(mid)[0]
    below = J[centre - 1] / h[centre - 1]
    above = J[centre + 1] / h[centre + 1]
    weight = 1.0 / np.abs(h[centre]) ** 2
    pref = p.gamma_c * p.g ** 2 * omega2 / 8
    d_minus = pref * np.sum(weight * np.abs(below - above) ** 2, axis=0)
    d_plus = pref * np.sum(weight * np.abs(below + above) ** 2, axis=0)
    return gamma_ba, delta_omega, d_minus, d_plus


def rate_arrays(amplitude, params, opts=None):
    """Vectorised back-action quantities on an amplitude grid.

    Returns a dict of arrays: ``gamma_ba``, ``delta_omega``, ``d_minus``,
    ``d_plus``, ``delta_tilde`` and ``beta_c``.
    """
    opts = opts or SemiclassicalOptions()
    bands = _Sidebands(amplitude, params)
    dt = _solve_detuning(bands, opts)
    gamma_ba, delta_omega, d_minus, d_plus = _rates_from_bands(bands, dt)
    return {
        "gamma_ba": gamma_ba,
        "delta_omega": delta_omega,
        "d_minus": d_minus,
        "d_plus": d_plus,
        "delta_tilde": dt,
        "beta_c": static_shift(bands.photon_sum(dt), params, opts.wigner_half),
    }


def backaction_rates(amplitude, response, params):
    """Damping, frequency shift and diffusion at the response's detuning."""
    bands = _Sidebands([amplitude], params)
    vals = _rates_from_bands(bands, np.array([response.delta_tilde]))
    return BackAction(*(float(v[0]) for v in vals))
