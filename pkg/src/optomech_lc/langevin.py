"""Truncated-Wigner Langevin simulation of the cavity and resonator.

The stochastic equations integrated here are

    d alpha = [i(Delta + g Re beta) alpha - i Omega - gamma_c alpha / 2] dt + dW_alpha
    d beta  = [i g/2 (|alpha|^2 - 1/2) - i omega_m beta - gamma_m beta / 2] dt + dW_beta

with complex white noise ``<dW_alpha* dW_alpha> = gamma_c/2 dt`` and
``<dW_beta* dW_beta> = gamma_m (nbar + 1/2) dt``.

The linear parts (rotation, damping and the Ornstein-Uhlenbeck noise) are
propagated exactly.  The cavity sees the resonator position at the step
midpoint (exponential midpoint rule) and the radiation-pressure force on the
resonator is integrated with the exponential trapezoid rule.  A plain
Euler-Maruyama step would add a spurious amplitude growth of order
``omega_m^2 dt / 2`` per unit time, far larger than ``gamma_m``.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
from scipy import signal, stats
from scipy.integrate import cumulative_trapezoid

from .errors import DurationTooShort, NonFiniteState, WindowTooShort
from .lorentz import fit_lorentzian
from .params import rng_for, validate


@dataclass(frozen=True)
class SdeConfig:
    """Integration and sampling settings (times in units of 1/gamma_c).

    ``dt``/``t_burn`` left as ``None`` are filled in by :meth:`resolved`.
    ``relax_rate`` is the slowest amplitude relaxation rate expected (for
    example the linearised damping of a limit cycle); it sets the default
    burn-in of ``10 / relax_rate``.  ``b_init`` and ``b_init_spread`` set the
    initial amplitude distribution (random phase); by default trajectories
    start from the thermal state of the bare resonator.  ``noise = False``
    integrates the deterministic equations (reference runs).
    """

    dt: Optional[float] = None
    t_burn: Optional[float] = None
    t_sample: float = 2.0e4
    n_traj: int = 16
    rng_seed: int = 0
    demod_window: float = 5.0
    relax_rate: Optional[float] = None
    b_init: Optional[float] = None
    b_init_spread: float = 0.0
    omega_ref: Optional[float] = None
    record_stride: int = 0
    noise: bool = True

    def max_dt(self, params):
        scales = [1 / params.gamma_c, 1 / params.omega_m]
        if params.delta != 0:
            scales.append(1 / abs(params.delta))
        return 0.05 * min(scales)

    def resolved(self, params):
        """Copy with defaults filled in and invariants checked."""
        from dataclasses import replace
        limit = self.max_dt(params)
        dt = self.dt if self.dt is not None else limit
        if dt > limit * (1 + 1e-12):
            raise ValueError(f"dt={dt:g} exceeds the resolution limit {limit:g}")
        rate = self.relax_rate if self.relax_rate else params.gamma_m
        t_burn = self.t_burn if self.t_burn is not None else 10.0 / rate
        if self.demod_window < 1:
            raise WindowTooShort(f"demod_window={self.demod_window} < 1 period")
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        return replace(self, dt=dt, t_burn=t_burn,
                       omega_ref=self.omega_ref if self.omega_ref else params.omega_m)


# -- single step ----------------------------------------------------------

def _coefficients(params, dt):
    p = params
    lb = -1j * p.omega_m - p.gamma_m / 2
    eb = np.exp(lb * dt)
    phi = (eb - 1) / lb
    psi = phi - eb / lb + (eb - 1) / (lb * lb * dt)
    w0 = phi - psi
    w1 = psi
    var_b = p.d_m * (-math.expm1(-p.gamma_m * dt)) / p.gamma_m
    var_a = 0.5 * (-math.expm1(-p.gamma_c * dt))
    return (complex(eb), complex(w0), complex(w1), math.sqrt(var_b / 2), math.sqrt(var_a / 2),
            float(p.delta), float(p.g), float(p.gamma_c), float(p.omega_drive), float(dt))


@numba.njit(cache=True, nogil=True)
def _advance(alpha, beta, x1, x2, x3, x4, eb, w0, w1, sb, sa, delta, g, gamma_c, drive, dt):
    dw_b = sb * (x3 + 1j * x4)
    dw_a = sa * (x1 + 1j * x2)
    f0 = 0.5j * g * (alpha.real * alpha.real + alpha.imag * alpha.imag - 0.5)
    pred = eb * beta + (w0 + w1) * f0 + dw_b
    x_mid = 0.5 * g * (beta.real + pred.real)
    la = 1j * (delta + x_mid) - 0.5 * gamma_c
    ea = np.exp(la * dt)
    new_alpha = ea * alpha - 1j * drive * (ea - 1.0) / la + dw_a
    f1 = 0.5j * g * (new_alpha.real * new_alpha.real + new_alpha.imag * new_alpha.imag - 0.5)
    new_beta = eb * beta + w0 * f0 + w1 * f1 + dw_b
    return new_alpha, new_beta


def step(alpha, beta, params, dt, noise):
    """Advance ``(alpha, beta)`` by one step.

    `noise` holds four independent standard normals (shape ``(4,)`` or
    ``(4,) + alpha.shape``); zeros give the deterministic update.
    """
    coef = _coefficients(params, dt)
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    noise = np.asarray(noise, dtype=float).reshape((4,) + alpha.shape)
    new_a = np.empty_like(alpha)
    new_b = np.empty_like(beta)
    for idx in np.ndindex(alpha.shape):
        x = noise[(slice(None),) + idx]
        new_a[idx], new_b[idx] = _advance(alpha[idx], beta[idx], x[0], x[1], x[2], x[3], *coef)
    if not (np.all(np.isfinite(new_a)) and np.all(np.isfinite(new_b))):
        raise NonFiniteState("state overflowed; dt too large or runaway parameters")
    if new_a.ndim == 0:
        return complex(new_a), complex(new_b)
    return new_a, new_b


# -- trajectory kernel ----------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _run(rng, alpha, beta, n_burn, n_blocks, block_steps, stride, omega_ref,
         eb, w0, w1, sb, sa, delta, g, gamma_c, drive, dt):
    for _ in range(n_burn):
        alpha, beta = _advance(alpha, beta, rng.standard_normal(), rng.standard_normal(),
                               rng.standard_normal(), rng.standard_normal(),
                               eb, w0, w1, sb, sa, delta, g, gamma_c, drive, dt)
    if not (np.isfinite(alpha.real) and np.isfinite(beta.real)
            and np.isfinite(alpha.imag) and np.isfinite(beta.imag)):
        return alpha, beta, None, None, 0j, 0.0, 0.0, None, -1
    n_rec = (n_blocks * block_steps) // stride if stride > 0 else 0
    records = np.zeros((n_rec, 2), dtype=np.complex128)
    env = np.zeros(n_blocks, dtype=np.complex128)
    rot = np.zeros(n_blocks, dtype=np.complex128)
    sum_beta = 0j
    s2 = 0.0
    s4 = 0.0
    k = 0
    turn = math.cos(omega_ref * dt) + 1j * math.sin(omega_ref * dt)
    xi = np.empty(4 * block_steps)
    for blk in range(n_blocks):
        e_acc = 0j
        r_acc = 0j
        # phasor exp(i omega_ref t), reset exactly once per block
        ph = omega_ref * k * dt
        c = math.cos(ph) + 1j * math.sin(ph)
        xi[:] = rng.standard_normal(4 * block_steps)
        for j in range(block_steps):
            if stride > 0 and k % stride == 0 and k // stride < n_rec:
                records[k // stride, 0] = alpha
                records[k // stride, 1] = beta
            e_acc += beta * c
            r_acc += c
            c *= turn
            sum_beta += beta
            m = beta.real * beta.real + beta.imag * beta.imag
            s2 += m
            s4 += m * m
            alpha, beta = _advance(alpha, beta, xi[4 * j], xi[4 * j + 1], xi[4 * j + 2],
                                   xi[4 * j + 3], eb, w0, w1, sb, sa, delta, g, gamma_c, drive, dt)
            k += 1
        env[blk] = e_acc / block_steps
        rot[blk] = r_acc / block_steps
        if not (np.isfinite(alpha.real) and np.isfinite(beta.real)):
            return alpha, beta, env, rot, sum_beta, s2, s4, records, blk
    return alpha, beta, env, rot, sum_beta, s2, s4, records, n_blocks


@dataclass(frozen=True)
class TrajectorySummary:
    """Demodulated record of one trajectory.

    ``amplitude``/``phase`` are block averages over the demodulation window,
    ``t`` the block start times (measured from the end of burn-in).
    ``n_avg``/``n2_avg`` are Weyl-ordered estimates from the raw samples of
    ``beta``.
    """

    t: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    beta_c: complex
    final_alpha: complex
    final_beta: complex
    n_avg: float
    n2_avg: float
    samples: int
    sum_b2: float = float("nan")
    sum_b4: float = float("nan")
    records: Optional[np.ndarray] = None


def demodulate(t, beta, omega_ref, demod_window, dt=None):
    """Amplitude and phase of ``beta = beta_c + B exp(-i(omega_ref t + phi))``.

    ``beta_c`` is the time average of `beta`; the envelope
    ``(beta - beta_c) exp(i omega_ref t)`` is block-averaged over
    `demod_window` periods.  Returns ``(t_blocks, B, phi, beta_c)``.
    """
    if demod_window < 1:
        raise WindowTooShort(f"demod_window={demod_window} < 1 period")
    t = np.asarray(t, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    dt = dt if dt is not None else t[1] - t[0]
    block = max(1, int(round(demod_window * 2 * np.pi / (omega_ref * dt))))
    n_blocks = t.size // block
    if n_blocks < 1:
        raise WindowTooShort("record shorter than one demodulation window")
    beta_c = beta.mean()
    used = n_blocks * block
    env = ((beta[:used] - beta_c) * np.exp(1j * omega_ref * t[:used])).reshape(n_blocks, block)
    env = env.mean(axis=1)
    return t[:used:block], np.abs(env), -np.angle(env), complex(beta_c)


def _initial_state(rng, params, cfg):
    alpha = complex(params.alpha_free)
    phase = rng.uniform(0, 2 * np.pi)
    if cfg.b_init is not None:
        amp = abs(cfg.b_init + cfg.b_init_spread * rng.standard_normal())
        beta = amp * np.exp(-1j * phase)
    else:
        s = math.sqrt(params.d_m / params.gamma_m / 2)
        beta = complex(s * rng.standard_normal(), s * rng.standard_normal())
    return alpha, beta


def run_trajectory(params, cfg, index, stream=()):
    """Integrate trajectory `index` on its own random stream.

    The stream is ``SeedSequence(cfg.rng_seed, spawn_key=(*stream, index))``,
    so trajectories (and sweep points, via `stream`) never share draws.
    """
    validate(params)
    cfg = cfg.resolved(params)
    rng = rng_for(cfg.rng_seed, *stream, index)
    alpha, beta = _initial_state(rng, params, cfg)
    coef = _coefficients(params, cfg.dt)
    if not cfg.noise:
        coef = coef[:3] + (0.0, 0.0) + coef[5:]
    block_steps = max(1, int(round(cfg.demod_window * 2 * np.pi / (cfg.omega_ref * cfg.dt))))
    n_blocks = max(1, int(cfg.t_sample / (block_steps * cfg.dt)))
    n_burn = int(round(cfg.t_burn / cfg.dt))
    out = _run(rng, alpha, beta, n_burn, n_blocks, block_steps, cfg.record_stride,
               cfg.omega_ref, *coef)
    alpha, beta, env, rot, sum_beta, s2, s4, records, done = out
    if done != n_blocks:
        where = "burn-in" if done < 0 else f"sampling block {done}"
        raise NonFiniteState(f"state overflowed during {where}", trajectory=index)
    samples = n_blocks * block_steps
    beta_c = sum_beta / samples
    envelope = env - beta_c * rot
    m2 = s2 / samples
    m4 = s4 / samples
    t_blocks = np.arange(n_blocks) * block_steps * cfg.dt
    return TrajectorySummary(
        t=t_blocks, amplitude=np.abs(envelope), phase=-np.angle(envelope), beta_c=complex(beta_c),
        final_alpha=complex(alpha), final_beta=complex(beta),
        n_avg=m2 - 0.5, n2_avg=m4 - m2, samples=samples, sum_b2=s2, sum_b4=s4,
        records=records if cfg.record_stride > 0 else None)


# -- ensembles ------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleResult:
    n_avg: float
    fano: float
    n_avg_se: float
    fano_se: float
    amplitudes: np.ndarray
    hist_edges: np.ndarray
    hist_density: np.ndarray
    demod_n_avg: float
    demod_fano: float
    trajectories: list


def _weyl(m2, m4):
    n = m2 - 0.5
    var = m4 - m2 - n * n
    return n, var / n


def jackknife(values_fn, groups):
    """Leave-one-group-out estimate: returns ``(full, standard_error)``."""
    full = values_fn(np.ones(groups, dtype=bool))
    if groups < 2:
        return full, float("nan")
    mask = np.ones(groups, dtype=bool)
    loo = []
    for i in range(groups):
        mask[i] = False
        loo.append(values_fn(mask))
        mask[i] = True
    loo = np.asarray(loo)
    se = np.sqrt((groups - 1) / groups * np.sum((loo - loo.mean(axis=0)) ** 2, axis=0))
    return full, se


def ensemble(cfg, params, workers=1, bins=200, stream=()):
    """Run ``cfg.n_traj`` trajectories and pool their statistics.

    ``<n>`` and ``F`` come from Weyl-ordered moments of the raw ``beta``
    samples, with jackknife errors over trajectories.  The amplitude
    histogram is built from the demodulated envelopes.
    """
    cfg = cfg.resolved(params)
    indices = range(cfg.n_traj)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as pool:
            trajs = list(pool.map(lambda i: run_trajectory(params, cfg, i, stream), indices))
    else:
        trajs = [run_trajectory(params, cfg, i, stream) for i in indices]

    s2 = np.array([t.sum_b2 for t in trajs])
    s4 = np.array([t.sum_b4 for t in trajs])
    ns = np.array([t.samples for t in trajs], dtype=float)

    def stats(mask):
        return np.array(_weyl(s2[mask].sum() / ns[mask].sum(), s4[mask].sum() / ns[mask].sum()))

    full, se = jackknife(stats, len(trajs))
    amps = np.concatenate([t.amplitude for t in trajs])
    d2 = np.mean(amps ** 2)
    d4 = np.mean(amps ** 4)
    dn, dfano = _weyl(d2, d4)
    density, edges = np.histogram(amps, bins=bins, density=True)
    return EnsembleResult(
        n_avg=float(full[0]), fano=float(full[1]), n_avg_se=float(se[0]), fano_se=float(se[1]),
        amplitudes=amps, hist_edges=edges, hist_density=density,
        demod_n_avg=float(dn), demod_fano=float(dfano), trajectories=trajs)


# -- spectra --------------------------------------------------------------

@dataclass(frozen=True)
class LangevinSpectrum:
    omega: np.ndarray
    values: np.ndarray


def spectrum_estimate(beta, dt, linewidth=None, segments=8):
    """Averaged-periodogram estimate of ``S(w)`` from a sampled ``beta(t)``.

    Uses ``S(w) = 2 PSD[conj(beta)](w / 2 pi)`` so that
    ``int S dw / 2 pi = 2 <|beta|^2>``, the Wigner form of
    ``<{b^dagger, b}>``.  With `linewidth` given, the record must span at
    least ``20 / linewidth`` and the frequency grid must resolve a fifth of it.
    """
    beta = np.asarray(beta, dtype=complex)
    duration = beta.size * dt
    if linewidth is not None and duration < 20 / linewidth:
        raise DurationTooShort(
            f"record of {duration:g} is shorter than 20/linewidth = {20 / linewidth:g}")
    nperseg = beta.size // segments if segments > 1 else beta.size
    if linewidth is not None:
        needed = int(np.ceil(2 * np.pi / (linewidth / 5) / dt))
        nperseg = max(nperseg, min(needed, beta.size))
    freq, psd = signal.welch(np.conj(beta), fs=1 / dt, nperseg=nperseg, return_onesided=False,
                             detrend=False, window="hann")
    order = np.argsort(freq)
    return LangevinSpectrum(omega=2 * np.pi * freq[order], values=2 * psd[order])


def ks_distance(samples, grid, density):
    """Kolmogorov-Smirnov distance between `samples` and a density tabulated on `grid`."""
    cdf = cumulative_trapezoid(density, grid, initial=0.0)
    cdf /= cdf[-1]
    return float(stats.kstest(np.asarray(samples, dtype=float),
                              lambda x: np.interp(x, grid, cdf)).statistic)


def fit_spectrum_peak(spec, center, half_window):
    sel = np.abs(spec.omega - center) <= half_window
    return fit_lorentzian(spec.omega[sel], spec.values[sel], max_residual=0.3)


def write_trajectory(path, summary, params, cfg, index=0):
    """Columnar dump ``t, Re alpha, Im alpha, Re beta, Im beta`` with a header."""
    cfg = cfg.resolved(params)
    if summary.records is None:
        raise ValueError("trajectory was run without record_stride")
    rec = summary.records
    t = np.arange(rec.shape[0]) * cfg.record_stride * cfg.dt
    data = np.column_stack([t, rec[:, 0].real, rec[:, 0].imag, rec[:, 1].real, rec[:, 1].imag])
    header = [f"{k} = {v!r}" for k, v in params.as_dict().items()]
    header += [f"rng_seed = {cfg.rng_seed}", f"trajectory = {index}", f"dt = {cfg.dt!r}",
               f"record_stride = {cfg.record_stride}", "t re_alpha im_alpha re_beta im_beta"]
    np.savetxt(path, data, fmt="%.9e", header="\n".join(header))
