"""Resonator spectrum from the quantum regression theorem.

``S(w) = int dt e^{-iwt} <{b^dagger(t), b(0)}>`` reduces, for a stationary
state, to ``2 Re Tr[b^dagger (iw - L)^{-1} (b rho + rho b - 2<b> rho)]``.
Subtracting ``<b> rho`` removes the coherent delta peak at w = 0.

Each frequency window is handled with a single sparse factorisation of
``sigma - L``: the slow eigenvalue near ``sigma`` locates the peak, and the
resolvent on the whole frequency grid is read off one Krylov space of
``(sigma - L)^{-1}``, which is invariant under the shift ``sigma -> iw``.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigs, splu

from ..errors import FitFailed, SolverStalled
from ..lorentz import LorentzFit, fit_lorentzian


@dataclass(frozen=True)
class SpectralPeak:
    name: str
    omega: np.ndarray
    values: np.ndarray
    eigenvalue: complex
    fit: Optional[LorentzFit]
    fit_error: Optional[str] = None

    @property
    def half_width(self):
        return self.fit.half_width if self.fit else float("nan")

    @property
    def center(self):
        return self.fit.center if self.fit else float("nan")


@dataclass(frozen=True)
class SpectrumEstimate:
    peaks: dict = field(default_factory=dict)

    @property
    def omega(self):
        return np.concatenate([p.omega for p in self.peaks.values()])

    @property
    def values(self):
        return np.concatenate([p.values for p in self.peaks.values()])

    @property
    def lambda_0(self):
        p = self.peaks.get("zero")
        return p.half_width if p else float("nan")

    @property
    def lambda_m(self):
        p = self.peaks.get("mechanical")
        return p.half_width if p else float("nan")


class ShiftInvert:
    """``(sigma - L)^{-1}`` as a factorised operator."""

    def __init__(self, L, sigma):
        self.sigma = complex(sigma)
        n = L.size
        A = (self.sigma * sp.identity(n, format="csr", dtype=complex) - L.matrix).tocsc()
        self.lu = splu(A, permc_spec="COLAMD")
        self.n = n

    def solve(self, x):
        return self.lu.solve(np.asarray(x, dtype=complex))

    def operator(self):
        return LinearOperator((self.n, self.n), matvec=self.solve, dtype=complex)

    def eigenvalues(self, L, k=6):
        """Eigenvalues of L nearest sigma, with the trace weight of each mode."""
        mu, vecs = eigs(self.operator(), k=k, which="LM", tol=1e-12)
        lam = self.sigma - 1.0 / mu
        tr = L.trace_vector
        weight = np.abs(tr @ vecs) / np.linalg.norm(vecs, axis=0)
        order = np.argsort(np.abs(lam - self.sigma))
        return lam[order], weight[order]


def correlation_vectors(L, rho):
    """Source ``v = vec(b rho + rho b - 2<b> rho)`` and functional for b^dagger."""
    b = L.ops["b"]
    r = rho.matrix
    mean_b = np.trace(b @ r)
    src = b @ r + (b.T @ r.T).T - 2 * mean_b * r
    v = L.vectorize(src)
    w = L.functional(b.conj().T)
    return v, w, complex(mean_b)


def resolvent_spectrum(shift_invert, v, w, omegas, tol=1e-10, max_krylov=120, check_every=5):
    """``2 Re w.(iw - L)^{-1} v`` for every w in `omegas` from one Krylov space."""
    omegas = np.asarray(omegas, dtype=float)
    beta = np.linalg.norm(v)
    n = v.size
    V = np.zeros((max_krylov + 1, n), dtype=complex)
    Hbar = np.zeros((max_krylov + 1, max_krylov), dtype=complex)
    V[0] = v / beta
    shifts = 1j * omegas - shift_invert.sigma
    worst = np.inf
    for m in range(1, max_krylov + 1):
        u = shift_invert.solve(V[m - 1])
        for _ in range(2):  # re-orthogonalised Gram-Schmidt
            coef = V[:m].conj() @ u
            u = u - coef @ V[:m]
            Hbar[:m, m - 1] += coef
        Hbar[m, m - 1] = np.linalg.norm(u)
        breakdown = Hbar[m, m - 1] < 1e-14 * np.abs(Hbar[:m, m - 1]).max()
        if not breakdown:
            V[m] = u / Hbar[m, m - 1]
        if m % check_every and not breakdown and m != max_krylov:
            continue
        H = Hbar[:m + 1, :m]
        eye = np.eye(m + 1, m)
        rhs = np.zeros(m + 1, dtype=complex)
        rhs[0] = beta
        wv = V[:m + 1] @ w
        values = np.empty(omegas.size)
        worst = 0.0
        for i, c in enumerate(shifts):
            M = eye + c * H
            coef, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            worst = max(worst, np.linalg.norm(M @ coef - rhs) / beta)
            values[i] = 2 * np.real(wv @ (H @ coef))
        if worst < tol or breakdown:
            return values
    raise SolverStalled(f"Krylov resolvent did not converge (residual {worst:.2e})", worst)


def _pick_mode(lam, weight, kind, omega_guess):
    traceless = weight < 1e-3
    decaying = lam.real < 0
    cand = traceless & decaying
    if kind == "zero":
        cand &= np.abs(lam.imag) < np.abs(lam.real)
    else:
        cand &= np.abs(lam.imag - omega_guess) < 0.5 * max(abs(omega_guess), 1e-12)
    if not np.any(cand):
        return None
    idx = np.nonzero(cand)[0]
    return lam[idx[np.argmax(lam.real[idx])]]


def spectral_peak(L, rho, kind, omega_guess=0.0, width_guess=None, points=60,
                  half_widths=5.0, max_residual=0.1):
    """Spectrum and Lorentzian fit in one window.

    ``kind`` is ``"zero"`` (peak at w = 0, width Lambda_0) or ``"mechanical"``
    (peak near the oscillation frequency, width Lambda_wm).  The guesses only
    place the factorisation shift; the window itself is centred on the slowest
    matching eigenvalue of L and spans ``half_widths`` of its decay rate.
    """
    p = L.params
    width_guess = width_guess or p.gamma_m
    centre = 0.0 if kind == "zero" else omega_guess or p.omega_m
    si = ShiftInvert(L, width_guess + 1j * centre)
    lam, weight = si.eigenvalues(L)
    mode = _pick_mode(lam, weight, kind, centre)
    if mode is None:
        raise FitFailed(f"no decaying mode found near {si.sigma:.6g}",
                        {"eigenvalues": lam.tolist()})
    gamma = -mode.real
    if kind == "zero":
        omegas = np.linspace(-half_widths * gamma, half_widths * gamma, 2 * (points // 2))
    else:
        omegas = mode.imag + np.linspace(-half_widths * gamma, half_widths * gamma,
                                         2 * (points // 2) + 1)
    v, w, _ = correlation_vectors(L, rho)
    values = resolvent_spectrum(si, v, w, omegas)
    try:
        fit = fit_lorentzian(omegas, values, max_residual=max_residual,
                             allow_dip=(kind == "zero"))
        err = None
    except FitFailed as exc:
        fit, err = None, str(exc)
    return SpectralPeak(name=kind, omega=omegas, values=values, eigenvalue=complex(mode),
                        fit=fit, fit_error=err)


def spectrum(L, rho, omega_guess=None, lambda0_guess=None, lambdam_guess=None, points=60,
             half_widths=5.0):
    """Both spectral windows; fit failures are recorded on the peaks."""
    peaks = {}
    peaks["zero"] = spectral_peak(L, rho, "zero", width_guess=lambda0_guess, points=points,
                                  half_widths=half_widths)
    peaks["mechanical"] = spectral_peak(L, rho, "mechanical", omega_guess=omega_guess,
                                        width_guess=lambdam_guess, points=points,
                                        half_widths=half_widths)
    return SpectrumEstimate(peaks=peaks)
