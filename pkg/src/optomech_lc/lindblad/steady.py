"""Steady state and number statistics of the truncated master equation."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply, splu

from ..errors import NegativeWeight, SolverStalled

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    n_cav: int
    n_res: int
    alpha_shift: complex
    residual: float = float("nan")

    @property
    def resonator_populations(self):
        diag = np.real(np.diag(self.matrix)).reshape(self.n_cav, self.n_res)
        return diag.sum(axis=0)

    @property
    def cavity_populations(self):
        diag = np.real(np.diag(self.matrix)).reshape(self.n_cav, self.n_res)
        return diag.sum(axis=1)

    def reduced_resonator(self):
        r = self.matrix.reshape(self.n_cav, self.n_res, self.n_cav, self.n_res)
        return np.einsum("inim->nm", r)

    def reduced_cavity(self):
        r = self.matrix.reshape(self.n_cav, self.n_res, self.n_cav, self.n_res)
        return np.einsum("injn->ij", r)


@dataclass(frozen=True)
class Observables:
    n_avg: float
    n2_avg: float
    fano: float
    populations: np.ndarray


def _finalize(L, v, residual):
    rho = L.unvectorize(v)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    dm = DensityMatrix(matrix=rho, n_cav=L.hc.n_cav, n_res=L.hc.n_res,
                       alpha_shift=L.alpha_shift, residual=residual)
    worst = np.real(np.diag(rho)).min()
    if worst < -1e-6:
        raise NegativeWeight(f"population {worst:.3e} < 0; enlarge the basis")
    return dm


def steady_state(L, tol=RESIDUAL_TOL):
    """Null vector of `L` with unit trace, by sparse LU.

    One equation (the ground-state population row) is replaced by the trace
    condition.  Raises :class:`SolverStalled` when ``|L rho| / |rho| >= tol``.
    """
    tr = L.trace_vector
    k = int(np.nonzero(tr)[0][0])
    A = L.matrix.tolil()
    A[k, :] = tr
    rhs = np.zeros(L.size, dtype=complex)
    rhs[k] = 1.0
    lu = splu(A.tocsc(), permc_spec="COLAMD")
    v = lu.solve(rhs)
    # one step of iterative refinement
    v = v + lu.solve(rhs - A @ v)
    residual = float(np.linalg.norm(L.matvec(v)) / np.linalg.norm(v))
    if not residual < tol:
        raise SolverStalled(f"steady-state residual {residual:.3e} >= {tol:.1e}", residual)
    return _finalize(L, v, residual)


def evolve(L, rho0, times):
    """Propagate ``rho0`` under `L`; returns a list of :class:`DensityMatrix`."""
    v0 = L.vectorize(rho0)
    times = np.asarray(times, dtype=float)
    vs = expm_multiply(sp.csc_matrix(L.matrix), v0, start=times[0], stop=times[-1],
                       num=times.size, endpoint=True)
    out = []
    for v in vs:
        rho = L.unvectorize(v)
        out.append(DensityMatrix(matrix=rho, n_cav=L.hc.n_cav, n_res=L.hc.n_res,
                                 alpha_shift=L.alpha_shift))
    return out


def observables(rho):
    """Resonator ``<n>``, ``<n^2>``, Fano factor and number distribution."""
    p = rho.resonator_populations
    n = np.arange(p.size)
    n1 = float(p @ n)
    n2 = float(p @ n ** 2)
    fano = (n2 - n1 ** 2) / n1 if n1 > 0 else float("nan")
    return Observables(n_avg=n1, n2_avg=n2, fano=fano, populations=p)


def cavity_occupation(rho):
    """Lab-frame ``<a^dagger a>``, undoing the displacement."""
    rc = rho.reduced_cavity()
    a = np.diag(np.sqrt(np.arange(1, rho.n_cav)), 1) + rho.alpha_shift * np.eye(rho.n_cav)
    return float(np.real(np.trace(a.conj().T @ a @ rc)))


def thermal_populations(nbar, n_res):
    n = np.arange(n_res)
    if nbar == 0:
        p = (n == 0).astype(float)
    else:
        p = (nbar / (nbar + 1)) ** n / (nbar + 1)
    return p / p.sum()
