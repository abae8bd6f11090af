"""Truncated Liouvillian of the driven cavity + mechanical resonator.

States live on ``n_cav x n_res`` number states (cavity index slowest).  The
density matrix is vectorised row-major, ``vec[I * N + J] = rho[I, J]``, and
only elements whose resonator indices differ by at most ``coherence_band``
are kept.

In the displaced frame the cavity operator is ``a = a' + alpha_0`` with
``alpha_0 = -i Omega / (gamma_c/2 - i Delta)``, the uncoupled steady
amplitude.  The Hamiltonian and the cavity dissipator are assembled from this
shifted operator directly, so every cross term the displacement generates is
kept exactly.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import DimensionOverflow
from ..params import validate

# Rough bytes per kept element for the sparse LU of the Liouvillian
# (measured fill ~800 complex entries per row at n_cav=3, n_res=120, W=25).
_LU_BYTES_PER_UNKNOWN = 800 * 16


@dataclass(frozen=True)
class HilbertConfig:
    n_cav: int = 3
    n_res: int = 120
    displaced: bool = True
    coherence_band: int = 25
    memory_budget_mb: float = 3000.0

    def __post_init__(self):
        if self.n_cav < 2 or self.n_res < 2:
            raise ValueError("n_cav and n_res must be >= 2")
        if not 1 <= self.coherence_band <= self.n_res:
            raise ValueError("coherence_band must lie in [1, n_res]")

    @property
    def dim(self):
        return self.n_cav * self.n_res


def destroy(n):
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, format="csr")


class Liouvillian:
    """Sparse generator restricted to the banded index set.

    Attributes
    ----------
    matrix : csr_matrix acting on the kept elements
    keep : flat row-major indices of the kept elements in the full ``N x N``
    alpha_shift : cavity displacement (0 when not displaced)
    """

    def __init__(self, params, hc, matrix, keep, alpha_shift, ops):
        self.params = params
        self.hc = hc
        self.matrix = matrix
        self.keep = keep
        self.alpha_shift = alpha_shift
        self.ops = ops
        self._pos = None

    @property
    def size(self):
        return self.keep.size

    @property
    def dim(self):
        return self.hc.dim

    def matvec(self, v):
        return self.matrix @ v

    def rmatvec(self, v):
        """Adjoint action (Heisenberg picture) on a vectorised operator."""
        return self.matrix.conj().T @ v

    def vectorize(self, rho):
        """Kept elements of a full ``N x N`` matrix."""
        return np.asarray(rho).reshape(-1)[self.keep]

    def unvectorize(self, v):
        out = np.zeros(self.dim * self.dim, dtype=complex)
        out[self.keep] = v
        return out.reshape(self.dim, self.dim)

    @property
    def trace_vector(self):
        n = self.dim
        return (self.keep // n == self.keep % n).astype(float)

    def functional(self, op):
        """Vector ``w`` with ``w @ vec(X) = Tr[op X]`` on kept elements."""
        op = op.toarray() if sp.issparse(op) else np.asarray(op)
        return self.vectorize(op.T)


def _dissipator(c, ident):
    cdc = (c.conj().T @ c).tocsr()
    return (sp.kron(c, c.conj(), format="csr")
            - 0.5 * sp.kron(cdc, ident, format="csr")
            - 0.5 * sp.kron(ident, cdc.T, format="csr"))


def operators(params, hc):
    """Composite-space operators ``a`` (lab-frame cavity), ``b`` and ``H``."""
    p = params
    alpha0 = p.alpha_free if hc.displaced else 0.0
    ic = sp.identity(hc.n_cav, format="csr")
    ir = sp.identity(hc.n_res, format="csr")
    a = sp.kron(destroy(hc.n_cav) + alpha0 * ic, ir, format="csr")
    b = sp.kron(ic, destroy(hc.n_res), format="csr")
    ad = a.conj().T.tocsr()
    bd = b.conj().T.tocsr()
    nc = (ad @ a).tocsr()
    x = b + bd
    H = (-p.delta * nc - 0.5 * p.g * (x @ nc) + p.omega_m * (bd @ b)
         + p.omega_drive * (a + ad))
    return {"a": a, "b": b, "H": H.tocsr(), "alpha0": alpha0}


def band_indices(hc):
    """Row-major indices of density-matrix elements inside the coherence band."""
    n = hc.dim
    res = np.arange(n) % hc.n_res
    rows, cols = np.nonzero(np.abs(res[:, None] - res[None, :]) <= hc.coherence_band)
    return rows * n + cols


def estimated_memory_mb(hc):
    return band_indices(hc).size * _LU_BYTES_PER_UNKNOWN / 2**20


def build_liouvillian(params, hc=None):
    """Assemble the banded Liouvillian for `params` in the configured frame."""
    validate(params)
    hc = hc or HilbertConfig()
    keep = band_indices(hc)
    need = keep.size * _LU_BYTES_PER_UNKNOWN / 2**20
    if need > hc.memory_budget_mb:
        raise DimensionOverflow(
            f"{keep.size} kept elements need ~{need:.0f} MB for factorisation; "
            f"budget is {hc.memory_budget_mb:.0f} MB")
    ops = operators(params, hc)
    p = params
    n = hc.dim
    ident = sp.identity(n, format="csr")
    H = ops["H"]
    b = ops["b"]
    full = -1j * (sp.kron(H, ident, format="csr") - sp.kron(ident, H.T, format="csr"))
    full = full + p.gamma_c * _dissipator(ops["a"], ident)
    full = full + p.gamma_m * (p.nbar + 1) * _dissipator(b, ident)
    if p.nbar > 0:
        full = full + p.gamma_m * p.nbar * _dissipator(b.conj().T.tocsr(), ident)
    matrix = full.tocsr()[keep][:, keep].tocsr()
    matrix.eliminate_zeros()
    return Liouvillian(params, hc, matrix, keep, ops["alpha0"], ops)
