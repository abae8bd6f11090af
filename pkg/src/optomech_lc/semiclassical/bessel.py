"""Bessel functions of the first kind of integer order.

Tables ``J_n(z)`` for ``n = 0..n_max`` are built with Miller's backward
recurrence, normalised by ``J_0 + 2 sum_k J_2k = 1``.  Small arguments use the
power series directly, where the recurrence would overflow.
"""
import math

import numpy as np

_SERIES_BELOW = 1.0
_SERIES_TERMS = 20
_RESCALE = 1e200


def _series_table(n_max, z):
    """Power series ``sum_k (-1)^k (z/2)^(2k+n) / (k! (k+n)!)`` for small z."""
    orders = np.arange(n_max + 1)[:, None]
    half = z[None, :] / 2.0
    q = -half * half
    log_fact = np.array([math.lgamma(n + 1.0) for n in range(n_max + 1)])[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = np.exp(orders * np.log(half) - log_fact)
    lead[0] = 1.0
    term = np.ones_like(lead)
    total = np.ones_like(lead)
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + orders))
        total = total + term
    return lead * total


def _miller_table(n_max, z):
    top = max(n_max, int(np.max(z)))
    start = top + 30 + int(4.0 * math.sqrt(top + 1))
    start += start % 2
    table = np.zeros((n_max + 1, z.size))
    upper = np.zeros(z.size)
    current = np.full(z.size, 1e-300)
    norm = np.zeros(z.size)
    two_over_z = 2.0 / z
    for k in range(start, 0, -1):
        lower = k * two_over_z * current - upper
        upper, current = current, lower
        # `current` now holds J_{k-1} up to a common factor
        if k - 1 <= n_max:
            table[k - 1] = current
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * current
        big = np.abs(current) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            current *= scale
            upper *= scale
            norm *= scale
            table *= scale
    norm += current
    return table / norm


def bessel_table(n_max, z):
    """Return ``J_n(z)`` for ``n = 0..n_max`` with shape ``(n_max + 1,) + z.shape``.

    `z` must be non-negative.  Absolute error is below 1e-12 for ``z <= 50``
    and ``n_max <= 80``.
    """
    z = np.asarray(z, dtype=float)
    shape = z.shape
    flat = z.ravel()
    if np.any(flat < 0):
        raise ValueError("bessel_table requires z >= 0")
    out = np.empty((n_max + 1, flat.size))
    small = flat < _SERIES_BELOW
    if np.any(small):
        out[:, small] = _series_table(n_max, flat[small])
    if np.any(~small):
        out[:, ~small] = _miller_table(n_max, flat[~small])
    return out.reshape((n_max + 1,) + shape)


def signed_table(n_max, z):
    """Return ``(orders, J)`` for orders ``-n_max..n_max``.

    Negative orders follow ``J_{-n} = (-1)^n J_n``.  ``J[n_max + n]`` is ``J_n``.
    """
    pos = bessel_table(n_max, z)
    orders = np.arange(-n_max, n_max + 1)
    sign = np.where(np.arange(n_max, 0, -1) % 2 == 0, 1.0, -1.0)
    sign = sign.reshape((-1,) + (1,) * (pos.ndim - 1))
    neg = sign * pos[:0:-1]
    return orders, np.concatenate([neg, pos], axis=0)


def bessel_j(n, z):
    """Scalar ``J_n(z)`` for integer `n` and ``z >= 0``."""
    n = int(n)
    value = float(bessel_table(abs(n), np.array([float(z)]))[abs(n), 0])
    if n < 0 and n % 2:
        value = -value
    return value
