"""Pure numpy kernels, used when the compiled extension is unavailable.

Same contracts as the compiled module ``bargmann._kernels``.
"""
import numpy as np
from scipy.special import comb, gammaln

from bargmann.errors import CapacityError

BACKEND = "python"
MAX_PERMANENT_SIZE = 30
_CHUNK = 1 << 15
_TERM_BUDGET = 1 << 21


def permanent(a):
    """Permanent of a square complex matrix by Ryser's formula."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n > MAX_PERMANENT_SIZE:
        raise CapacityError(f"{n}x{n} permanent is beyond the supported size")
    powers = np.arange(n, dtype=np.int64)
    at = a.T
    total = 0j
    for start in range(1, 1 << n, _CHUNK):
        subsets = np.arange(start, min(1 << n, start + _CHUNK), dtype=np.int64)
        bits = (subsets[:, None] >> powers) & 1
        sums = bits.astype(np.complex128) @ at
        signs = 1 - 2 * (bits.sum(axis=1) & 1)
        total += np.sum(signs * np.prod(sums, axis=1))
    return complex(-total if n & 1 else total)


def fock_amplitudes(u, t, outputs):
    """Transition amplitudes ``<S|phi(U)|T>`` for every row ``S`` of ``outputs``.

    Uses Ryser's formula with the column multiplicities of ``T``, so the cost
    is ``prod(T_j + 1)`` terms per output rather than ``2^n``.
    """
    u = np.asarray(u, dtype=np.complex128)
    t = np.asarray(t, dtype=np.int64)
    outputs = np.atleast_2d(np.asarray(outputs, dtype=np.int64))
    n = int(t.sum())
    if outputs.size == 0:
        return np.zeros(outputs.shape[0], dtype=np.complex128)
    if np.any(outputs.sum(axis=1) != n):
        raise ValueError("outputs must carry the same photon number as the input")
    if n == 0:
        return np.ones(outputs.shape[0], dtype=np.complex128)
    cols = np.flatnonzero(t)
    mult = t[cols]
    grid = np.indices(tuple(mult + 1)).reshape(len(cols), -1).T
    coef = np.prod(comb(mult, grid), axis=1) * (1 - 2 * ((n - grid.sum(axis=1)) & 1))
    sums = grid.astype(np.complex128) @ u[:, cols].T
    out = np.empty(outputs.shape[0], dtype=np.complex128)
    step = max(1, _TERM_BUDGET // (grid.shape[0] * u.shape[0]))
    for lo in range(0, outputs.shape[0], step):
        block = outputs[lo:lo + step]
        terms = np.prod(sums[None, :, :] ** block[:, None, :], axis=2)
        out[lo:lo + step] = terms @ coef
    lognorm = 0.5 * (gammaln(outputs + 1).sum(axis=1) + gammaln(t + 1).sum())
    return out * np.exp(-lognorm)
