"""Mode unitaries on system indices and their action on Fock states.

A mode unitary ``U`` (``M x M``) acts on creation operators as
``a^dag_{j,alpha} -> sum_k U[k, j] a^dag_{k,alpha}``: it mixes systems and
leaves every internal mode alone, so the flat-mode transformation is
``V = U (x) I_d``. Fock amplitudes follow from permanents,

    <S|phi(V)|T> = per(V[S, T]) / sqrt(prod S! prod T!).

Since ``V`` is block diagonal over internal modes, photon numbers per
internal mode are conserved and the amplitude factorizes into one
single-internal-mode amplitude per ``alpha``; :func:`lift_and_apply` uses
that factorization unless asked not to.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from bargmann import kernels
from bargmann.fock import (PRUNE_TOL, MixedState, PureState, as_mixed, enumerate_sector,
                           sector_array)

UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    """Unitary ``M x M`` matrix acting on system indices."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"mode unitary must be square, got shape {m.shape}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0)
        if err > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {err:.2e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def dagger(self):
        return ModeUnitary(self.matrix.conj().T)

    def __matmul__(self, other):
        return ModeUnitary(self.matrix @ as_unitary(other).matrix)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def as_unitary(u):
    return u if isinstance(u, ModeUnitary) else ModeUnitary(np.asarray(u))


def fourier_matrix(num_systems):
    """``F[k, j] = omega^(j k) / sqrt(M)`` with ``omega = exp(2 pi i / M)``."""
    jk = np.outer(np.arange(num_systems), np.arange(num_systems))
    return ModeUnitary(np.exp(2j * np.pi * jk / num_systems) / math.sqrt(num_systems))


def diagonal_phases(num_systems):
    """``diag(omega^0, ..., omega^(M-1))``."""
    return ModeUnitary(np.diag(np.exp(2j * np.pi * np.arange(num_systems) / num_systems)))


def cyclic_matrix(num_systems):
    """Cyclic shift sending system ``j`` to ``j - 1 (mod M)``.

    This is the orientation for which ``F D F^dag`` equals the shift and
    ``tr(C rho_1 (x) ... (x) rho_M) = tr(rho_1 rho_2 ... rho_M)``.
    """
    m = np.zeros((num_systems, num_systems), dtype=np.complex128)
    for j in range(num_systems):
        m[(j - 1) % num_systems, j] = 1.0
    return ModeUnitary(m)


def beamsplitter_matrix(theta, phi=0.0):
    """``[[cos t, -e^{-i phi} sin t], [e^{i phi} sin t, cos t]]``."""
    c, s = math.cos(theta), math.sin(theta)
    return ModeUnitary(np.array([[c, -np.exp(-1j * phi) * s],
                                 [np.exp(1j * phi) * s, c]]))


def random_unitary(num_systems, rng=None):
    """Haar-random mode unitary."""
    rng = np.random.default_rng(rng)
    if num_systems == 1:
        return ModeUnitary(np.exp(2j * np.pi * rng.random((1, 1))))
    return ModeUnitary(unitary_group.rvs(num_systems, random_state=rng))


def permanent(a):
    """Permanent by Ryser's formula, O(2^n n); ``per`` of the empty matrix is 1."""
    return kernels.permanent(a)


class _Lifter:
    """Applies ``phi(U (x) I_d)`` to pure states, caching per-input columns."""

    def __init__(self, unitary, factorize=True):
        self.unitary = as_unitary(unitary)
        self.factorize = factorize
        self._columns = {}
        self._flat = {}

    def _column(self, u, t):
        cache = self._columns if u is self.unitary.matrix else self._flat
        col = cache.get(t)
        if col is None:
            outputs = sector_array(sum(t), len(t))
            amps = kernels.fock_amplitudes(u, np.asarray(t, dtype=np.int64), outputs)
            keep = np.abs(amps) >= PRUNE_TOL
            col = [(tuple(int(v) for v in row), complex(a))
                   for row, a in zip(outputs[keep], amps[keep])]
            cache[t] = col
        return col

    def apply(self, psi):
        layout = psi.layout
        if layout.num_systems != self.unitary.dimension:
            raise ValueError(
                f"unitary acts on {self.unitary.dimension} systems, state has "
                f"{layout.num_systems}")
        d = layout.num_internal
        out = {}
        if self.factorize or d == 1:
            u = self.unitary.matrix
            for key, amp in psi.amplitudes.items():
                parts = [self._column(u, key[a::d]) for a in range(d)]
                if d == 1:
                    for row, c in parts[0]:
                        out[row] = out.get(row, 0j) + amp * c
                    continue
                for combo in itertools.product(*parts):
                    c = amp
                    for _, ca in combo:
                        c *= ca
                    row = tuple(itertools.chain.from_iterable(zip(*(r for r, _ in combo))))
                    out[row] = out.get(row, 0j) + c
        else:
            v = np.kron(self.unitary.matrix, np.eye(d))
            for key, amp in psi.amplitudes.items():
                for row, c in self._column(v, key):
                    out[row] = out.get(row, 0j) + amp * c
        return PureState(layout, {k: a for k, a in out.items() if abs(a) >= PRUNE_TOL})


def lift_and_apply(unitary, psi, factorize=True):
    """Evolve a pure state through the interferometer ``unitary``.

    Each input basis vector is mapped independently onto its own
    photon-number sector, so the result never mixes sectors. With
    ``factorize=False`` the amplitudes are computed from the full
    ``(M d) x (M d)`` matrix ``U (x) I_d`` instead of per internal mode.
    """
    return _Lifter(unitary, factorize).apply(psi)


def apply_to_mixture(unitary, rho, factorize=True):
    """Apply ``unitary`` to every component of a mixed state; weights unchanged."""
    rho = as_mixed(rho)
    lifter = _Lifter(unitary, factorize)
    return MixedState(tuple((w, lifter.apply(s)) for w, s in rho.components))


def sector_matrix(unitary, num_internal, total_photons):
    """Dense matrix of ``phi(U (x) I_d)`` on one photon-number sector.

    Built entry by entry from plain permanents of the expanded submatrices;
    meant for cross-checks, not for production evolution. Rows and columns
    follow :func:`~bargmann.fock.enumerate_sector` order.
    """
    u = as_unitary(unitary).matrix
    v = np.kron(u, np.eye(num_internal))
    basis = enumerate_sector(total_photons, v.shape[0])
    index = [np.repeat(np.arange(v.shape[0]), occ) for occ in basis]
    norms = [math.sqrt(math.prod(math.factorial(k) for k in occ)) for occ in basis]
    out = np.empty((len(basis), len(basis)), dtype=np.complex128)
    for r, (rows, nr) in enumerate(zip(index, norms)):
        for c, (cols, nc) in enumerate(zip(index, norms)):
            out[r, c] = permanent(v[np.ix_(rows, cols)]) / (nr * nc)
    return out


def unitary_to_json(unitary):
    """Row-major ``[[ [re, im], ... ], ...]`` nesting."""
    m = as_unitary(unitary).matrix
    return [[[z.real, z.imag] for z in row] for row in m]


def unitary_from_json(data):
    return ModeUnitary(np.array([[complex(re, im) for re, im in row] for row in data]))
