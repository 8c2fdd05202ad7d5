"""Brute-force ground truth that never touches interferometers or permanents.

Multivariate traces come from Gram chains ``<phi_1|phi_2><phi_2|phi_3>...
<phi_M|phi_1>`` summed over mixture components; cyclic expectations come
from permuting system blocks of occupation vectors.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from bargmann.errors import ConsistencyError
from bargmann.fock import as_mixed, inner_product

REAL_TOL = 1e-10


def gram_chain(pures):
    """``prod_i <phi_i|phi_{i+1 mod M}>``."""
    m = len(pures)
    return math.prod((inner_product(pures[i], pures[(i + 1) % m]) for i in range(m)), start=1 + 0j)


def direct_multivariate_trace(states):
    """``tr(rho_1 ... rho_M)`` summed over every tuple of mixture components."""
    states = [as_mixed(s) for s in states]
    if not states:
        raise ValueError("need at least one state")
    d = states[0].layout.num_internal
    for s in states:
        if s.layout.num_systems != 1 or s.layout.num_internal != d:
            raise ValueError("states must be single-system with equal internal dimension")
    total = 0j
    for combo in itertools.product(*(s.components for s in states)):
        weight = math.prod(w for w, _ in combo)
        total += weight * gram_chain([p for _, p in combo])
    return total


def shift_systems(occupation, k, layout):
    """Occupation after ``C^k``, where ``C`` moves system ``j`` to ``j - 1``."""
    d, m = layout.num_internal, layout.num_systems
    blocks = [occupation[j * d:(j + 1) * d] for j in range(m)]
    return tuple(itertools.chain.from_iterable(blocks[(j + k) % m] for j in range(m)))


def cyclic_expectation(omega, k):
    """``X_k = tr(C^k Omega)`` by permuting system blocks."""
    omega = as_mixed(omega)
    layout = omega.layout
    k %= layout.num_systems
    total = 0j
    for weight, psi in omega.components:
        amps = psi.amplitudes
        acc = 0j
        for key, amp in amps.items():
            # (C^k psi)(key) = psi(C^-k key)
            other = amps.get(shift_systems(key, -k, layout))
            if other is not None:
                acc += amp.conjugate() * other
        total += weight * acc
    return total


def cyclic_expectations(omega):
    m = as_mixed(omega).layout.num_systems
    return np.array([cyclic_expectation(omega, k) for k in range(m)])


def symmetric_projection_weight(omega):
    """``tr(Pi_C Omega)`` with ``Pi_C = (1/M) sum_k C^k``; real and in [0, 1].

    Raises
    ------
    ConsistencyError
        If the computed value has an imaginary part above ``1e-10``.
    """
    x = cyclic_expectations(omega)
    value = complex(x.mean())
    if abs(value.imag) > REAL_TOL:
        raise ConsistencyError(f"cyclic projection weight has imaginary part {value.imag:.3e}")
    return value.real


@dataclass(frozen=True)
class SymmetryReport:
    is_symmetric: bool
    P0: float
    worst_Xk_deviation: float

    def to_dict(self):
        return {"is_symmetric": self.is_symmetric, "P0": self.P0,
                "worst_Xk_deviation": self.worst_Xk_deviation}


def certify_cyclic_symmetry(omega, tol=1e-10):
    """Check ``C Omega = Omega`` through ``P_0 = 1``."""
    x = cyclic_expectations(omega)
    p0 = symmetric_projection_weight(omega)
    return SymmetryReport(bool(abs(p0 - 1.0) <= tol), p0, float(np.max(np.abs(x - 1.0))))
