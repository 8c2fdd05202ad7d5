"""Applications built on the multivariate trace estimator.

Everything here calls :func:`~bargmann.protocol.estimate_multivariate_trace`;
no function re-implements interference.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from bargmann.errors import SeriesError, TruncationError, UndefinedEntropyError
from bargmann.fock import (_compositions, as_mixed, coherent_tail_mass, displaced_fock_state,
                           truncated_coherent_state)
from bargmann.oracle import direct_multivariate_trace
from bargmann.protocol import EXACT, estimate_multivariate_trace, is_exact

DEFAULT_MAX_TAIL = 1e-7


# -- overlaps and entropies -------------------------------------------------

def hom_overlap(rho1, rho2, mode=EXACT):
    """Overlap ``tr(rho1 rho2)`` from the two-system test, as ``2 P_0 - 1``.

    In sampled mode the estimate is clipped to ``[-2 eps, 1 + 2 eps]`` where
    ``eps`` is the Hoeffding precision of the run.
    """
    est = estimate_multivariate_trace([rho1, rho2], mode)
    value = 2.0 * float(est.P[0]) - 1.0
    if not is_exact(mode):
        value = min(max(value, -2.0 * mode.epsilon), 1.0 + 2.0 * mode.epsilon)
    return value


def power_trace(rho, power, mode=EXACT):
    """``tr(rho^power)`` from ``power`` copies of ``rho``; ``power=1`` returns 1."""
    if power < 1:
        raise ValueError("power must be >= 1")
    if power == 1:
        return 1.0
    return estimate_multivariate_trace([rho] * power, mode).delta.real


def renyi_entropy(rho, alpha, mode=EXACT):
    """Renyi entropy ``ln(tr rho^alpha) / (1 - alpha)`` for integer ``alpha >= 2``."""
    if int(alpha) != alpha or alpha < 2:
        raise ValueError("alpha must be an integer >= 2")
    alpha = int(alpha)
    t = power_trace(rho, alpha, mode)
    if t <= 0.0:
        raise UndefinedEntropyError(
            f"estimated tr(rho^{alpha}) = {t:.3e} is not positive; increase the sample count")
    return math.log(t) / (1 - alpha)


# -- spectrum ---------------------------------------------------------------

def faddeev_leverrier(power_traces):
    """Characteristic polynomial ``[1, c_1, ..., c_n]`` from ``t_k = tr rho^k``.

    Newton's identities: ``c_k = -(1/k) sum_{i=1..k} c_{k-i} t_i``.
    """
    t = [float(v) for v in power_traces]
    coeffs = [1.0]
    for k in range(1, len(t) + 1):
        coeffs.append(-sum(coeffs[k - i] * t[i - 1] for i in range(1, k + 1)) / k)
    return coeffs


@dataclass
class SpectrumReport:
    power_traces: list
    char_poly_coeffs: list
    eigenvalues: np.ndarray
    largest_eigenvalue: float
    out_of_range: list = field(default_factory=list)

    def to_dict(self):
        return {
            "power_traces": list(map(float, self.power_traces)),
            "char_poly_coeffs": list(map(float, self.char_poly_coeffs)),
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "largest_eigenvalue": float(self.largest_eigenvalue),
            "out_of_range": [[float(z.real), float(z.imag)] for z in self.out_of_range],
        }


def spectrum_from_traces(rho, rank_bound, mode=EXACT, range_tol=1e-6, rank_tol=1e-12):
    """Eigenvalues of ``rho`` from ``tr rho^k``, ``k = 2..rank_bound``.

    Trailing characteristic coefficients below ``rank_tol`` are treated as
    exact zero roots, which keeps multiple zero eigenvalues from being
    smeared by the root finder. Roots outside ``[-range_tol, 1 + range_tol]``
    or with imaginary part above ``range_tol`` are listed in ``out_of_range``;
    nothing is clipped.
    """
    if rank_bound < 2:
        raise ValueError("rank_bound must be >= 2")
    sampled = not is_exact(mode)
    traces = [1.0] + [power_trace(rho, k, mode.child(k) if sampled else mode)
                      for k in range(2, rank_bound + 1)]
    coeffs = faddeev_leverrier(traces)
    core = list(coeffs)
    zeros = 0
    while len(core) > 1 and abs(core[-1]) < rank_tol:
        core.pop()
        zeros += 1
    roots = np.roots(core) if len(core) > 1 else np.array([], dtype=complex)
    if not np.all(np.isfinite(roots)):
        raise ArithmeticError("characteristic polynomial root finding failed")
    eig = np.concatenate([np.asarray(roots, dtype=complex), np.zeros(zeros, dtype=complex)])
    eig = eig[np.argsort(-eig.real, kind="stable")]
    bad = [z for z in eig
           if z.real < -range_tol or z.real > 1 + range_tol or abs(z.imag) > range_tol]
    return SpectrumReport(traces, coeffs, eig, float(eig.real.max()), bad)


# -- kernels ----------------------------------------------------------------

def pair_mode(mode, i, j):
    """Mode for kernel entry ``(i, j)``: an independent seeded stream per pair."""
    if is_exact(mode):
        return mode
    i, j = min(i, j), max(i, j)
    return mode.child(i, j)


def kernel_matrix(encoded_states, mode=EXACT):
    """Gram-type kernel ``K_ij = tr(rho_i rho_j)`` (``|<phi_i|phi_j>|^2`` for pure states).

    Each unordered pair is estimated once; the diagonal is always computed
    in exact mode.
    """
    states = [as_mixed(s) for s in encoded_states]
    if len(states) < 2:
        raise ValueError("kernel_matrix needs at least two states")
    n = len(states)
    k = np.empty((n, n))
    for i in range(n):
        k[i, i] = hom_overlap(states[i], states[i], EXACT)
        for j in range(i + 1, n):
            k[i, j] = k[j, i] = hom_overlap(states[i], states[j], pair_mode(mode, i, j))
    return k


def kernel_csv(matrix, ids=None):
    """CSV text with state ids as row and column headers."""
    matrix = np.asarray(matrix)
    ids = [str(i) for i in range(len(matrix))] if ids is None else [str(i) for i in ids]
    buf = io.StringIO()
    buf.write("," + ",".join(ids) + "\n")
    for name, row in zip(ids, matrix):
        buf.write(name + "," + ",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def classifier_eval(kernel_row, coeffs, labels, bias):
    """``sign(sum_i a_i y_i K(x_i, x) + b)`` with ``sign(0) = +1``."""
    kernel_row, coeffs, labels = (np.asarray(v, dtype=float)
                                  for v in (kernel_row, coeffs, labels))
    if not kernel_row.shape == coeffs.shape == labels.shape:
        raise ValueError("kernel_row, coeffs and labels must have equal lengths")
    score = float(np.sum(coeffs * labels * kernel_row) + bias)
    return 1 if score >= 0 else -1


# -- quasiprobabilities -----------------------------------------------------

def _phase_point(rho, alpha):
    a = np.atleast_1d(np.asarray(alpha, dtype=complex))
    d = rho.layout.num_internal
    if a.size != d:
        raise ValueError(f"phase-space point has {a.size} components, state has d={d}")
    return a


def _projection_cutoff(rho, cutoff):
    # Overlaps with rho only see rho's photon support, so projecting the probe
    # state onto <= max_photons(rho) photons and rescaling is exact.
    support = rho.max_photons
    if cutoff is None:
        return support
    if cutoff < support:
        raise TruncationError(
            f"cutoff {cutoff} is below the state's photon support {support}",
            suggested_cutoff=support)
    return cutoff


def husimi_q(rho, alpha, cutoff=None, mode=EXACT):
    """``Q(alpha) = <alpha|rho|alpha> / pi`` from one overlap measurement.

    The coherent probe is truncated at ``cutoff`` photons (default: the
    largest photon number in ``rho``) and renormalized; the overlap is
    rescaled by the kept mass ``1 - tail``.
    """
    rho = as_mixed(rho)
    a = _phase_point(rho, alpha)
    cutoff = _projection_cutoff(rho, cutoff)
    probe, tail = truncated_coherent_state(a, cutoff)
    return (1.0 - tail) * hom_overlap(rho, probe, mode) / math.pi


def _wigner_series(rho, a, cutoff, n_max, tol, max_levels, overlap):
    d = a.size
    last = n_max if n_max is not None else max_levels
    total = 0.0
    captured = 0.0
    remainder = 1.0
    level = 0
    while level <= last:
        sign = -1.0 if level & 1 else 1.0
        for idx, occ in enumerate(_compositions(level, d)):
            probe, tail = displaced_fock_state(a, occ, cutoff)
            if probe is None:
                continue
            kept = 1.0 - tail
            captured += kept * direct_multivariate_trace([rho, probe]).real
            total += sign * kept * overlap(probe, level, idx)
        remainder = max(0.0, 1.0 - captured)
        if n_max is None and remainder <= tol:
            break
        level += 1
    if remainder > tol:
        raise SeriesError(
            f"Wigner series truncated at level {min(level, last)} leaves remainder "
            f"{remainder:.3e} > {tol:.1e}", remainder=remainder)
    return 2.0 / math.pi * total


def wigner_point(rho, alpha, n_max=None, cutoff=None, mode=EXACT, tol=1e-10, max_levels=400):
    """Wigner function ``(2/pi) sum_n (-1)^|n| tr(rho D(alpha)|n><n|D(alpha)^dag)``.

    Each term is an overlap measured with the two-system protocol against a
    displaced Fock state projected onto ``rho``'s photon support. The series
    is summed level by level in ``|n|``; the discarded remainder is exactly
    ``1 - sum of the kept overlaps``, evaluated with the oracle.

    ``n_max=None`` adds levels until the remainder drops below ``tol``.

    Raises
    ------
    SeriesError
        If the remainder after ``n_max`` (or ``max_levels``) exceeds ``tol``.
    """
    rho = as_mixed(rho)
    a = _phase_point(rho, alpha)
    cutoff = _projection_cutoff(rho, cutoff)
    sampled = not is_exact(mode)

    def overlap(probe, level, idx):
        return hom_overlap(rho, probe, mode.child(level, idx) if sampled else mode)

    return _wigner_series(rho, a, cutoff, n_max, tol, max_levels, overlap)


def wigner_reference(rho, alpha, n_max=None, cutoff=None, tol=1e-10, max_levels=400):
    """Same series as :func:`wigner_point` with every overlap taken from the oracle."""
    rho = as_mixed(rho)
    a = _phase_point(rho, alpha)
    cutoff = _projection_cutoff(rho, cutoff)

    def overlap(probe, level, idx):
        return direct_multivariate_trace([rho, probe]).real

    return _wigner_series(rho, a, cutoff, n_max, tol, max_levels, overlap)


def _coherent_cutoff(rho, betas, cutoff, max_tail):
    floor = rho.max_photons
    if cutoff is None:
        cutoff = floor
        while any(coherent_tail_mass(b, cutoff) > max_tail for b in betas):
            cutoff += 1
    return cutoff


def positive_p(rho, alpha, beta, cutoff=None, mode=EXACT, max_tail=DEFAULT_MAX_TAIL):
    """Positive-P value ``<beta|alpha><alpha|rho|beta> / pi^2`` from a third-order trace.

    Both coherent states are truncated at ``cutoff`` photons (default: the
    smallest cutoff with tail mass below ``max_tail``) and renormalized.
    """
    rho = as_mixed(rho)
    a = _phase_point(rho, alpha)
    b = _phase_point(rho, beta)
    cutoff = _coherent_cutoff(rho, (a, b), cutoff, max_tail)
    ket_a, _ = truncated_coherent_state(a, cutoff, max_tail)
    ket_b, _ = truncated_coherent_state(b, cutoff, max_tail)
    return estimate_multivariate_trace([ket_a, rho, ket_b], mode).delta / math.pi ** 2


def kirkwood_dirac(rho, a_state, b_state, mode=EXACT):
    """Kirkwood-Dirac value ``<b|a><a|rho|b>`` as ``tr(|a><a| rho |b><b|)``."""
    rho = as_mixed(rho)
    for s in (a_state, b_state):
        if s.layout != rho.layout:
            raise ValueError("basis states must share the state's layout")
    return estimate_multivariate_trace([a_state, rho, b_state], mode).delta
