"""Multivariate trace estimation by Fourier interferometry and photon counting.

Pipeline for states ``rho_1 .. rho_M`` (each on one system with ``d``
internal modes):

1. ``Omega = rho_1 (x) ... (x) rho_M``
2. ``Omega_out = F^dag Omega F`` (inverse Fourier interferometer)
3. count photons per system, ignoring internal modes: pattern ``S``
4. bin each pattern by ``f(S) = sum_j j S_j mod M`` into ``P_j``
5. ``X_k = sum_j omega^(j k) P_j``; the multivariate trace is ``X_1``.

Exact mode uses the full pattern distribution; sampled mode draws ``N``
patterns from it and uses raw frequencies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bargmann.fock import as_mixed, tensor_product
from bargmann.interferometer import apply_to_mixture, fourier_matrix

EXACT = "exact"


def sample_count(epsilon, delta_fail):
    """Hoeffding sample size ``ceil(ln(2/delta) / (2 eps^2))``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta_fail < 1:
        raise ValueError("delta_fail must lie in (0, 1)")
    return math.ceil(math.log(2.0 / delta_fail) / (2.0 * epsilon ** 2))


def hoeffding_epsilon(shots, delta_fail):
    """Precision guaranteed by ``shots`` samples at failure probability ``delta_fail``."""
    return math.sqrt(math.log(2.0 / delta_fail) / (2.0 * shots))


def derive_seed(seed, *path):
    """Independent child seed for a labelled sub-stream."""
    ss = np.random.SeedSequence([int(seed), *(int(p) for p in path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class Sampled:
    """Sampled-mode settings: ``shots`` draws from a Philox stream keyed by ``seed``.

    ``epsilon`` defaults to the Hoeffding precision of ``shots`` at
    ``delta_fail``.
    """

    shots: int
    seed: int = 0
    delta_fail: float = 0.05
    epsilon: float = field(default=None)

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", hoeffding_epsilon(self.shots, self.delta_fail))

    @classmethod
    def with_precision(cls, epsilon, delta_fail=0.05, seed=0):
        return cls(sample_count(epsilon, delta_fail), seed, delta_fail, epsilon)

    def child(self, *path):
        return Sampled(self.shots, derive_seed(self.seed, *path), self.delta_fail, self.epsilon)


def is_exact(mode):
    if mode is None or mode == EXACT:
        return True
    if isinstance(mode, Sampled):
        return False
    raise ValueError(f"mode must be 'exact' or a Sampled instance, got {mode!r}")


def bin_function(pattern, num_systems=None):
    """``f(S) = sum_j j S_j (mod M)``."""
    m = len(pattern) if num_systems is None else num_systems
    return sum(j * s for j, s in enumerate(pattern)) % m


def aggregate_counts(occupation, layout):
    """Per-system photon counts ``S_j = sum_alpha n_{j,alpha}``."""
    d = layout.num_internal
    if len(occupation) != layout.num_modes:
        raise ValueError("occupation does not match layout")
    return tuple(sum(occupation[j * d:(j + 1) * d]) for j in range(layout.num_systems))


def exact_pattern_distribution(omega_out):
    """Distribution of count patterns ``S`` for a (mixed) output state.

    Returns a dict ``{pattern: probability}`` with keys in sorted order.
    """
    omega_out = as_mixed(omega_out)
    layout = omega_out.layout
    dist = {}
    for weight, psi in omega_out.components:
        for key, amp in psi.amplitudes.items():
            s = aggregate_counts(key, layout)
            dist[s] = dist.get(s, 0.0) + weight * (amp.real ** 2 + amp.imag ** 2)
    return {s: dist[s] for s in sorted(dist)}


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=int(seed)))


def _sample_indices(probs, shots, seed):
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    draws = _rng(seed).random(shots)
    return np.minimum(np.searchsorted(cdf, draws, side="right"), len(cdf) - 1)


def sample_patterns(dist, shots, seed):
    """``shots`` i.i.d. draws from a pattern distribution, reproducible from ``seed``.

    Draw ``i`` uses the ``i``-th uniform of a Philox counter stream keyed by
    ``seed``, so any slice of the sequence can be regenerated independently.
    """
    patterns = list(dist)
    probs = np.array([dist[p] for p in patterns], dtype=float)
    return [patterns[i] for i in _sample_indices(probs, shots, seed)]


def exact_binned(dist, num_systems):
    p = np.zeros(num_systems)
    for s, prob in dist.items():
        p[bin_function(s, num_systems)] += prob
    return p


def estimate_binned(samples, num_systems):
    """Raw bin frequencies of sampled patterns."""
    counts = np.zeros(num_systems)
    for s in samples:
        counts[bin_function(s, num_systems)] += 1
    return counts / max(len(samples), 1)


def recover_X(binned):
    """Inverse DFT ``X_k = sum_j omega^(j k) P_j``."""
    p = np.asarray(binned, dtype=complex)
    return p.size * np.fft.ifft(p)


def forward_P(x_values):
    """``P_j = (1/M) sum_k omega^(-j k) X_k``."""
    x = np.asarray(x_values, dtype=complex)
    return np.fft.fft(x) / x.size


@dataclass(frozen=True, eq=False)
class InvariantEstimate:
    """Binned probabilities, cyclic expectations and the trace estimate ``delta = X_1``."""

    P: np.ndarray
    X: np.ndarray
    num_internal: int
    mode: str = EXACT
    sample_count: int = None
    seed: int = None
    epsilon: float = None
    delta_fail: float = None
    stderr: np.ndarray = None
    X_stderr: np.ndarray = None

    @property
    def num_systems(self):
        return len(self.P)

    @property
    def delta(self):
        return complex(self.X[1])

    @property
    def confidence(self):
        return None if self.delta_fail is None else 1.0 - self.delta_fail

    def to_dict(self):
        def floats(a):
            return None if a is None else [float(v) for v in a]
        return {
            "M": self.num_systems,
            "d": self.num_internal,
            "mode": self.mode,
            "N": self.sample_count,
            "seed": self.seed,
            "P": floats(self.P),
            "X": [[float(z.real), float(z.imag)] for z in self.X],
            "delta": [self.delta.real, self.delta.imag],
            "epsilon": self.epsilon,
            "delta_fail": self.delta_fail,
            "stderr": floats(self.stderr),
            "X_stderr": floats(self.X_stderr),
        }


def output_state(states, fourier="inverse"):
    """``F^dag Omega F`` for the product of ``states``; ``fourier="forward"`` uses ``F``."""
    omega = tensor_product(states)
    f = fourier_matrix(omega.layout.num_systems)
    if fourier == "inverse":
        u = f.dagger()
    elif fourier == "forward":
        u = f
    else:
        raise ValueError("fourier must be 'inverse' or 'forward'")
    return apply_to_mixture(u, omega)


def estimate_from_distribution(dist, num_systems, num_internal, mode=EXACT):
    """Bin (or sample and bin) a pattern distribution and recover ``X``."""
    if is_exact(mode):
        p = exact_binned(dist, num_systems)
        return InvariantEstimate(p, recover_X(p), num_internal)
    patterns = list(dist)
    probs = np.array([dist[s] for s in patterns], dtype=float)
    bins = np.array([bin_function(s, num_systems) for s in patterns], dtype=np.int64)
    idx = _sample_indices(probs, mode.shots, mode.seed)
    p = np.bincount(bins[idx], minlength=num_systems) / mode.shots
    x = recover_X(p)
    return InvariantEstimate(
        p, x, num_internal, mode="sampled", sample_count=mode.shots, seed=mode.seed,
        epsilon=mode.epsilon, delta_fail=mode.delta_fail,
        stderr=np.sqrt(p * (1.0 - p) / mode.shots),
        X_stderr=np.sqrt(np.maximum(0.0, 1.0 - np.abs(x) ** 2) / mode.shots))


def estimate_multivariate_trace(states, mode=EXACT, fourier="inverse"):
    """Estimate ``tr(rho_1 rho_2 ... rho_M)`` with the interferometric protocol.

    Parameters
    ----------
    states : sequence of PureState or MixedState
        Single-system states sharing the internal dimension ``d``.
    mode : ``"exact"`` or :class:`Sampled`
        Exact pattern probabilities, or frequencies from sampled patterns.
    fourier : {"inverse", "forward"}
        Interferometer before detection. The forward transform yields the
        complex conjugate trace.

    Returns
    -------
    InvariantEstimate
    """
    states = [as_mixed(s) for s in states]
    if len(states) < 2:
        raise ValueError("the protocol needs at least two states (M >= 2)")
    is_exact(mode)
    out = output_state(states, fourier)
    dist = exact_pattern_distribution(out)
    return estimate_from_distribution(dist, len(states), out.layout.num_internal, mode)
