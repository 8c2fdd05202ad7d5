"""Fock-space states over a grid of systems and internal modes.

A layout has ``M`` systems, each carrying ``d`` internal modes. Flat mode
indices follow ``flat(j, alpha) = j * d + alpha`` everywhere in the package.
Occupation vectors are plain tuples of non-negative ints of length ``M * d``.

Pure states are sparse maps from occupation tuples to complex amplitudes and
may mix different total photon numbers. Mixed states are explicit convex
combinations of pure states; no dense density matrix is ever formed.
"""
from __future__ import annotations

import cmath
import functools
import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Union

import numpy as np
from scipy import special

from bargmann.errors import CapacityError, TruncationError

Occupation = tuple  # tuple[int, ...]

#: Amplitudes with modulus below this are dropped after arithmetic.
PRUNE_TOL = 1e-14
NORM_TOL = 1e-10
DEFAULT_SECTOR_CAP = 2_000_000
SECTOR_CAP_ENV = "BARGMANN_SECTOR_CAP"


def sector_cap():
    """Maximum number of basis vectors allowed in one photon-number sector."""
    raw = os.environ.get(SECTOR_CAP_ENV)
    if raw is None:
        return DEFAULT_SECTOR_CAP
    return int(float(raw))


@dataclass(frozen=True)
class ModeLayout:
    num_systems: int
    num_internal: int = 1

    def __post_init__(self):
        if self.num_systems < 1 or self.num_internal < 1:
            raise ValueError(
                f"layout needs positive sizes, got M={self.num_systems}, d={self.num_internal}")

    @property
    def num_modes(self):
        return self.num_systems * self.num_internal

    def flat(self, system, internal):
        if not (0 <= system < self.num_systems and 0 <= internal < self.num_internal):
            raise IndexError(f"mode ({system}, {internal}) outside {self}")
        return system * self.num_internal + internal

    def unflat(self, index):
        if not 0 <= index < self.num_modes:
            raise IndexError(f"flat index {index} outside {self}")
        return divmod(index, self.num_internal)

    def check(self, occupation):
        if len(occupation) != self.num_modes:
            raise ValueError(
                f"occupation {tuple(occupation)} has length {len(occupation)}, "
                f"layout expects {self.num_modes}")
        if any(n < 0 for n in occupation):
            raise ValueError(f"negative occupation in {tuple(occupation)}")


def sector_size(total_photons, num_modes):
    """Number of occupation vectors with ``total_photons`` spread on ``num_modes``."""
    return math.comb(total_photons + num_modes - 1, total_photons)


def enumerate_sector(total_photons, num_modes, cap=None):
    """All weak compositions of ``total_photons`` into ``num_modes`` parts.

    Vectors come in descending lexicographic order, e.g. ``(2, 0), (1, 1),
    (0, 2)`` for two photons on two modes.

    Raises
    ------
    CapacityError
        If the sector holds more than ``cap`` vectors (default from
        :func:`sector_cap`).
    """
    if num_modes < 1:
        raise ValueError("num_modes must be >= 1")
    if total_photons < 0:
        raise ValueError("total_photons must be >= 0")
    _check_capacity(total_photons, num_modes, cap)
    return list(_compositions(total_photons, num_modes))


def _check_capacity(total_photons, num_modes, cap=None):
    cap = sector_cap() if cap is None else cap
    size = sector_size(total_photons, num_modes)
    if size > cap:
        raise CapacityError(
            f"sector of {total_photons} photons on {num_modes} modes has {size} "
            f"vectors, above the cap of {cap} (set {SECTOR_CAP_ENV} to raise it)")


@functools.lru_cache(maxsize=256)
def _compositions(n, m):
    if m == 1:
        return ((n,),)
    out = []
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, m - 1):
            out.append((first,) + rest)
    return tuple(out)


def sector_array(total_photons, num_modes):
    """``enumerate_sector`` as a read-only ``int64`` array of shape (size, modes)."""
    _check_capacity(total_photons, num_modes)
    return _sector_array(total_photons, num_modes)


@functools.lru_cache(maxsize=256)
def _sector_array(total_photons, num_modes):
    arr = np.array(enumerate_sector(total_photons, num_modes), dtype=np.int64)
    arr = arr.reshape(-1, num_modes)
    arr.setflags(write=False)
    return arr


def _prune(amplitudes):
    return {k: complex(v) for k, v in amplitudes.items() if abs(v) >= PRUNE_TOL}


@dataclass(frozen=True)
class PureState:
    """Sparse state vector ``{occupation tuple: amplitude}`` on a layout.

    Absent keys have amplitude zero. The constructor does not normalize; use
    :meth:`from_amplitudes` or :meth:`normalized` for that.
    """

    layout: ModeLayout
    amplitudes: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for key in self.amplitudes:
            self.layout.check(key)

    @classmethod
    def from_amplitudes(cls, layout, amplitudes, normalize=True):
        amps = {}
        for key, value in dict(amplitudes).items():
            key = tuple(int(n) for n in key)
            amps[key] = amps.get(key, 0j) + complex(value)
        state = cls(layout, _prune(amps))
        return state.normalized() if normalize else state

    def norm(self):
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self):
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.layout, {k: a / nrm for k, a in self.amplitudes.items()})

    def photon_numbers(self):
        return sorted({sum(k) for k in self.amplitudes})

    @property
    def max_photons(self):
        return max((sum(k) for k in self.amplitudes), default=0)

    def amplitude(self, occupation):
        return self.amplitudes.get(tuple(occupation), 0j)

    def __len__(self):
        return len(self.amplitudes)


@dataclass(frozen=True)
class MixedState:
    """Convex mixture ``sum_i w_i |psi_i><psi_i|`` of pure states on one layout."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValueError("a mixed state needs at least one component")
        object.__setattr__(self, "components", comps)
        layout = comps[0][1].layout
        for w, s in comps:
            if not 0.0 < w <= 1.0 + NORM_TOL:
                raise ValueError(f"mixture weight {w} outside (0, 1]")
            if s.layout != layout:
                raise ValueError("mixture components live on different layouts")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"mixture weights sum to {total}, not 1")

    @classmethod
    def pure(cls, state):
        return cls(((1.0, state),))

    @classmethod
    def mixture(cls, weights, states):
        return cls(tuple(zip(weights, states)))

    @property
    def layout(self):
        return self.components[0][1].layout

    @property
    def is_pure(self):
        return len(self.components) == 1

    @property
    def max_photons(self):
        return max(s.max_photons for _, s in self.components)

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)


State = Union[PureState, MixedState]


def as_mixed(state):
    if isinstance(state, MixedState):
        return state
    if isinstance(state, PureState):
        return MixedState.pure(state)
    raise TypeError(f"expected PureState or MixedState, got {type(state).__name__}")


def inner_product(a, b):
    """``<a|b>``, antilinear in the first argument."""
    if a.layout != b.layout:
        raise ValueError(f"layout mismatch: {a.layout} vs {b.layout}")
    small, large = (a.amplitudes, b.amplitudes)
    if len(small) <= len(large):
        return sum((small[k].conjugate() * large[k] for k in small if k in large), 0j)
    return sum((small[k].conjugate() * large[k] for k in large if k in small), 0j)


def tensor_product(states):
    """Product state ``rho_1 (x) ... (x) rho_M`` of single-system states.

    Each factor must live on a one-system layout with the same internal
    dimension; occupation vectors are concatenated in system order.
    """
    states = [as_mixed(s) for s in states]
    if not states:
        raise ValueError("tensor_product needs at least one state")
    d = states[0].layout.num_internal
    for s in states:
        if s.layout.num_systems != 1:
            raise ValueError("tensor_product expects single-system factors")
        if s.layout.num_internal != d:
            raise ValueError(
                f"internal dimensions differ: {d} vs {s.layout.num_internal}")
    layout = ModeLayout(len(states), d)
    components = []
    for combo in itertools.product(*(s.components for s in states)):
        weight = math.prod(w for w, _ in combo)
        components.append((weight, _pure_product(layout, [p for _, p in combo])))
    return MixedState(tuple(components))


def _pure_product(layout, pures):
    amps = {(): 1.0 + 0j}
    for p in pures:
        amps = {k + q: a * b for k, a in amps.items() for q, b in p.amplitudes.items()}
    return PureState(layout, _prune(amps))


# -- state families ---------------------------------------------------------

def vacuum(num_internal=1, num_systems=1):
    layout = ModeLayout(num_systems, num_internal)
    return PureState(layout, {(0,) * layout.num_modes: 1.0 + 0j})


def fock_state(occupation, num_internal=None):
    """Single Fock basis state; single-system layout unless ``num_internal`` splits it."""
    occupation = tuple(int(n) for n in occupation)
    d = len(occupation) if num_internal is None else num_internal
    if len(occupation) % d:
        raise ValueError("occupation length must be a multiple of num_internal")
    layout = ModeLayout(len(occupation) // d, d)
    return PureState(layout, {occupation: 1.0 + 0j})


def single_photon_state(internal_amplitudes):
    """One photon in a superposition of internal modes, ``sum_a c_a a_a^dag |0>``."""
    c = np.asarray(internal_amplitudes, dtype=complex).ravel()
    if c.size == 0 or not np.any(np.abs(c) > 0):
        raise ValueError("single-photon amplitude vector must be non-zero")
    d = c.size
    amps = {tuple(int(i == a) for i in range(d)): c[a] for a in range(d)}
    return PureState.from_amplitudes(ModeLayout(1, d), amps)


def dual_rail_qubit(theta, phi=0.0):
    """``cos(theta/2)|1,0> + e^{i phi} sin(theta/2)|0,1>`` on two rails."""
    amps = {(1, 0): math.cos(theta / 2), (0, 1): cmath.exp(1j * phi) * math.sin(theta / 2)}
    return PureState.from_amplitudes(ModeLayout(1, 2), amps)


class Truncated(NamedTuple):
    """A renormalized truncated state and the probability mass it dropped."""

    state: PureState
    tail_mass: float


def coherent_tail_mass(beta, cutoff):
    """Probability that a coherent state with amplitudes ``beta`` has > cutoff photons."""
    mean = float(np.sum(np.abs(np.asarray(beta, dtype=complex)) ** 2))
    if mean == 0.0:
        return 0.0
    return float(special.gammainc(cutoff + 1, mean))


def _cutoff_for_tail(tail_fn, max_tail, start=0, limit=2000):
    for c in range(start, limit):
        if tail_fn(c) <= max_tail:
            return c
    return None


def truncated_coherent_state(beta, cutoff, max_tail=None):
    """Multimode coherent state kept up to ``cutoff`` total photons.

    Amplitudes are ``exp(-|beta|^2/2) prod_a beta_a^n_a / sqrt(n_a!)``, then
    renormalized. Returns a :class:`Truncated` pair.

    Raises
    ------
    TruncationError
        If ``max_tail`` is given and the discarded mass exceeds it.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=complex))
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    tail = coherent_tail_mass(beta, cutoff)
    if max_tail is not None and tail > max_tail:
        suggested = _cutoff_for_tail(lambda c: coherent_tail_mass(beta, c), max_tail, cutoff)
        raise TruncationError(
            f"coherent state truncated at {cutoff} photons drops mass {tail:.3e} > "
            f"{max_tail:.1e}; try cutoff={suggested}",
            tail_mass=tail, suggested_cutoff=suggested)
    d = beta.size
    pref = math.exp(-float(np.sum(np.abs(beta) ** 2)) / 2)
    amps = {}
    for n in range(cutoff + 1):
        for occ in _compositions(n, d):
            amp = pref
            for b, k in zip(beta, occ):
                amp = amp * b ** k / math.sqrt(math.factorial(k))
            amps[occ] = amp
    layout = ModeLayout(1, d)
    return Truncated(PureState.from_amplitudes(layout, amps), tail)


def _displacement_element(alpha, m, n):
    """Single-mode matrix element ``<m|D(alpha)|n>``."""
    x = abs(alpha) ** 2
    if alpha == 0:
        return 1.0 + 0j if m == n else 0j
    if m >= n:
        lg = 0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1))
        return (math.exp(lg - x / 2) * alpha ** (m - n)
                * special.eval_genlaguerre(n, m - n, x))
    lg = 0.5 * (math.lgamma(m + 1) - math.lgamma(n + 1))
    return (math.exp(lg - x / 2) * (-alpha.conjugate()) ** (n - m)
            * special.eval_genlaguerre(m, n - m, x))


def displaced_fock_state(alpha, occupation, cutoff):
    """``D(alpha)|n>`` projected onto at most ``cutoff`` photons and renormalized.

    ``alpha`` and ``occupation`` are per internal mode. The returned
    ``tail_mass`` is ``1 - ||P_cutoff D(alpha)|n>||^2``; a zero projection is
    reported with ``state=None`` and tail mass 1.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    occupation = tuple(int(k) for k in occupation)
    if len(occupation) != alpha.size:
        raise ValueError("alpha and occupation must have the same length")
    d = alpha.size
    amps = {}
    for total in range(cutoff + 1):
        for occ in _compositions(total, d):
            amp = 1.0 + 0j
            for a, m, n in zip(alpha, occ, occupation):
                amp *= _displacement_element(complex(a), m, n)
                if amp == 0:
                    break
            if abs(amp) >= PRUNE_TOL:
                amps[occ] = amp
    kept = sum(abs(a) ** 2 for a in amps.values())
    tail = max(0.0, 1.0 - kept)
    if kept == 0.0:
        return Truncated(None, 1.0)
    return Truncated(PureState.from_amplitudes(ModeLayout(1, d), amps), tail)


def random_pure_state(num_internal, photons, rng=None):
    """Haar-like random state on a single system.

    ``photons`` is one photon number or a collection of them; in the latter
    case the state superposes all listed sectors.
    """
    rng = np.random.default_rng(rng)
    numbers = [photons] if isinstance(photons, (int, np.integer)) else list(photons)
    keys = [occ for n in numbers for occ in _compositions(int(n), num_internal)]
    vals = rng.normal(size=len(keys)) + 1j * rng.normal(size=len(keys))
    return PureState.from_amplitudes(ModeLayout(1, num_internal), dict(zip(keys, vals)))


# -- serialization ----------------------------------------------------------

def state_to_dict(state):
    """JSON-ready dict: pure ``{layout, amplitudes}`` or mixed ``{components}``."""
    if isinstance(state, MixedState):
        return {"components": [{"weight": w, "state": state_to_dict(s)}
                               for w, s in state.components]}
    return {
        "layout": {"M": state.layout.num_systems, "d": state.layout.num_internal},
        "amplitudes": [{"occupations": list(k), "re": a.real, "im": a.imag}
                       for k, a in state.amplitudes.items()],
    }


def state_from_dict(data):
    """Inverse of :func:`state_to_dict`; pure states are not renormalized."""
    if "components" in data:
        return MixedState(tuple((float(c["weight"]), state_from_dict(c["state"]))
                                for c in data["components"]))
    layout = ModeLayout(int(data["layout"]["M"]), int(data["layout"]["d"]))
    amps = {tuple(int(n) for n in e["occupations"]): complex(e["re"], e.get("im", 0.0))
            for e in data["amplitudes"]}
    state = PureState(layout, amps)
    if abs(state.norm() - 1.0) > 1e-8:
        raise ValueError(f"serialized pure state has norm {state.norm()}")
    return state
