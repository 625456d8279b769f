"""Fixed-N antisymmetric states over (site, chirality) modes.

A mode is a pair ``(x, a)``.  An N-particle basis state is the normalized
antisymmetrization of an ordered mode tuple; it is stored under its
canonically sorted tuple, and any other ordering differs by the sign of the
sorting permutation.  Sites live on the integers when ``ring_size`` is
``None`` and are reduced modulo ``ring_size`` otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .core import GradedAmplitude, Letter, WalkParams
from .errors import ConfigurationError, PauliError, ResourceCapError

Mode = tuple[int, int]
ModeTuple = tuple[Mode, ...]
Amplitude = Union[complex, GradedAmplitude]

CHIRALITY_NAMES = ("R", "L")


def normalize_mode(mode: Sequence, ring_size: Optional[int]) -> Mode:
    x, a = mode
    if isinstance(a, str):
        a = CHIRALITY_NAMES.index(a.upper())
    a = int(a)
    if a not in (0, 1):
        raise ValueError(f"chirality must be 0/1 or R/L, got {mode[1]!r}")
    x = int(x)
    if ring_size is not None:
        x %= ring_size
    return (x, a)


def permutation_sign(seq: Sequence) -> int:
    """Sign of the permutation that sorts ``seq`` (elements distinct)."""
    sign = 1
    items = list(seq)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


def canonicalize(modes: Iterable, ring_size: Optional[int] = None) -> tuple[ModeTuple, int]:
    """Sorted mode tuple and the sign relating it to the given ordering.

    Raises
    ------
    PauliError
        If two entries denote the same mode.
    """
    norm = [normalize_mode(m, ring_size) for m in modes]
    if len(set(norm)) != len(norm):
        raise PauliError(f"modes {norm} are not pairwise distinct")
    return tuple(sorted(norm)), permutation_sign(norm)


def step_branches(mode: Mode, params: Optional[WalkParams], ring_size: Optional[int]):
    """Image of one mode under a single free step.

    Yields ``(new_mode, letter, amplitude)``; ``amplitude`` is ``None`` when
    ``params`` is ``None`` (graded use).
    """
    x, a = mode
    shift = 1 if a == 0 else -1
    moved = x + shift
    if ring_size is not None:
        moved %= ring_size
    if params is None:
        yield (moved, a), (Letter.R if a == 0 else Letter.L), None
        yield (x, 1 - a), Letter.F, None
    else:
        yield (moved, a), (Letter.R if a == 0 else Letter.L), params.n
        yield (x, 1 - a), Letter.F, 1j * params.m


def double_occupancy(modes: ModeTuple) -> int:
    """Number of sites hosting both chiralities."""
    sites: dict[int, int] = {}
    for x, a in modes:
        sites[x] = sites.get(x, 0) | (1 << a)
    return sum(1 for v in sites.values() if v == 3)


@dataclass(frozen=True)
class SectorState:
    """Antisymmetric N-particle state with sparse amplitudes.

    ``amplitudes`` maps canonical mode tuples to complex numbers or to
    :class:`GradedAmplitude` values.  Treat instances as immutable.
    """

    N: int
    ring_size: Optional[int]
    amplitudes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.ring_size is not None and self.ring_size < 2:
            raise ConfigurationError("ring needs at least two sites")
        for key in self.amplitudes:
            if len(key) != self.N:
                raise ValueError(f"tuple {key} does not hold {self.N} modes")

    @classmethod
    def basis(cls, modes: Sequence, ring_size: Optional[int] = None,
              graded: bool = False) -> "SectorState":
        """Antisymmetrized basis state for the ordered mode list ``modes``."""
        key, sign = canonicalize(modes, ring_size)
        value = GradedAmplitude.one().scale(sign) if graded else complex(sign)
        return cls(len(key), ring_size, {key: value})

    @classmethod
    def from_items(cls, items: Iterable[tuple[Sequence, complex]], ring_size: Optional[int] = None):
        """Build a state from (ordered modes, amplitude) pairs, summing duplicates."""
        amps: dict = {}
        N = None
        for modes, value in items:
            key, sign = canonicalize(modes, ring_size)
            N = len(key)
            amps[key] = amps.get(key, 0) + sign * value
        return cls(N or 0, ring_size, amps)

    @property
    def is_graded(self) -> bool:
        return any(isinstance(v, GradedAmplitude) for v in self.amplitudes.values())

    def amplitude(self, modes: Sequence) -> Amplitude:
        """Amplitude on the (possibly unsorted) tuple ``modes``."""
        key, sign = canonicalize(modes, self.ring_size)
        value = self.amplitudes.get(key)
        if value is None:
            if self.is_graded:
                any_val = next(iter(self.amplitudes.values()))
                return GradedAmplitude.zero(any_val.total_letters)
            return 0j
        return value.scale(sign) if isinstance(value, GradedAmplitude) else sign * value

    def norm_sq(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.amplitudes.values()))

    def evaluate(self, params: WalkParams) -> "SectorState":
        """Complex state obtained by evaluating every graded amplitude."""
        return SectorState(
            self.N,
            self.ring_size,
            {k: v.evaluate(params) for k, v in self.amplitudes.items()},
        )

    def sites(self) -> set[int]:
        return {x for key in self.amplitudes for x, _ in key}

    def support_width(self) -> int:
        xs = self.sites()
        if not xs:
            return 0
        return max(xs) - min(xs) + 1

    def pruned(self, tol: float = 0.0) -> "SectorState":
        return SectorState(
            self.N,
            self.ring_size,
            {k: v for k, v in self.amplitudes.items() if abs(v) > tol},
        )

    def distance(self, other: "SectorState") -> float:
        """Max-abs difference between two complex states."""
        keys = set(self.amplitudes) | set(other.amplitudes)
        if not keys:
            return 0.0
        return max(
            abs(self.amplitudes.get(k, 0) - other.amplitudes.get(k, 0)) for k in keys
        )


def _step_tuple(key: ModeTuple, params: Optional[WalkParams], ring_size: Optional[int]):
    """All images of an antisymmetric basis tuple under ``W^{(x)N}``."""
    per_particle = [list(step_branches(mode, params, ring_size)) for mode in key]
    for combo in itertools.product(*per_particle):
        modes = [c[0] for c in combo]
        if len(set(modes)) != len(modes):
            continue
        yield combo


def apply_free(state: SectorState, params: WalkParams) -> SectorState:
    """Apply ``W`` to every particle of a complex-valued state."""
    L = state.ring_size
    out: dict = {}
    for key, value in state.amplitudes.items():
        if value == 0:
            continue
        for combo in _step_tuple(key, params, L):
            amp = value
            for _, _, w in combo:
                amp = amp * w
            if amp == 0:
                continue
            modes = [c[0] for c in combo]
            new_key = tuple(sorted(modes))
            sign = permutation_sign(modes)
            out[new_key] = out.get(new_key, 0) + sign * amp
    return SectorState(state.N, L, out)


def apply_interaction_phase(state: SectorState, chi: float) -> SectorState:
    """Multiply every tuple by ``e^{i chi (number of doubly occupied sites)}``."""
    phase = np.exp(1j * chi)
    out = {}
    for key, value in state.amplitudes.items():
        c = double_occupancy(key)
        out[key] = value * phase**c if c else value
    return SectorState(state.N, state.ring_size, out)


# -- dense basis machinery for long runs ------------------------------------

MAX_SECTOR_DIM = 250_000


def sector_basis(ring_size: int, N: int) -> list[ModeTuple]:
    """All canonical N-mode tuples on a ring, in lexicographic order."""
    modes = [(x, a) for x in range(ring_size) for a in (0, 1)]
    dim = int(np.prod([len(modes) - i for i in range(N)]) // np.prod(range(1, N + 1)))
    if dim > MAX_SECTOR_DIM:
        raise ResourceCapError(f"sector dimension {dim} exceeds {MAX_SECTOR_DIM}")
    return list(itertools.combinations(modes, N))


def sector_operators(ring_size: int, N: int, params: WalkParams):
    """Sparse ``W_N`` and diagonal ``J`` on the full antisymmetric sector.

    Returns
    -------
    basis : list of tuple
    W : scipy.sparse.csr_matrix
    J : numpy.ndarray
        Diagonal of the interaction operator.
    """
    basis = sector_basis(ring_size, N)
    index = {key: i for i, key in enumerate(basis)}
    rows, cols, vals = [], [], []
    for col, key in enumerate(basis):
        for combo in _step_tuple(key, params, ring_size):
            amp = 1.0 + 0j
            for _, _, w in combo:
                amp *= w
            modes = [c[0] for c in combo]
            rows.append(index[tuple(sorted(modes))])
            cols.append(col)
            vals.append(permutation_sign(modes) * amp)
    dim = len(basis)
    W = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    J = np.exp(1j * params.chi * np.array([double_occupancy(k) for k in basis]))
    return basis, W, J


def state_to_vector(state: SectorState, basis: Sequence[ModeTuple]) -> np.ndarray:
    index = {key: i for i, key in enumerate(basis)}
    vec = np.zeros(len(basis), dtype=complex)
    for key, value in state.amplitudes.items():
        vec[index[key]] = value
    return vec


def vector_to_state(vec: np.ndarray, basis: Sequence[ModeTuple], N: int,
                    ring_size: int, tol: float = 0.0) -> SectorState:
    return SectorState(
        N, ring_size, {basis[i]: complex(v) for i, v in enumerate(vec) if abs(v) > tol}
    )


def iter_modes(sites: Iterable[int]) -> Iterator[Mode]:
    for x in sites:
        yield (x, 0)
        yield (x, 1)
