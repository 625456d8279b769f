"""Scalar and combinatorial substrate of the Dirac walk.

Chirality is encoded as a bit: 0 is the right-moving mode R, 1 the
left-moving mode L.  A single step of one particle is one of three letters
``R`` (shift right, keep state 0), ``L`` (shift left, keep state 1) or ``F``
(stay, flip the state).  Every bit string is a valid trajectory, whereas
letter strings obey the constraints induced by the binary matrix algebra.

Binary 2x2 matrices ``W_ab`` carry a single unit entry at row ``a``, column
``b``.  Acting on column vectors ``(psi_R, psi_L)`` the label therefore reads
``W_{final, initial}``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Optional

import numpy as np

from .errors import DomainError, EmptyPathError, ShapeError

__all__ = [
    "WalkParams",
    "BinLabel",
    "Letter",
    "BitPath",
    "TransitionPath",
    "GradedAmplitude",
    "compose_binary",
    "letter_of_bits",
    "bits_to_transitions",
    "displacement",
    "weight",
    "forced_final_bit",
    "binomial",
    "graded_add",
    "graded_mul_letter",
    "graded_mul_interaction",
    "graded_eval",
    "FORBIDDEN_SUBSTRINGS",
]


@dataclass(frozen=True)
class WalkParams:
    """Automaton constants.

    Only the mass ``m`` and the coupling ``chi`` are stored; the hopping
    amplitude ``n = sqrt(1 - m**2)`` is derived so the constraint
    ``n**2 + m**2 = 1`` can never be broken.  The limits ``m = 0`` and
    ``m = 1`` need ``allow_limits=True`` and then use exact 0/1 values.
    """

    m: float
    chi: float = 0.0
    allow_limits: bool = False

    def __post_init__(self):
        m = float(self.m)
        if self.allow_limits:
            if not 0.0 <= m <= 1.0:
                raise DomainError(f"mass must lie in [0, 1], got {m}")
        elif not 0.0 < m < 1.0:
            raise DomainError(f"mass must lie in (0, 1), got {m}")
        if not abs(self.chi) <= math.pi + 1e-12:
            raise DomainError(f"coupling must lie in [-pi, pi], got {self.chi}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "chi", float(self.chi))

    @property
    def n(self) -> float:
        if self.m == 0.0:
            return 1.0
        if self.m == 1.0:
            return 0.0
        return math.sqrt((1.0 - self.m) * (1.0 + self.m))

    def with_chi(self, chi: float) -> "WalkParams":
        return WalkParams(self.m, chi, self.allow_limits)


class BinLabel(NamedTuple):
    """Label ``(a, b)`` of the binary matrix ``W_ab``."""

    a: int
    b: int

    def matrix(self) -> np.ndarray:
        out = np.zeros((2, 2), dtype=int)
        out[self.a, self.b] = 1
        return out

    @property
    def name(self) -> str:
        return f"W{self.a}{self.b}"

    @classmethod
    def parse(cls, text: str) -> "BinLabel":
        digits = text.strip().upper().lstrip("W")
        if len(digits) != 2 or any(c not in "01" for c in digits):
            raise ValueError(f"not a binary label: {text!r}")
        return cls(int(digits[0]), int(digits[1]))

    @classmethod
    def all(cls) -> tuple["BinLabel", ...]:
        return tuple(cls(a, b) for a in (0, 1) for b in (0, 1))


class Letter(enum.Enum):
    R = "R"
    L = "L"
    F = "F"

    @property
    def displacement(self) -> int:
        return _DISPLACEMENT[self]

    def __str__(self):
        return self.value


_DISPLACEMENT = {Letter.R: 1, Letter.L: -1, Letter.F: 0}

FORBIDDEN_SUBSTRINGS = ("RL", "LR", "RFR", "LFL")


def compose_binary(x: BinLabel, y: BinLabel) -> Optional[BinLabel]:
    """Product ``W_x W_y``; ``None`` stands for the zero matrix."""
    if x[1] != y[0]:
        return None
    return BinLabel(x[0], y[1])


def letter_of_bits(b1: int, b2: int) -> Letter:
    """Letter for the bit pair (state before, state after)."""
    if b1 == b2:
        return Letter.R if b1 == 0 else Letter.L
    return Letter.F


def displacement(s: Letter) -> int:
    return s.displacement


def _delta_of_bits(a: int, b: int) -> int:
    # closed form (-1)^{ab} [1 - (a xor b)]
    return (-1) ** (a * b) * (1 - (a ^ b))


@dataclass(frozen=True)
class TransitionPath:
    letters: tuple[Letter, ...]

    def __str__(self):
        return "".join(s.value for s in self.letters)

    def __len__(self):
        return len(self.letters)

    @property
    def displacement(self) -> int:
        return sum(s.displacement for s in self.letters)

    @property
    def flips(self) -> int:
        return sum(1 for s in self.letters if s is Letter.F)

    def has_forbidden_substring(self) -> bool:
        text = str(self)
        return any(bad in text for bad in FORBIDDEN_SUBSTRINGS)

    @classmethod
    def parse(cls, text: str) -> "TransitionPath":
        return cls(tuple(Letter(c) for c in text))


@dataclass(frozen=True)
class BitPath:
    """Chirality string ``b_0 ... b_T`` of a particle starting at ``origin``.

    A one-bit path is the degenerate zero-step trajectory.
    """

    bits: tuple[int, ...]
    origin: int = 0

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise EmptyPathError("a bit path needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"bits must be 0 or 1, got {self.bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def T(self) -> int:
        return len(self.bits) - 1

    @property
    def weight(self) -> int:
        return sum(self.bits)

    @property
    def flips(self) -> int:
        return sum(1 for u, v in zip(self.bits, self.bits[1:]) if u != v)

    @property
    def endpoint(self) -> int:
        return self.origin + sum(
            _delta_of_bits(u, v) for u, v in zip(self.bits, self.bits[1:])
        )

    def positions(self) -> list[int]:
        """Site occupied at each time ``0..T``."""
        out = [self.origin]
        for u, v in zip(self.bits, self.bits[1:]):
            out.append(out[-1] + _delta_of_bits(u, v))
        return out

    @property
    def label(self) -> BinLabel:
        """Total transition matrix ``W_{b_T b_0}`` of the path."""
        return BinLabel(self.bits[-1], self.bits[0])

    def transitions(self) -> TransitionPath:
        return bits_to_transitions(self)

    @classmethod
    def parse(cls, text: str, origin: int = 0) -> "BitPath":
        return cls(tuple(int(c) for c in text), origin)

    def __str__(self):
        return "".join(str(b) for b in self.bits)


def bits_to_transitions(p: BitPath) -> TransitionPath:
    """Map ``b_0..b_T`` to ``s_1..s_T`` with ``s_k = M(b_{k-1}, b_k)``.

    Raises
    ------
    EmptyPathError
        For a path of fewer than two bits.
    """
    if len(p.bits) < 2:
        raise EmptyPathError("need at least two bits to form a transition")
    return TransitionPath(
        tuple(letter_of_bits(u, v) for u, v in zip(p.bits, p.bits[1:]))
    )


def weight(p: BitPath) -> int:
    return p.weight


def forced_final_bit(x_in: int, b0: int, x_out: int, T: int) -> int:
    """Internal state every path with the given boundary data carries at the end."""
    if T < 0 or abs(x_out - x_in) > T:
        raise DomainError(
            f"site {x_out} is outside the causal cone of {x_in} after {T} steps"
        )
    return (T + x_in - x_out + b0) % 2


def binomial(n, k) -> int:
    """Binomial coefficient that vanishes for non-integer or out-of-range ``k``.

    A non-integer ``n`` also yields zero.  Arguments may be ``Fraction`` or
    float halves as produced by the path-count formula.
    """
    if k != int(k) or n != int(n):
        return 0
    n, k = int(n), int(k)
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


class GradedAmplitude:
    """Exact amplitude ``sum N[f, j] (i m)^f n^(S-f) e^(i j chi)``.

    ``f`` counts flip letters, ``j`` counts interaction events and ``S`` is the
    number of single-particle letters accumulated so far.  Coefficients are
    Python integers; instances are immutable.
    """

    __slots__ = ("_terms", "_S")

    def __init__(self, terms: Mapping[tuple[int, int], int], total_letters: int):
        clean = {}
        for (f, j), c in terms.items():
            c = int(c)
            if c == 0:
                continue
            if f < 0 or j < 0 or f > total_letters:
                raise ShapeError(
                    f"key (f={f}, j={j}) invalid for {total_letters} letters"
                )
            clean[(int(f), int(j))] = c
        self._terms = clean
        self._S = int(total_letters)

    @classmethod
    def one(cls, total_letters: int = 0) -> "GradedAmplitude":
        return cls({(0, 0): 1}, total_letters)

    @classmethod
    def zero(cls, total_letters: int = 0) -> "GradedAmplitude":
        return cls({}, total_letters)

    @property
    def terms(self) -> dict[tuple[int, int], int]:
        return dict(self._terms)

    @property
    def total_letters(self) -> int:
        return self._S

    def coefficient(self, f: int, j: int) -> int:
        return self._terms.get((f, j), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def f_support(self) -> set[int]:
        return {f for f, _ in self._terms}

    def j_support(self) -> set[int]:
        return {j for _, j in self._terms}

    def restrict(self, f: Optional[int] = None, min_j: int = 0) -> "GradedAmplitude":
        return GradedAmplitude(
            {
                (ff, j): c
                for (ff, j), c in self._terms.items()
                if (f is None or ff == f) and j >= min_j
            },
            self._S,
        )

    def chi_polynomial(self, f: int) -> dict[int, int]:
        """Coefficients of ``e^(i j chi)`` at fixed flip order ``f``."""
        return {j: c for (ff, j), c in sorted(self._terms.items()) if ff == f}

    def __add__(self, other: "GradedAmplitude") -> "GradedAmplitude":
        return graded_add(self, other)

    def __neg__(self) -> "GradedAmplitude":
        return GradedAmplitude({k: -c for k, c in self._terms.items()}, self._S)

    def __sub__(self, other):
        return graded_add(self, -other)

    def scale(self, c: int) -> "GradedAmplitude":
        return GradedAmplitude({k: c * v for k, v in self._terms.items()}, self._S)

    def __eq__(self, other):
        if not isinstance(other, GradedAmplitude):
            return NotImplemented
        return self._S == other._S and self._terms == other._terms

    def __hash__(self):
        return hash((self._S, frozenset(self._terms.items())))

    def __repr__(self):
        inner = ", ".join(f"({f},{j}): {c}" for (f, j), c in sorted(self._terms.items()))
        return f"GradedAmplitude({{{inner}}}, S={self._S})"

    def evaluate(self, params: WalkParams) -> complex:
        return graded_eval(self, params)


def graded_add(g: GradedAmplitude, h: GradedAmplitude) -> GradedAmplitude:
    if g.total_letters != h.total_letters:
        raise ShapeError(
            f"cannot add amplitudes with {g.total_letters} and {h.total_letters} letters"
        )
    out = g.terms
    for k, c in h.terms.items():
        out[k] = out.get(k, 0) + c
    return GradedAmplitude(out, g.total_letters)


def graded_mul_letter(g: GradedAmplitude, s: Letter) -> GradedAmplitude:
    df = 1 if s is Letter.F else 0
    return GradedAmplitude(
        {(f + df, j): c for (f, j), c in g.terms.items()}, g.total_letters + 1
    )


def graded_mul_interaction(g: GradedAmplitude, count: int = 1) -> GradedAmplitude:
    return GradedAmplitude(
        {(f, j + count): c for (f, j), c in g.terms.items()}, g.total_letters
    )


def graded_eval(g: GradedAmplitude, params: WalkParams) -> complex:
    m, n, chi = params.m, params.n, params.chi
    S = g.total_letters
    total = 0j
    for (f, j), c in g.terms.items():
        total += c * (1j ** f) * m**f * n ** (S - f) * complex(math.cos(j * chi), math.sin(j * chi))
    return total


def all_bitpaths(T: int, origin: int = 0) -> Iterable[BitPath]:
    """Every bit path of ``T`` steps (``2**(T+1)`` of them)."""
    import itertools

    for bits in itertools.product((0, 1), repeat=T + 1):
        yield BitPath(bits, origin)
