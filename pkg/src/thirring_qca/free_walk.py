"""The non-interacting Dirac walk.

Lattice evolution, the momentum-space symbol, the closed-form path sum and
constructive path enumeration.  ``W`` acts on ``(psi_R, psi_L)`` as::

    psi_R(x, t+1) = n psi_R(x-1, t) + i m psi_L(x, t)
    psi_L(x, t+1) = n psi_L(x+1, t) + i m psi_R(x, t)
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, TextIO

import numpy as np

from .core import BitPath, WalkParams, binomial, forced_final_bit
from .errors import ConfigurationError, DomainError, ResourceCapError
from .sector import SectorState, apply_free, normalize_mode, step_branches

__all__ = [
    "Lattice1PState",
    "MomentumMatrix",
    "step_free",
    "evolve_free",
    "momentum_matrix",
    "path_count_c",
    "pathsum_propagator",
    "propagator_matrix",
    "enumerate_bitpaths",
    "step_free_N",
    "default_ring_size",
    "check_light_cone",
    "walk_matrix",
    "propagator_table",
    "write_propagator_csv",
    "ENUMERATION_CAP",
]

ENUMERATION_CAP = 16


def default_ring_size(T: int, support_width: int = 1) -> int:
    return 2 * T + support_width + 4


def check_light_cone(ring_size: Optional[int], support_width: int, steps: int) -> None:
    """Refuse runs whose light cone would wrap around the ring."""
    if ring_size is None:
        return
    if ring_size <= 2 * steps + support_width:
        raise ConfigurationError(
            f"ring of {ring_size} sites is too small for {steps} steps from a "
            f"support of width {support_width}; need more than "
            f"{2 * steps + support_width}"
        )


@dataclass(frozen=True)
class Lattice1PState:
    """Single-particle wavefunction, sparse over ``(site, chirality)``."""

    ring_size: Optional[int]
    amplitudes: dict = field(default_factory=dict)

    @classmethod
    def delta(cls, x: int, a, ring_size: Optional[int] = None) -> "Lattice1PState":
        return cls(ring_size, {normalize_mode((x, a), ring_size): 1.0 + 0j})

    def norm_sq(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.amplitudes.values()))

    def __getitem__(self, mode) -> complex:
        return self.amplitudes.get(normalize_mode(mode, self.ring_size), 0j)

    def support_width(self) -> int:
        xs = [x for x, _ in self.amplitudes]
        return max(xs) - min(xs) + 1 if xs else 0


def step_free(state: Lattice1PState, params: WalkParams) -> Lattice1PState:
    out: dict = {}
    for mode, value in state.amplitudes.items():
        for new, _, w in step_branches(mode, params, state.ring_size):
            amp = value * w
            if amp != 0:
                out[new] = out.get(new, 0) + amp
    return Lattice1PState(state.ring_size, out)


def evolve_free(state: Lattice1PState, params: WalkParams, steps: int,
                check: bool = True) -> Lattice1PState:
    if check:
        check_light_cone(state.ring_size, state.support_width(), steps)
    for _ in range(steps):
        state = step_free(state, params)
    return state


def walk_matrix(ring_size: int, params: WalkParams) -> np.ndarray:
    """Dense ``2L x 2L`` walk on a ring, mode index ``2*x + a``."""
    L = ring_size
    W = np.zeros((2 * L, 2 * L), dtype=complex)
    for x in range(L):
        for a in (0, 1):
            for (y, b), _, w in step_branches((x, a), params, L):
                W[2 * y + b, 2 * x + a] += w
    return W


@dataclass(frozen=True)
class MomentumMatrix:
    k: float
    entries: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def is_unitary(self, atol: float = 1e-12) -> bool:
        return np.allclose(self.entries.conj().T @ self.entries, np.eye(2), atol=atol)


def momentum_matrix(k: float, params: WalkParams) -> MomentumMatrix:
    """``[[n e^{-ik}, i m], [i m, n e^{ik}]]`` for plane waves ``e^{ikx}``."""
    if not -np.pi - 1e-12 <= k <= np.pi + 1e-12:
        raise DomainError(f"wave vector {k} outside the Brillouin zone")
    n, m = params.n, params.m
    entries = np.array(
        [[n * np.exp(-1j * k), 1j * m], [1j * m, n * np.exp(1j * k)]], dtype=complex
    )
    return MomentumMatrix(float(k), entries)


def path_count_c(a: int, b: int, f: int, x_in: int, x_out: int, t: int) -> int:
    """Number of letter strings with ``f`` flips, total matrix ``W_ab``.

    ``a`` is the final chirality and ``b`` the initial one.  Zero for boundary
    data no path realizes.
    """
    if t < 1:
        raise DomainError("path counts need at least one step")
    dx = x_out - x_in
    if f < 0 or abs(dx) > t or f > t - abs(dx):
        return 0
    if f == 0:
        if a == b == 0:
            return int(dx == t)
        if a == b == 1:
            return int(dx == -t)
        return 0
    nu = Fraction(a * b - (1 - a) * (1 - b), 2)
    mu_plus = Fraction(t + dx - 1, 2)
    mu_minus = Fraction(t - dx - 1, 2)
    half = Fraction(f - 1, 2)
    return binomial(mu_plus - nu, half - nu) * binomial(mu_minus + nu, half + nu)


def pathsum_propagator(x_in: int, b0: int, x_out: int, bT: int, t: int,
                       params: WalkParams) -> complex:
    """Amplitude ``<x_out, bT| W^t |x_in, b0>`` from the binomial path sum."""
    if t == 0:
        return complex(x_in == x_out and b0 == bT)
    dx = x_out - x_in
    if abs(dx) > t:
        return 0j
    m, n = params.m, params.n
    total = 0j
    for f in range(0, t - abs(dx) + 1):
        c = path_count_c(bT, b0, f, x_in, x_out, t)
        if c:
            total += (1j * m) ** f * n ** (t - f) * c
    return total


@lru_cache(maxsize=None)
def _propagator_matrix(dx: int, t: int, m: float, allow_limits: bool) -> np.ndarray:
    params = WalkParams(m, 0.0, allow_limits)
    P = np.zeros((2, 2), dtype=complex)
    for bT in (0, 1):
        for b0 in (0, 1):
            P[bT, b0] = pathsum_propagator(0, b0, dx, bT, t, params)
    P.setflags(write=False)
    return P


def propagator_matrix(dx: int, t: int, params: WalkParams) -> np.ndarray:
    """2x2 block ``[bT, b0]`` of ``W^t`` for displacement ``dx`` (read-only)."""
    return _propagator_matrix(int(dx), int(t), params.m, params.allow_limits)


def enumerate_bitpaths(x_in: int, x_out: int, T: int, b0: Optional[int] = None,
                       cap: int = ENUMERATION_CAP) -> list[BitPath]:
    """All bit paths from ``x_in`` to ``x_out`` in ``T`` steps.

    The final bit is forced by the boundary data and the number of ones by
    the weight formula, so the paths are produced by distributing that many
    ones over the interior slots.
    """
    if T > cap:
        raise ResourceCapError(f"T={T} exceeds the enumeration cap {cap}")
    if T < 0 or abs(x_out - x_in) > T:
        return []
    starts = (0, 1) if b0 is None else (b0,)
    out = []
    for first in starts:
        last = forced_final_bit(x_in, first, x_out, T)
        if T == 0:
            out.append(BitPath((first,), x_in))
            continue
        w = (T + x_in - x_out + first + last) // 2
        ones = w - first - last
        interior = T - 1
        if not 0 <= ones <= interior:
            continue
        for pos in itertools.combinations(range(interior), ones):
            mid = [0] * interior
            for p in pos:
                mid[p] = 1
            out.append(BitPath((first, *mid, last), x_in))
    return out


def step_free_N(state: SectorState, params: WalkParams) -> SectorState:
    """One application of ``W`` to every particle of an antisymmetric state."""
    return apply_free(state, params)


def propagator_table(t: int, params: WalkParams, x_in: int = 0,
                     b0_values: Iterable[int] = (0, 1)):
    """Rows ``(t, x_in, b0, x_out, bT, amplitude)`` over the whole light cone."""
    rows = []
    for b0 in b0_values:
        for x_out in range(x_in - t, x_in + t + 1):
            for bT in (0, 1):
                rows.append(
                    (t, x_in, b0, x_out, bT,
                     pathsum_propagator(x_in, b0, x_out, bT, t, params))
                )
    return rows


def write_propagator_csv(rows, fh: Optional[TextIO] = None) -> str:
    """CSV with columns ``t,x_in,b0,x_out,bT,re,im``; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "x_in", "b0", "x_out", "bT", "re", "im"])
    for t, x_in, b0, x_out, bT, amp in rows:
        writer.writerow([t, x_in, b0, x_out, bT, f"{amp.real:.17g}", f"{amp.imag:.17g}"])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
