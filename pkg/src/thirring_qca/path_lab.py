"""Exhaustive finite-universe checks of the path calculus.

Every check enumerates a stated universe completely (no sampling) and
returns a :class:`LemmaReport` whose ``violations`` list must be empty.
Joint two-particle checks work on numpy arrays holding every bit path of a
given length, so pair universes of a few hundred thousand trajectories stay
cheap.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Optional

import numpy as np

from .core import BitPath, _delta_of_bits, forced_final_bit, letter_of_bits
from .errors import ConfigurationError, ResourceCapError

__all__ = [
    "LemmaReport",
    "check_permutation_lemma",
    "check_weight_lemma",
    "check_unique_internal_state",
    "check_parity_condition",
    "check_distinguishability",
    "check_sign_flip",
    "check_interaction_parity",
    "check_three_particle_lemma",
    "check_relative_position_table",
    "find_pauli_violations",
    "PauliViolation",
    "can_interact",
    "run_all",
    "SIGN_FLIP_CASES",
    "RELATIVE_POSITION_TABLE",
]

EXHAUSTIVE_T_CAP = 10
JOINT_T_CAP = 8


@dataclass
class LemmaReport:
    """Outcome of one exhaustive check.

    ``universe`` is a human-readable, re-runnable description of the cases
    enumerated; ``parameters`` holds the caps that define it.
    """

    lemma_id: str
    universe_size: int
    violations: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    universe: str = ""

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict[str, Any]:
        return {
            "lemma_id": self.lemma_id,
            "passed": self.passed,
            "universe_size": self.universe_size,
            "universe": self.universe,
            "parameters": self.parameters,
            "violations": [_jsonable(v) for v in self.violations],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    return v


def _check_cap(T_max: int, cap: int) -> None:
    if T_max < 1:
        raise ConfigurationError("T_max must be at least 1")
    if T_max > cap:
        raise ResourceCapError(f"exhaustive mode is capped at T = {cap}")


# -- path tables -------------------------------------------------------------

@lru_cache(maxsize=None)
def _path_table(T: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``2**(T+1)`` bit paths from the origin: ``(bits, positions)``, both ``(P, T+1)``."""
    bits = np.array(list(itertools.product((0, 1), repeat=T + 1)), dtype=np.int8)
    a, b = bits[:, :-1].astype(np.int64), bits[:, 1:].astype(np.int64)
    step = np.where(a == b, 1 - 2 * a, 0)
    pos = np.concatenate([np.zeros((len(bits), 1), dtype=np.int64), np.cumsum(step, axis=1)], axis=1)
    return bits, pos


@lru_cache(maxsize=None)
def _visited(b0: int, T: int) -> dict[tuple[int, int], frozenset[int]]:
    """``(t, x) -> bits`` seen by any path of ``T`` steps from ``(0, b0)``, for ``t >= 1``."""
    bits, pos = _path_table(T)
    out: dict[tuple[int, int], set[int]] = {}
    for row_b, row_x in zip(bits, pos):
        if row_b[0] != b0:
            continue
        for t in range(1, T + 1):
            out.setdefault((t, int(row_x[t])), set()).add(int(row_b[t]))
    return {k: frozenset(v) for k, v in out.items()}


def _states(x: int, b0: int, T: int) -> dict[tuple[int, int], int]:
    """Visited ``(t, site) -> bit`` for a particle starting at ``(x, b0)``; bits are unique by construction."""
    return {(t, v + x): next(iter(bs)) for (t, v), bs in _visited(b0, T).items()}


def can_interact(x: int, a: int, y: int, b: int) -> bool:
    """Necessary condition for two paths from ``(x, a)`` and ``(y, b)`` to meet with opposite states."""
    return (a != b) == ((y - x) % 2 == 0)


def _colocations(x: int, a: int, y: int, b: int, T: int) -> list[tuple[int, int, int, int]]:
    """Every ``(t, site, bit_x, bit_y)`` with ``1 <= t <= T`` reachable by both particles."""
    sa, sb = _states(x, a, T), _states(y, b, T)
    return [(t, v, sa[(t, v)], sb[(t, v)]) for (t, v) in sorted(sa.keys() & sb.keys())]


# -- single-particle lemmas ----------------------------------------------------

def check_permutation_lemma(T_max: int = EXHAUSTIVE_T_CAP) -> LemmaReport:
    """Permuting internal bits keeps both endpoints of a path.

    Every adjacent transposition of internal bits is applied to every path;
    since adjacent swaps generate all permutations this covers the full
    statement.  The sorted rearrangement is checked as well, and the
    symmetry ``M(b1, b2) = M(b2, b1)`` of the bit-pair map is checked on
    all four pairs.
    """
    _check_cap(T_max, EXHAUSTIVE_T_CAP)
    violations, size = [], 0
    for b1, b2 in itertools.product((0, 1), repeat=2):
        size += 1
        if letter_of_bits(b1, b2) is not letter_of_bits(b2, b1):
            violations.append({"pair": [b1, b2]})
    for T in range(1, T_max + 1):
        bits, pos = _path_table(T)
        end = pos[:, -1]
        for i in range(1, T - 1):
            sw = bits.copy()
            sw[:, [i, i + 1]] = sw[:, [i + 1, i]]
            end_sw = _endpoints(sw)
            size += len(bits)
            for r in np.nonzero(end_sw != end)[0]:
                violations.append({"T": T, "bits": bits[r].tolist(), "swap": i})
        if T >= 2:
            srt = bits.copy()
            srt[:, 1:-1] = np.sort(srt[:, 1:-1], axis=1)
            size += len(bits)
            for r in np.nonzero(_endpoints(srt) != end)[0]:
                violations.append({"T": T, "bits": bits[r].tolist(), "swap": "sorted"})
    return LemmaReport("permutation", size, violations, {"T_max": T_max},
                       f"all bit paths with 1 <= T <= {T_max}, every adjacent internal swap "
                       "and the sorted rearrangement; the 4 bit pairs for M symmetry")


def _endpoints(bits: np.ndarray) -> np.ndarray:
    a, b = bits[:, :-1].astype(np.int64), bits[:, 1:].astype(np.int64)
    return np.where(a == b, 1 - 2 * a, 0).sum(axis=1)


def check_weight_lemma(T_max: int = EXHAUSTIVE_T_CAP) -> LemmaReport:
    """``2 w(b) = T + x_in - x_out + b_0 + b_T`` for every path."""
    _check_cap(T_max, EXHAUSTIVE_T_CAP)
    violations, size = [], 0
    for T in range(1, T_max + 1):
        bits, pos = _path_table(T)
        w = bits.sum(axis=1).astype(np.int64)
        rhs = T - pos[:, -1] + bits[:, 0] + bits[:, -1]
        size += len(bits)
        for r in np.nonzero(2 * w != rhs)[0]:
            violations.append({"T": T, "bits": bits[r].tolist()})
    return LemmaReport("weight", size, violations, {"T_max": T_max},
                       f"all bit paths with 1 <= T <= {T_max} from the origin")


def check_unique_internal_state(T_max: int = EXHAUSTIVE_T_CAP) -> LemmaReport:
    """Initial site and state fix the state at every later site.

    Checked for ``t >= 1`` only; at ``t = 0`` the state is the free choice
    of initial condition.
    """
    _check_cap(T_max, EXHAUSTIVE_T_CAP)
    violations, size = [], 0
    for T in range(1, T_max + 1):
        for b0 in (0, 1):
            for (t, v), bs in _visited(b0, T).items():
                size += 1
                if bs != {forced_final_bit(0, b0, v, t)}:
                    violations.append({"T": T, "b0": b0, "t": t, "site": v, "bits": sorted(bs)})
    return LemmaReport("unique-internal-state", size, violations, {"T_max": T_max},
                       f"every (t, site) with 1 <= t <= T visited by any bit path from the origin, "
                       f"both initial states, 1 <= T <= {T_max}")


# -- two-particle lemmas ------------------------------------------------------

def _pair_universe(T: int):
    """Initial pairs ``(0, a)``, ``(d, b)`` with ``0 <= d <= 2T``, distinct modes."""
    for d in range(0, 2 * T + 1):
        for a, b in itertools.product((0, 1), repeat=2):
            if d == 0 and a == b:
                continue
            yield d, a, b


def check_parity_condition(T_max: int = EXHAUSTIVE_T_CAP) -> LemmaReport:
    """Opposite-state meetings happen exactly for pairs passing the parity condition.

    For each initial pair every common visited site is inspected.  Pairs
    passing the condition must meet with opposite states only, and must
    meet at least once when ``T >= d``; pairs failing it must never meet
    with opposite states.
    """
    _check_cap(T_max, EXHAUSTIVE_T_CAP)
    violations, size = [], 0
    for T in range(1, T_max + 1):
        for d, a, b in _pair_universe(T):
            size += 1
            ok = can_interact(0, a, d, b)
            meets = _colocations(0, a, d, b, T)
            opposite = [m for m in meets if m[2] != m[3]]
            equal = [m for m in meets if m[2] == m[3]]
            if ok and equal:
                violations.append({"T": T, "delta0": d, "a": a, "b": b, "equal_meet": list(equal[0])})
            if not ok and opposite:
                violations.append({"T": T, "delta0": d, "a": a, "b": b, "opposite_meet": list(opposite[0])})
            if ok and T >= d and not opposite:
                violations.append({"T": T, "delta0": d, "a": a, "b": b, "no_meet": True})
    return LemmaReport("parity-condition", size, violations, {"T_max": T_max},
                       f"initial modes (0, a), (d, b) with 0 <= d <= 2T, distinct, 1 <= T <= {T_max}; "
                       "all co-locations of the two path families")


def check_distinguishability(T_max: int = EXHAUSTIVE_T_CAP) -> LemmaReport:
    """Particles that may interact carry different forced states at any common final site."""
    _check_cap(T_max, EXHAUSTIVE_T_CAP)
    violations, size = [], 0
    for T in range(1, T_max + 1):
        for d, a, b in _pair_universe(T):
            if not can_interact(0, a, d, b):
                continue
            for v in range(d - T, T + 1):
                size += 1
                ba = forced_final_bit(0, a, v, T)
                bb = forced_final_bit(d, b, v, T)
                if ba == bb:
                    violations.append({"T": T, "delta0": d, "a": a, "b": b, "site": v})
    return LemmaReport("distinguishability", size, violations, {"T_max": T_max},
                       f"interaction-admissible pairs (0, a), (d, b), 0 <= d <= 2T, every final "
                       f"site in both cones, 1 <= T <= {T_max}")


def _joint(T: int, d: int, admissible_only: bool = False):
    """Physically valid trajectory pairs from sites 0 and ``d``.

    Returns ``(delta, meet)`` arrays of shape ``(pairs, T+1)``: relative
    position ``x - y`` and the co-location mask.  Pairs meeting with equal
    states at any time are dropped; with ``admissible_only`` so are pairs
    whose initial states fail the parity condition.
    """
    bits, pos = _path_table(T)
    P = len(bits)
    ia, ib = np.divmod(np.arange(P * P), P)
    delta = pos[ia] - (pos[ib] + d)
    meet = delta == 0
    drop = (meet & (bits[ia] == bits[ib])).any(axis=1)
    if admissible_only:
        opposite = bits[ia, 0] != bits[ib, 0]
        drop |= opposite != (d % 2 == 0)
    return delta[~drop], meet[~drop]


SIGN_FLIP_CASES = {
    (0, 0): (1, 0),
    (0, 1): (1, -1),
    (1, 0): (0, 0),
    (1, 1): (0, -1),
}
"""``(a, b) -> (Delta(M_a0), Delta(M_b1))`` for the four pre-interaction steps."""


def check_sign_flip(T_max: int = JOINT_T_CAP) -> LemmaReport:
    """Relative position changes sign across every interaction.

    Universe: every pair of bit paths from sites 0 and ``d``
    (``0 <= d <= 2T``) that never meets with equal states; an interaction is
    declared at each meeting time ``1 <= t <= T-1``.  The four displacement
    cases behind the proof are checked against the closed-form ``Delta``.
    """
    _check_cap(T_max, JOINT_T_CAP)
    violations, size = [], 0
    for (a, b), (da, db) in SIGN_FLIP_CASES.items():
        size += 1
        got = (_delta_of_bits(a, 0), _delta_of_bits(b, 1))
        if got != (da, db) or not da >= db:
            violations.append({"case": [a, b], "got": list(got)})
        back = (_delta_of_bits(0, a), _delta_of_bits(1, b))
        if not back[0] >= back[1]:
            violations.append({"case": [a, b], "after": list(back)})
    for T in range(2, T_max + 1):
        for d in range(0, 2 * T + 1):
            delta, meet = _joint(T, d)
            inner = meet[:, 1:T]
            size += int(inner.sum())
            prod = delta[:, :T - 1] * delta[:, 2:]
            bad = inner & (prod > 0)
            for r, t in zip(*np.nonzero(bad)):
                violations.append({"T": T, "delta0": -d, "t": int(t) + 1,
                                   "deltas": delta[r].tolist()})
    return LemmaReport("sign-flip", size, violations, {"T_max": T_max},
                       f"interaction events of valid trajectory pairs from sites 0 and d, "
                       f"0 <= d <= 2T, 2 <= T <= {T_max}; plus the 4 displacement cases")


def check_interaction_parity(T_max: int = JOINT_T_CAP) -> LemmaReport:
    """Order-preserving processes interact an even number of times, order-swapping ones an odd number.

    The universe holds pairs passing the parity condition; other pairs live
    on interleaved sublattices and swap order without ever sharing a site.
    """
    _check_cap(T_max, JOINT_T_CAP)
    violations, size = [], 0
    for T in range(1, T_max + 1):
        for d in range(1, 2 * T + 1):
            delta, meet = _joint(T, d, admissible_only=True)
            final = delta[:, -1]
            keep = final != 0
            count = meet[keep][:, 1:T].sum(axis=1)
            swapped = final[keep] > 0
            size += int(keep.sum())
            bad = (count % 2 == 1) != swapped
            for r in np.nonzero(bad)[0][:20]:
                violations.append({"T": T, "delta0": -d, "deltas": delta[keep][r].tolist()})
    return LemmaReport("interaction-parity", size, violations, {"T_max": T_max},
                       f"valid trajectory pairs from x_in = 0 < y_in = d <= 2T passing the parity "
                       f"condition, x_out != y_out, "
                       f"1 <= T <= {T_max}")


# -- three particles ---------------------------------------------------------

RELATIVE_POSITION_TABLE = {
    ("even", "even"): ("even", "equal"),
    ("even", "odd"): ("odd", "opposite"),
    ("odd", "even"): ("odd", "opposite"),
    ("odd", "odd"): ("even", "equal"),
}
"""``(parity of delta_A, parity of delta_C) -> (parity of x_A - x_C, relation of b_A and b_C)``."""


def _parity(n: int) -> str:
    return "even" if n % 2 == 0 else "odd"


def check_relative_position_table() -> LemmaReport:
    """Derive every cell of the relation table by enumeration and compare.

    ``B`` sits at the origin with either state; ``A`` and ``C`` range over
    offsets of both parities with states chosen so that ``B`` passes the
    parity condition with each.
    """
    violations, size = [], 0
    for bB in (0, 1):
        for dA, dC in itertools.product(range(1, 5), repeat=2):
            xA, xC = -dA, dC
            bA = bB if dA % 2 else 1 - bB
            bC = bB if dC % 2 else 1 - bB
            size += 1
            cell = (_parity(0 - xA), _parity(0 - xC))
            got = (_parity(xA - xC), "equal" if bA == bC else "opposite")
            if RELATIVE_POSITION_TABLE[cell] != got:
                violations.append({"cell": list(cell), "got": list(got)})
            if can_interact(xA, bA, xC, bC):
                violations.append({"cell": list(cell), "AC_admissible": True})
    return LemmaReport("relative-position-table", size, violations, {"offsets": "1..4", "b_B": [0, 1]},
                       "B at the origin, A at -dA, C at +dC with dA, dC in 1..4, states fixed by "
                       "B's parity condition with each")


def _triples(T: int):
    """Initial triples of distinct modes with sites in ``[0, 2T]``, first site 0, up to relabelling."""
    sites = range(0, 2 * T + 1)
    modes = [(x, a) for x in sites for a in (0, 1)]
    for trio in itertools.combinations(modes, 3):
        if trio[0][0] != 0:
            continue
        yield trio


def check_three_particle_lemma(T_max: int = 6) -> LemmaReport:
    """If one particle can interact with both others, those two cannot meet with opposite states.

    Universe: all triples of distinct initial modes with sites in
    ``[0, 2T]`` (first particle at 0), every choice of the shared particle.
    Each admissible configuration is evolved through all paths up to ``T``.
    """
    _check_cap(T_max, 6)
    violations, size = [], 0
    for T in range(1, T_max + 1):
        for trio in _triples(T):
            for k in range(3):
                B = trio[k]
                A, C = [trio[i] for i in range(3) if i != k]
                if not (can_interact(*A, *B) and can_interact(*B, *C)):
                    continue
                size += 1
                if can_interact(*A, *C):
                    violations.append({"T": T, "A": list(A), "B": list(B), "C": list(C)})
                    continue
                for m in _colocations(A[0], A[1], C[0], C[1], T):
                    if m[2] != m[3]:
                        violations.append({"T": T, "A": list(A), "B": list(B), "C": list(C),
                                           "meet": list(m)})
                        break
    return LemmaReport("three-particle", size, violations, {"T_max": T_max},
                       f"triples of distinct modes on sites [0, 2T], first at 0, each choice of the "
                       f"shared particle, all paths, 1 <= T <= {T_max}")


@dataclass(frozen=True)
class PauliViolation:
    """Two particles of a connected configuration meeting in the same mode.

    ``paths`` holds one explicit bit path per particle; the paths of the
    offending pair pass through ``(site, t)`` with the same state.
    """

    modes: tuple[tuple[int, int], ...]
    pair: tuple[int, int]
    site: int
    t: int
    bit: int
    paths: tuple[BitPath, ...]

    def as_dict(self) -> dict[str, Any]:
        return {
            "modes": [list(m) for m in self.modes],
            "pair": list(self.pair),
            "site": self.site,
            "t": self.t,
            "bit": self.bit,
            "paths": [str(p) for p in self.paths],
            "origins": [p.origin for p in self.paths],
        }


def _path_through(x: int, b0: int, T: int, site: int, t: int) -> BitPath:
    """First (lexicographic) bit path of ``T`` steps from ``(x, b0)`` visiting ``site`` at time ``t``."""
    bits, pos = _path_table(T)
    sel = np.nonzero((bits[:, 0] == b0) & (pos[:, t] + x == site))[0]
    return BitPath(tuple(int(b) for b in bits[sel[0]]), x)


def _connected(modes) -> bool:
    n = len(modes)
    seen, todo = {0}, [0]
    while todo:
        i = todo.pop()
        for j in range(n):
            if j not in seen and can_interact(*modes[i], *modes[j]):
                seen.add(j)
                todo.append(j)
    return len(seen) == n


def find_pauli_violations(N: int = 3, T: int = 4, first_only: bool = False) -> list[PauliViolation]:
    """Same-mode meetings inside configurations whose interaction graph is connected.

    The universe is every set of ``N`` distinct initial modes on sites
    ``[0, 2T]`` with the first at site 0, restricted to sets where the
    parity condition links all particles.  For ``N = 2`` the result is
    empty; for ``N = 3`` the non-interacting pair can collide.

    Raises
    ------
    ResourceCapError
        For ``T > 8`` or ``N`` outside ``{2, 3}``.
    """
    if N not in (2, 3):
        raise ResourceCapError("Pauli search supports N = 2 and N = 3")
    if T < 1 or T > JOINT_T_CAP:
        raise ResourceCapError(f"Pauli search is capped at T = {JOINT_T_CAP}")
    modes = [(x, a) for x in range(0, 2 * T + 1) for a in (0, 1)]
    out = []
    for cfg in itertools.combinations(modes, N):
        if cfg[0][0] != 0 or not _connected(cfg):
            continue
        for i, j in itertools.combinations(range(N), 2):
            for t, v, bi, bj in _colocations(*cfg[i], *cfg[j], T):
                if bi != bj:
                    continue
                paths = tuple(
                    _path_through(*cfg[k], T, v, t) if k in (i, j) else _path_through(*cfg[k], T, cfg[k][0], 0)
                    for k in range(N)
                )
                out.append(PauliViolation(tuple(cfg), (i, j), v, t, bi, paths))
                if first_only:
                    return out
    return out


def run_all(T_max: Optional[int] = None) -> list[LemmaReport]:
    """Every check at its default cap, or at ``min(cap, T_max)``."""

    def cap(c):
        return c if T_max is None else min(c, T_max)

    return [
        check_permutation_lemma(cap(EXHAUSTIVE_T_CAP)),
        check_weight_lemma(cap(EXHAUSTIVE_T_CAP)),
        check_unique_internal_state(cap(EXHAUSTIVE_T_CAP)),
        check_parity_condition(cap(EXHAUSTIVE_T_CAP)),
        check_distinguishability(cap(EXHAUSTIVE_T_CAP)),
        check_sign_flip(cap(JOINT_T_CAP)),
        check_interaction_parity(cap(JOINT_T_CAP)),
        check_three_particle_lemma(cap(6)),
        check_relative_position_table(),
    ]
