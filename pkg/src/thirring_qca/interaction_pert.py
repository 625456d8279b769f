"""Expansion of the two-particle evolution in the number of interactions.

Writing each step as ``W J = W + W (J - I)`` and collecting the terms with
``k`` factors ``(J - I)`` gives::

    U^T = sum_k U^(k),
    U^(k) = sum_{alpha in A_k} W^{alpha_k} (J-I) ... W^{alpha_1} (J-I) W^{alpha_0}

with ``alpha_0 >= 0`` steps before the first interaction, every later
``alpha_i >= 1`` and ``sum alpha_i = T``.  Two independent routes are
provided: an operator product on the two-particle tensor space of a ring,
and a path sum over chains of space-time vertices glued by free
propagators.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .core import BinLabel, WalkParams
from .errors import ConfigurationError, ResourceCapError
from .free_walk import propagator_matrix, walk_matrix

__all__ = [
    "InteractionSchedule",
    "VertexChain",
    "compositions",
    "exchange_operator",
    "antisymmetric_projector",
    "internal_interaction",
    "TensorSpace",
    "order_k_operator",
    "order_k_operators",
    "full_operator",
    "amputated_matrix",
    "enumerate_vertex_chains",
    "order_k_amplitude_pathsum",
    "distinguishable_pathsum",
    "calibration_constant",
    "amplitude_table",
    "write_amplitude_csv",
    "CHAIN_T_CAP",
    "MAX_TENSOR_DIM",
]

CHAIN_T_CAP = 8
MAX_TENSOR_DIM = 20_000

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class InteractionSchedule:
    """Free-step counts ``(alpha_0, ..., alpha_k)`` between interactions."""

    alphas: tuple[int, ...]

    def __post_init__(self):
        if not self.alphas or any(a < 0 for a in self.alphas):
            raise ValueError(f"invalid schedule {self.alphas}")
        if any(a == 0 for a in self.alphas[1:]):
            raise ValueError("only alpha_0 may vanish")

    @property
    def k(self) -> int:
        return len(self.alphas) - 1

    @property
    def T(self) -> int:
        return sum(self.alphas)

    def interaction_times(self) -> tuple[int, ...]:
        """Times at which ``J - I`` acts (``0 <= t < T``)."""
        return tuple(itertools.accumulate(self.alphas[:-1]))


@dataclass(frozen=True)
class VertexChain:
    vertices: tuple[tuple[int, int], ...]

    @property
    def k(self) -> int:
        return len(self.vertices)


def compositions(T: int, k: int) -> list[InteractionSchedule]:
    """Every schedule of ``T`` steps with ``k`` interactions, lexicographically."""
    if k > T or k < 0:
        return []
    out = []
    for a0 in range(0, T - k + 1):
        for rest in _positive_compositions(T - a0, k):
            out.append(InteractionSchedule((a0, *rest)))
    return out


def _positive_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _positive_compositions(total - first, parts - 1):
            yield (first, *rest)


def exchange_operator() -> np.ndarray:
    """``E = (1/2) sum_i sigma_i (x) sigma_i``, the swap of two qubits."""
    return 0.5 * sum(np.kron(s, s) for s in _PAULI)


def antisymmetric_projector() -> np.ndarray:
    return 0.5 * (np.eye(4) - exchange_operator())


def internal_interaction(chi: float) -> np.ndarray:
    """``J - I`` on the internal space of two co-located particles."""
    return (np.exp(1j * chi) - 1) * np.diag([0, 1, 1, 0]).astype(complex)


# -- operator route ------------------------------------------------------------

@dataclass(frozen=True)
class TensorSpace:
    """Two distinguishable particles on a ring; index ``(2 x1 + a1) * 2L + 2 x2 + a2``."""

    ring_size: int

    @property
    def dim(self) -> int:
        return (2 * self.ring_size) ** 2

    def index(self, mode1, mode2) -> int:
        L = self.ring_size
        (x1, a1), (x2, a2) = mode1, mode2
        return (2 * (x1 % L) + a1) * 2 * L + 2 * (x2 % L) + a2

    def walk(self, params: WalkParams) -> sp.csr_matrix:
        W1 = sp.csr_matrix(walk_matrix(self.ring_size, params))
        return sp.kron(W1, W1, format="csr")

    def interaction_minus_identity(self, chi: float) -> sp.csr_matrix:
        L = self.ring_size
        diag = np.zeros(self.dim, dtype=complex)
        for x in range(L):
            diag[self.index((x, 0), (x, 1))] = np.exp(1j * chi) - 1
            diag[self.index((x, 1), (x, 0))] = np.exp(1j * chi) - 1
        return sp.diags(diag, format="csr")

    def exchange(self) -> sp.csr_matrix:
        n = 2 * self.ring_size
        perm = np.arange(n * n).reshape(n, n).T.ravel()
        return sp.csr_matrix((np.ones(n * n), (np.arange(n * n), perm)), shape=(n * n, n * n))

    def antisymmetric_vector(self, mode1, mode2) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(mode1, mode2)] += 1 / np.sqrt(2)
        v[self.index(mode2, mode1)] -= 1 / np.sqrt(2)
        return v


def _space(T: int, ring_size: Optional[int]) -> TensorSpace:
    L = 4 * T + 4 if ring_size is None else ring_size
    if (2 * L) ** 2 > MAX_TENSOR_DIM:
        raise ResourceCapError(f"tensor space of a {L}-site ring exceeds {MAX_TENSOR_DIM}")
    return TensorSpace(L)


def order_k_operator(T: int, k: int, params: WalkParams,
                     ring_size: Optional[int] = None) -> sp.csr_matrix:
    """``U^(k)`` as a sparse matrix, summed over the schedules of ``A_k``.

    ``k = 0`` gives ``W^T``.  The default ring has ``4T + 4`` sites, wide
    enough that no matrix element between sites in a window of width ``2T``
    wraps around.
    """
    if not 0 <= k <= T:
        raise ConfigurationError(f"need 0 <= k <= T, got k={k}, T={T}")
    space = _space(T, ring_size)
    W = space.walk(params)
    V = space.interaction_minus_identity(params.chi)
    powers = [sp.identity(space.dim, dtype=complex, format="csr")]
    for _ in range(T):
        powers.append((W @ powers[-1]).tocsr())
    total = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for sched in compositions(T, k):
        op = powers[sched.alphas[0]]
        for a in sched.alphas[1:]:
            op = powers[a] @ (V @ op)
        total = total + op
    return total.tocsr()


def order_k_operators(T: int, params: WalkParams,
                      ring_size: Optional[int] = None) -> list[sp.csr_matrix]:
    """All ``U^(k)``, ``k = 0..T``, by the recursion ``G_k <- W G_k + W V G_{k-1}``.

    Agrees with :func:`order_k_operator` term by term; it is the fast route
    used for exactness checks.
    """
    space = _space(T, ring_size)
    W = space.walk(params)
    V = space.interaction_minus_identity(params.chi)
    G = [sp.identity(space.dim, dtype=complex, format="csr")]
    for _ in range(T):
        nxt = [(W @ G[0]).tocsr()]
        for k in range(1, len(G)):
            nxt.append((W @ G[k] + W @ (V @ G[k - 1])).tocsr())
        nxt.append((W @ (V @ G[-1])).tocsr())
        G = nxt
    return G


def full_operator(T: int, params: WalkParams, ring_size: Optional[int] = None) -> sp.csr_matrix:
    """``(W J)^T`` on the same tensor space."""
    space = _space(T, ring_size)
    W = space.walk(params)
    J = space.interaction_minus_identity(params.chi) + sp.identity(space.dim, format="csr")
    U = sp.identity(space.dim, dtype=complex, format="csr")
    for _ in range(T):
        U = (W @ (J @ U)).tocsr()
    return U


# -- path-sum route ------------------------------------------------------------

def amputated_matrix(internal_labels: Sequence[tuple[BinLabel, BinLabel]], chi: float,
                     calibrated: bool = False) -> np.ndarray:
    """Internal-space matrix of a chain of ``k = len(internal_labels) + 1`` vertices.

    Verbatim form::

        (e^{i chi}-1)^k / 2^k  (I-E) D (I-E)  prod_n [(W_{i_n j_n} (x) W_{l_n m_n}) (I-E) D (I-E)]

    where ``D`` projects on opposite chiralities.  With ``calibrated=True``
    every vertex becomes ``P_A (J - I) P_A`` instead, the restriction of the
    interaction to the antisymmetric sector; the two differ by ``2^-k``.
    """
    I, E = np.eye(4), exchange_operator()
    k = len(internal_labels) + 1
    if calibrated:
        P = antisymmetric_projector()
        vertex = P @ internal_interaction(chi) @ P
        pref = 1.0
    else:
        vertex = (I - E) @ np.diag([0, 1, 1, 0]) @ (I - E)
        pref = (np.exp(1j * chi) - 1) ** k / 2**k
    out = vertex
    for l1, l2 in internal_labels:
        out = vertex @ np.kron(l1.matrix(), l2.matrix()) @ out
    return pref * out


def _in_region(z: int, t: int, ends, T: int) -> bool:
    x_in, y_in, x_out, y_out = ends
    return (abs(z - x_in) <= t and abs(z - y_in) <= t
            and abs(x_out - z) <= T - t and abs(y_out - z) <= T - t)


def enumerate_vertex_chains(x_in: int, y_in: int, x_out: int, y_out: int, T: int, k: int,
                            parity_filter: bool = False) -> list[VertexChain]:
    """Chains of ``k`` vertices ``(z, t)``, ``0 <= t < T``, inside the causal region.

    Every vertex must be reachable from both initial sites and able to
    reach both final sites; consecutive vertices must be causally connected.
    With ``parity_filter`` only chains whose length matches the relative
    order of the end points (odd if it changes) are kept.

    Raises
    ------
    ResourceCapError
        For ``T`` beyond :data:`CHAIN_T_CAP`.
    """
    if T > CHAIN_T_CAP:
        raise ResourceCapError(f"vertex enumeration capped at T={CHAIN_T_CAP}")
    if k < 1 or k > T:
        return []
    if parity_filter and x_in != y_in and x_out != y_out:
        swapped = (x_in < y_in) != (x_out < y_out)
        if swapped != (k % 2 == 1):
            return []
    ends = (x_in, y_in, x_out, y_out)
    slots = [
        [(z, t) for z in range(min(ends) - T, max(ends) + T + 1) if _in_region(z, t, ends, T)]
        for t in range(T)
    ]
    out = []

    def extend(chain, t_next):
        if len(chain) == k:
            out.append(VertexChain(tuple(chain)))
            return
        for t in range(t_next, T - (k - len(chain) - 1)):
            for z, _ in slots[t]:
                if chain:
                    z0, t0 = chain[-1]
                    if abs(z - z0) > t - t0:
                        continue
                chain.append((z, t))
                extend(chain, t + 1)
                chain.pop()

    extend([], 0)
    return out


def _pair_propagator(dx1: int, dx2: int, t: int, params: WalkParams) -> np.ndarray:
    return np.kron(propagator_matrix(dx1, t, params), propagator_matrix(dx2, t, params))


def distinguishable_pathsum(modes_in, modes_out, T: int, k: int, params: WalkParams,
                            chains: Optional[list[VertexChain]] = None) -> complex:
    """``<out1, out2| U^(k) |in1, in2>`` for distinguishable particles."""
    (x_in, a), (y_in, b) = modes_in
    (x_out, c), (y_out, d) = modes_out
    if chains is None:
        chains = enumerate_vertex_chains(x_in, y_in, x_out, y_out, T, k)
    V = internal_interaction(params.chi)
    e_in = np.zeros(4, dtype=complex)
    e_in[2 * a + b] = 1
    total = 0j
    for chain in chains:
        z, t = chain.vertices[0]
        vec = V @ (_pair_propagator(z - x_in, z - y_in, t, params) @ e_in)
        for z2, t2 in chain.vertices[1:]:
            vec = V @ (_pair_propagator(z2 - z, z2 - z, t2 - t, params) @ vec)
            z, t = z2, t2
        vec = _pair_propagator(x_out - z, y_out - z, T - t, params) @ vec
        total += vec[2 * c + d]
    return complex(total)


def order_k_amplitude_pathsum(modes_in, modes_out, T: int, k: int, params: WalkParams,
                              scheme: str = "calibrated") -> complex:
    """Antisymmetric matrix element of ``U^(k)`` from vertex chains.

    ``scheme="calibrated"`` propagates antisymmetrized boundary states
    through vertices ``P_A (J - I) P_A``.  ``scheme="verbatim"`` uses the
    amputated vertices of :func:`amputated_matrix` between product states
    and rescales by :func:`calibration_constant`.  ``k = 0`` is the free
    antisymmetrized product.
    """
    (x_in, a), (y_in, b) = modes_in
    (x_out, c), (y_out, d) = modes_out
    if k == 0:
        P = lambda u, v: _pair_propagator(u, v, T, params)  # noqa: E731
        direct = P(x_out - x_in, y_out - y_in)[2 * c + d, 2 * a + b]
        crossed = P(y_out - x_in, x_out - y_in)[2 * d + c, 2 * a + b]
        return complex(direct - crossed)
    # the causal region is symmetric in the final sites, so these chains
    # also serve the exchanged output
    chains = enumerate_vertex_chains(x_in, y_in, x_out, y_out, T, k)
    if scheme == "calibrated":
        P = antisymmetric_projector()
        vertex = P @ internal_interaction(params.chi) @ P
        scale = 1.0
    elif scheme == "verbatim":
        E = exchange_operator()
        vertex = (np.eye(4) - E) @ np.diag([0, 1, 1, 0]) @ (np.eye(4) - E)
        vertex = vertex * (np.exp(1j * params.chi) - 1) / 2
        scale = calibration_constant(k)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    total = 0j
    for chain in chains:
        total += _chain_element(chain, modes_in, modes_out, T, params, vertex, scheme)
    return complex(scale * total)


def _chain_element(chain, modes_in, modes_out, T, params, vertex, scheme) -> complex:
    (x_in, a), (y_in, b) = modes_in
    (x_out, c), (y_out, d) = modes_out
    z, t = chain.vertices[0]
    e_ab = np.zeros(4, dtype=complex)
    e_ab[2 * a + b] = 1
    e_ba = np.zeros(4, dtype=complex)
    e_ba[2 * b + a] = 1
    first = _pair_propagator(z - x_in, z - y_in, t, params) @ e_ab
    if scheme == "calibrated":
        first = (first - _pair_propagator(z - y_in, z - x_in, t, params) @ e_ba) / np.sqrt(2)
    vec = vertex @ first
    for z2, t2 in chain.vertices[1:]:
        vec = vertex @ (_pair_propagator(z2 - z, z2 - z, t2 - t, params) @ vec)
        z, t = z2, t2
    last = _pair_propagator(x_out - z, y_out - z, T - t, params) @ vec
    value = last[2 * c + d]
    if scheme == "calibrated":
        crossed = _pair_propagator(y_out - z, x_out - z, T - t, params) @ vec
        value = (value - crossed[2 * d + c]) / np.sqrt(2)
    return complex(value)


def calibration_constant(k: int) -> float:
    """Factor turning the verbatim product-state chain into the antisymmetric amplitude.

    Each verbatim vertex is twice ``P_A (J-I) P_A`` and product boundary
    states see half the antisymmetric amplitude, hence ``2^(1-k)``.
    """
    return 2.0 ** (1 - k)


# -- tables --------------------------------------------------------------------

def amplitude_table(modes_in, T: int, params: WalkParams, max_k: Optional[int] = None,
                    window: Optional[int] = None):
    """Rows ``(T, k, x_in, a, y_in, b, x_out, c, y_out, d, amplitude)``.

    Covers every ordered pair of distinct output modes inside the joint
    light cone, for ``k = 0 .. max_k``.
    """
    max_k = T if max_k is None else min(max_k, T)
    (x_in, a), (y_in, b) = modes_in
    lo, hi = min(x_in, y_in) - T, max(x_in, y_in) + T
    rows = []
    outs = [(x, s) for x in range(lo, hi + 1) for s in (0, 1)]
    for o1, o2 in itertools.combinations(outs, 2):
        if abs(o1[0] - x_in) > T or abs(o2[0] - y_in) > T:
            continue
        for k in range(max_k + 1):
            amp = order_k_amplitude_pathsum(modes_in, (o1, o2), T, k, params)
            if amp != 0:
                rows.append((T, k, x_in, a, y_in, b, o1[0], o1[1], o2[0], o2[1], amp))
    return rows


def write_amplitude_csv(rows, fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T", "k", "x_in", "a", "y_in", "b", "x_out", "c", "y_out", "d", "re", "im"])
    for *head, amp in rows:
        w.writerow([*head, f"{amp.real:.17g}", f"{amp.imag:.17g}"])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
