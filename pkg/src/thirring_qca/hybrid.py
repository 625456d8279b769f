"""Two-particle evolution at fixed total momentum.

Translation invariance in the centre of mass lets the two-particle step act
on states ``e^{ip(x1 + x2)} f_{a1 a2}(x1 - x2)``.  For each ``p`` the step is
a banded operator on ``C^4 (x) l^2(Z)`` in the relative coordinate ``y``,
with internal basis ``RR, RL, LR, LL`` (index ``2 a1 + a2``).  Truncating
``|y| <= Y`` gives a finite matrix whose localized unit-modulus eigenpairs
are bound states.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import WalkParams
from .errors import ConfigurationError, SingularParameterError
from .sector import SectorState

__all__ = [
    "HybridOperator",
    "build_hybrid_operator",
    "hybrid_state",
    "position_state",
    "hybrid_position_mismatch",
    "antisymmetric_isometry",
    "BoundState",
    "bound_state_scan",
    "default_p_grid",
    "write_bound_state_csv",
]


@dataclass(frozen=True)
class HybridOperator:
    """Truncated ``U_2(chi, p)`` on ``|y| <= Y``; component ``(s, y)`` at ``s*(2Y+1) + y + Y``."""

    p: float
    Y: int
    matrix: np.ndarray
    params: WalkParams
    verbatim: bool = False

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index(self, s: int, y: int) -> int:
        return s * (2 * self.Y + 1) + y + self.Y

    def interior_unitarity_defect(self, margin: int = 2) -> float:
        """Max deviation of ``U^dag U`` from the identity on rows with ``|y| <= Y - margin``."""
        d = 2 * self.Y + 1
        keep = [s * d + y + self.Y for s in range(4) for y in range(-self.Y + margin, self.Y - margin + 1)]
        G = self.matrix.conj().T @ self.matrix
        sub = G[np.ix_(keep, keep)]
        return float(np.abs(sub - np.eye(len(keep))).max())


def build_hybrid_operator(p: float, params: WalkParams, Y: int,
                          verbatim: bool = False) -> HybridOperator:
    """Assemble ``W^h(p) J^h(chi)`` on the truncated relative coordinate.

    ``T_y`` is the right shift ``(T_y f)(y) = f(y - 1)``.  The free step of
    two particles has ``T_y`` in row ``RL``, column ``LL``.  ``verbatim=True``
    puts ``T_y^dagger`` there instead, a variant of the block layout that
    breaks the match with position space and is kept for comparison.

    Raises
    ------
    SingularParameterError
        If ``m`` or ``n`` is zero, since the blocks divide by both.
    ConfigurationError
        For ``Y < 4``.
    """
    m, n = params.m, params.n
    if m == 0.0 or n == 0.0:
        raise SingularParameterError("hybrid blocks divide by m and n")
    if Y < 4:
        raise ConfigurationError("truncation radius must be at least 4")
    d = 2 * Y + 1
    I = np.eye(d)
    Ty = np.eye(d, k=-1)
    Td = Ty.T
    ep, em = np.exp(1j * p), np.exp(-1j * p)
    rl_ll = Td if verbatim else Ty
    blocks = [
        [(n / m) * em**2 * I, 1j * em * Ty, 1j * em * Td, -(m / n) * I],
        [1j * em * Ty, (n / m) * Ty @ Ty, -(m / n) * I, 1j * ep * rl_ll],
        [1j * em * Td, -(m / n) * I, (n / m) * Td @ Td, 1j * ep * Td],
        [-(m / n) * I, 1j * ep * Ty, 1j * ep * Td, (n / m) * ep**2 * I],
    ]
    W = m * n * np.block(blocks)
    J = np.ones(4 * d, dtype=complex)
    J[1 * d + Y] = np.exp(1j * params.chi)
    J[2 * d + Y] = np.exp(1j * params.chi)
    return HybridOperator(float(p), Y, W * J[None, :], params, verbatim)


# -- position-space correspondence --------------------------------------------

def _relative(y: int, L: int) -> int:
    y %= L
    return y - L if y > L // 2 else y


def position_state(f: np.ndarray, p: float, ring_size: int) -> SectorState:
    """Antisymmetric ring state ``psi(x1 a1, x2 a2) = e^{ip(x1+x2)} f_{a1 a2}(x1 - x2)``.

    ``f`` has shape ``(4, 2Y+1)``; ``p`` must be a multiple of ``2 pi / L``
    and ``f`` must be antisymmetric, ``f_{ab}(y) = -f_{ba}(-y)``.
    """
    L = ring_size
    Y = (f.shape[1] - 1) // 2
    if 2 * Y + 1 > L:
        raise ConfigurationError("relative support wider than the ring")
    amps = {}
    for x1 in range(L):
        for x2 in range(L):
            y = _relative(x1 - x2, L)
            if abs(y) > Y:
                continue
            for a1 in (0, 1):
                for a2 in (0, 1):
                    if (x1, a1) >= (x2, a2):
                        continue
                    v = f[2 * a1 + a2, y + Y]
                    if v != 0:
                        amps[((x1, a1), (x2, a2))] = np.sqrt(2) * np.exp(1j * p * (x1 + x2)) * v
    return SectorState(2, L, amps)


def hybrid_state(state: SectorState, p: float, Y: int, anchor: int = 0) -> np.ndarray:
    """Read ``f`` back from a ring state, dividing out the momentum phase at ``x2 = anchor``."""
    f = np.zeros((4, 2 * Y + 1), dtype=complex)
    L = state.ring_size
    for y in range(-Y, Y + 1):
        x1, x2 = (anchor + y) % L, anchor % L
        for a1 in (0, 1):
            for a2 in (0, 1):
                if (x1, a1) == (x2, a2):
                    continue
                amp = state.amplitude([(x1, a1), (x2, a2)]) / np.sqrt(2)
                f[2 * a1 + a2, y + Y] = amp * np.exp(-1j * p * (x1 + x2))
    return f


def hybrid_position_mismatch(p_index: int, params: WalkParams, ring_size: int = 24,
                             steps: int = 3, Y: int = 4, seed: int = 0,
                             verbatim: bool = False) -> float:
    """Max difference between hybrid and ring evolution of a random antisymmetric ``f``.

    The momentum is ``p = 2 pi p_index / L``.  ``f`` is supported on
    ``|y| <= Y`` and the hybrid operator is built with radius ``Y + steps``
    so no truncation effect enters.
    """
    from .thirring import evolve

    L = ring_size
    R = Y + steps
    if 2 * R + 1 > L:
        raise ConfigurationError("ring too small for the chosen support and steps")
    p = 2 * np.pi * p_index / L
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(4, 2 * Y + 1)) + 1j * rng.normal(size=(4, 2 * Y + 1))
    f = np.zeros((4, 2 * R + 1), dtype=complex)
    for s in range(4):
        a1, a2 = divmod(s, 2)
        for y in range(-Y, Y + 1):
            f[s, y + R] = g[s, y + Y] - g[2 * a2 + a1, -y + Y]
    f /= np.linalg.norm(f)
    H = build_hybrid_operator(p, params, R, verbatim=verbatim)
    vec = f.ravel()
    for _ in range(steps):
        vec = H.matrix @ vec
    f_h = vec.reshape(4, 2 * R + 1)
    state = evolve(position_state(f, p, L), params, steps, allow_wrap=True)
    f_x = hybrid_state(state, p, R)
    return float(np.abs(f_h - f_x).max())


# -- bound states ----------------------------------------------------------------

def antisymmetric_isometry(Y: int) -> sp.csr_matrix:
    """Columns spanning antisymmetric ``f``: ``f_{ab}(y) = -f_{ba}(-y)``."""
    d = 2 * Y + 1
    rows, cols, vals = [], [], []
    c = 0
    h = 1 / np.sqrt(2)

    def add(s1, y1, s2, y2):
        nonlocal c
        rows.extend([s1 * d + y1 + Y, s2 * d + y2 + Y])
        cols.extend([c, c])
        vals.extend([h, -h])
        c += 1

    for y in range(1, Y + 1):
        add(0, y, 0, -y)
        add(3, y, 3, -y)
    for y in range(-Y, Y + 1):
        add(1, y, 2, -y)
    return sp.csr_matrix((vals, (rows, cols)), shape=(4 * d, c))


@dataclass(frozen=True)
class BoundState:
    p: float
    omega: float
    loc_length: float
    residual: float
    boundary: float
    stability: Optional[float] = None

    def as_row(self) -> tuple:
        return (self.p, self.omega, self.loc_length, self.residual)


def default_p_grid(points: int = 64) -> np.ndarray:
    return -np.pi + 2 * np.pi * np.arange(points) / points


def _profile(vec: np.ndarray, Y: int) -> np.ndarray:
    """``max_s |f_s(y)|`` as a function of ``|y|``, ``0..Y``."""
    amp = np.abs(vec.reshape(4, 2 * Y + 1)).max(axis=0)
    return np.maximum(amp[Y:], amp[Y::-1])


def _loc_length(profile: np.ndarray, floor: float = 1e-13) -> float:
    """Decay length from a least-squares slope of ``log |f|`` over the outer half of the support.

    The support is where the profile exceeds ``floor`` times its maximum, so
    round-off tails do not enter the fit.
    """
    mask = profile > floor * profile.max()
    ys = np.nonzero(mask)[0]
    if len(ys) < 4:
        return 0.0
    lo = ys[len(ys) // 2]
    sel = ys[ys >= lo]
    slope = np.polyfit(sel, np.log(profile[sel]), 1)[0]
    return float(-1.0 / slope) if slope < 0 else float("inf")


def _localized_in_cluster(vecs: np.ndarray, Y: int, edge: int) -> list[np.ndarray]:
    """Combinations of a degenerate eigenvector cluster that vanish near ``|y| = Y``."""
    d = 2 * Y + 1
    rows = [s * d + y + Y for s in range(4)
            for y in list(range(-Y, -Y + edge)) + list(range(Y - edge + 1, Y + 1))]
    Q, _ = np.linalg.qr(vecs)
    B = Q[rows, :]
    _, sv, vh = np.linalg.svd(B)
    sv = np.concatenate([sv, np.zeros(Q.shape[1] - len(sv))])
    N = np.column_stack([Q @ vh[i].conj() for i in range(Q.shape[1]) if sv[i] < 1e-6]
                        or [np.zeros(Q.shape[0])])
    if not N.any():
        return []
    # diagonalize |y| inside the subspace to get the most compact combinations
    absy = np.tile(np.abs(np.arange(-Y, Y + 1)), 4).astype(float)
    _, rot = np.linalg.eigh(N.conj().T @ (absy[:, None] * N))
    N = N @ rot
    return [N[:, i] for i in range(N.shape[1])]


def _clusters(w: np.ndarray, tol: float) -> list[np.ndarray]:
    """Index groups of eigenvalues closer than ``tol`` after sorting by phase."""
    order = np.argsort(np.angle(w))
    groups, i = [], 0
    while i < len(order):
        j = i + 1
        while j < len(order) and abs(w[order[j]] - w[order[i]]) < tol:
            j += 1
        groups.append(order[i:j])
        i = j
    return groups


def _scan_one(p: float, params: WalkParams, Y: int, unit_tol: float, boundary_tol: float,
              edge: int, cluster_tol: float, sparse_max: int = 8) -> list[BoundState]:
    H = build_hybrid_operator(p, params, Y)
    V = antisymmetric_isometry(Y)
    A = V.T @ (H.matrix @ V.toarray())
    w = la.eigvals(A)
    groups = [g for g in _clusters(w, cluster_tol) if abs(abs(w[g].mean()) - 1) < unit_tol]
    if not groups:
        return []
    if max(len(g) for g in groups) > sparse_max:
        # Flat bands: take full eigenvectors once.
        w, vecs = la.eig(A)
        groups = [g for g in _clusters(w, cluster_tol) if abs(abs(w[g].mean()) - 1) < unit_tol]
        blocks = [(w[g].mean(), V @ vecs[:, g]) for g in groups]
    else:
        As = sp.csc_matrix(A)
        blocks = []
        for g in groups:
            lam = w[g].mean()
            _, vecs = spla.eigs(As, k=len(g), sigma=lam * (1 + 1e-9))
            blocks.append((lam, V @ vecs))
    found = []
    for lam, vecs in blocks:
        cands = [vecs[:, 0]] if vecs.shape[1] == 1 else _localized_in_cluster(vecs, Y, edge)
        for v in cands:
            v = v / np.linalg.norm(v)
            prof = _profile(v, Y)
            bnd = float(prof[-edge:].max())
            if bnd < boundary_tol:
                res = float(np.linalg.norm(H.matrix @ v - lam * v))
                found.append(BoundState(float(p), float(np.angle(lam)),
                                        _loc_length(prof), res, bnd))
    return found


def _refine_phase(p: float, params: WalkParams, Y: int, omega: float) -> float:
    """Eigenphase nearest ``omega`` of the antisymmetric operator at radius ``Y``."""
    H = sp.csr_matrix(build_hybrid_operator(p, params, Y).matrix)
    V = antisymmetric_isometry(Y)
    A = (V.T @ H @ V).tocsc()
    sigma = np.exp(1j * omega)
    vals = spla.eigs(A, k=1, sigma=sigma, return_eigenvectors=False)
    return float(np.angle(vals[0]))


def bound_state_scan(p_grid: Sequence[float], params: WalkParams, Y: int = 200,
                     unit_tol: float = 1e-6, boundary_tol: float = 1e-8,
                     edge: int = 3, cluster_tol: float = 1e-9,
                     check_doubling: bool = False) -> list[BoundState]:
    """Localized unit-modulus antisymmetric eigenpairs of the truncated ``U_2(chi, p)``.

    An eigenvector counts as localized when its largest component within
    ``edge`` sites of ``|y| = Y`` is below ``boundary_tol`` (unit norm).
    Degenerate clusters are searched for localized combinations.  With
    ``check_doubling`` each state records the eigenphase shift found at
    radius ``2Y`` in ``stability``.
    """
    out = []
    for p in p_grid:
        refined: dict[float, float] = {}
        for st in _scan_one(float(p), params, Y, unit_tol, boundary_tol, edge, cluster_tol):
            if check_doubling:
                key = round(st.omega, 9)
                if key not in refined:
                    refined[key] = _refine_phase(st.p, params, 2 * Y, st.omega)
                om2 = refined[key]
                shift = abs(np.angle(np.exp(1j * (om2 - st.omega))))
                st = BoundState(st.p, st.omega, st.loc_length, st.residual, st.boundary, shift)
            out.append(st)
    return out


def write_bound_state_csv(states: Sequence[BoundState], fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "omega", "loc_length", "residual"])
    for s in states:
        w.writerow([f"{v:.17g}" for v in s.as_row()])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
