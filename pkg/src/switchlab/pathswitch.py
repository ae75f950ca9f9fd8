"""Path switching: capacity allocation over virtual paths, decomposition of
the capacity matrix into frames of connection patterns, and sum-preserving
round-off to a fixed frame size.

Capacity matrices are exact rationals over a common frame denominator F so
that the reconstruction identity sum(phi_i * P_i) == C can serve as a test
oracle; the allocation heuristic itself works in floating point (its
iterates are irrational) and is quantized afterwards by
:func:`bandlimit_and_round`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .closmodel import ClosSpec
from .errors import ConvergenceError, DomainError, PreconditionError
from .matching import BipartiteGraph, complete_matching

__all__ = [
    "TrafficMatrix",
    "CapacityMatrix",
    "Decomposition",
    "allocate_capacity",
    "weighted_delay",
    "bvn_decompose",
    "bandlimit_and_round",
    "optimal_delay_2x2",
]


@dataclass(frozen=True)
class TrafficMatrix:
    """Arrival rates (packets/slot) between input and output modules."""

    rates: tuple[tuple[float, ...], ...]
    spec: ClosSpec

    def __post_init__(self) -> None:
        k = self.spec.k
        if len(self.rates) != k or any(len(row) != k for row in self.rates):
            raise PreconditionError(f"traffic matrix must be {k}x{k}")
        if any(v < 0 for row in self.rates for v in row):
            raise PreconditionError("arrival rates must be nonnegative")
        arr = np.asarray(self.rates)
        limit = min(self.spec.n, self.spec.m)
        if arr.sum(axis=1).max() >= limit or arr.sum(axis=0).max() >= limit:
            raise PreconditionError(
                "row and column sums must stay below the module port count"
            )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rates, dtype=float)


class CapacityMatrix:
    """k x k rate matrix with exact rational entries over denominator F.

    F * C is an integer matrix whose every row and column sums to m * F,
    i.e. C is doubly stochastic scaled by the central module count m.
    """

    def __init__(self, entries: Sequence[Sequence[Fraction]], frame_size: int):
        if frame_size < 1:
            raise DomainError("frame size must be >= 1")
        k = len(entries)
        if any(len(row) != k for row in entries):
            raise PreconditionError("capacity matrix must be square")
        self.entries: tuple[tuple[Fraction, ...], ...] = tuple(
            tuple(Fraction(v) for v in row) for row in entries
        )
        self.frame_size = frame_size
        scaled = [[v * frame_size for v in row] for row in self.entries]
        if any(x.denominator != 1 for row in scaled for x in row):
            raise PreconditionError("entries times frame size must be integers")
        if any(x < 0 for row in scaled for x in row):
            raise PreconditionError("capacities must be nonnegative")
        row_sums = {sum(row) for row in scaled}
        col_sums = {sum(col) for col in zip(*scaled)}
        if len(row_sums) != 1 or row_sums != col_sums:
            raise PreconditionError("row and column sums must all be equal")
        total = row_sums.pop()
        if total % frame_size:
            raise PreconditionError("line sums must be an integer multiple of F")
        self.modules = int(total // frame_size)

    @classmethod
    def from_integer_matrix(cls, scaled: Sequence[Sequence[int]], frame_size: int) -> "CapacityMatrix":
        return cls(
            [[Fraction(int(v), frame_size) for v in row] for row in scaled], frame_size
        )

    @property
    def size(self) -> int:
        return len(self.entries)

    def scaled_int(self) -> np.ndarray:
        return np.array(
            [[int(v * self.frame_size) for v in row] for row in self.entries],
            dtype=np.int64,
        )

    def as_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CapacityMatrix) and self.entries == other.entries

    def __repr__(self) -> str:
        return f"CapacityMatrix(F={self.frame_size}, m={self.modules}, k={self.size})"


def allocate_capacity(
    traffic: TrafficMatrix,
    *,
    zero_floor: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
    with_history: bool = False,
):
    """Square-root-rule capacity allocation.

    Starting from C = rates, each iteration spreads every row's and column's
    slack (m minus its current sum) over the unsaturated entries in
    proportion to sqrt(rate), taking the smaller of the row and column
    offers.  Terminates when the residual slack is below ``tol * m * k``;
    every line sum then equals m to that tolerance and C > rates entrywise.

    Zero rates stall the iteration, so they are rejected unless
    ``zero_floor`` supplies the small epsilon rate to use instead.  Returns
    the float matrix (and the iterate history when ``with_history``).
    """
    lam = traffic.as_array()
    if (lam <= 0).any():
        if zero_floor is None:
            raise DomainError(
                "zero rates need an explicit zero_floor (or use strict positive input)"
            )
        lam = np.maximum(lam, zero_floor)
    m = traffic.spec.m
    k = traffic.spec.k
    cap = lam.copy()
    sq = np.sqrt(lam)
    history = [cap.copy()] if with_history else None
    slack_budget = tol * m * k
    for _ in range(max_iter):
        row_slack = m - cap.sum(axis=1)
        col_slack = m - cap.sum(axis=0)
        if row_slack.sum() <= slack_budget:
            break
        row_active = row_slack > slack_budget / k
        col_active = col_slack > slack_budget / k
        if not row_active.any() or not col_active.any():
            break
        w = sq * np.outer(row_active, col_active)
        row_den = w.sum(axis=1)
        col_den = w.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            row_offer = np.where(row_den[:, None] > 0, row_slack[:, None] * w / row_den[:, None], 0.0)
            col_offer = np.where(col_den[None, :] > 0, col_slack[None, :] * w / col_den[None, :], 0.0)
        inc = np.minimum(row_offer, col_offer)
        if inc.max() <= 0:
            break
        cap += inc
        if history is not None:
            history.append(cap.copy())
    else:
        raise ConvergenceError(
            f"allocation stalled with residual slack {float((m - cap.sum(axis=1)).sum()):.3e}"
        )
    residual = float((m - cap.sum(axis=1)).sum())
    if residual > slack_budget * 10:
        raise ConvergenceError(f"allocation stopped with slack {residual:.3e}")
    if with_history:
        return cap, history
    return cap


def weighted_delay(capacity, traffic: TrafficMatrix) -> float:
    """Total weighted M/M/1 delay  sum rate / (capacity - rate).

    ``capacity`` may be a float matrix or a :class:`CapacityMatrix`; every
    entry must strictly exceed the corresponding rate (stability).
    """
    cap = capacity.as_float() if isinstance(capacity, CapacityMatrix) else np.asarray(capacity, dtype=float)
    lam = traffic.as_array()
    gap = cap - lam
    loaded = lam > 0
    if (gap[loaded] <= 0).any() or (gap < 0).any():
        raise DomainError("unstable path: capacity must exceed the rate entrywise")
    return float((lam[loaded] / gap[loaded]).sum())


def optimal_delay_2x2(traffic: TrafficMatrix, *, iters: int = 200) -> float:
    """Numeric oracle: optimal weighted delay over all 2x2 allocations with
    line sums m, by golden-section search on the single free parameter."""
    lam = traffic.as_array()
    if lam.shape != (2, 2):
        raise DomainError("oracle is for 2x2 instances only")
    m = traffic.spec.m

    def delay(x: float) -> float:
        cap = np.array([[x, m - x], [m - x, x]])
        gap = cap - lam
        if (gap <= 0).any():
            return float("inf")
        return float((lam / gap).sum())

    lo = max(lam[0, 0], lam[1, 1])
    hi = m - max(lam[0, 1], lam[1, 0])
    if hi <= lo:
        raise DomainError("infeasible instance: no stable allocation exists")
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = delay(c), delay(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = delay(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = delay(d)
    return min(fc, fd)


@dataclass(frozen=True)
class Decomposition:
    """Frame expansion of a capacity matrix.

    ``permutations`` lists the m*F extracted permutation matrices in order;
    consecutive groups of m form the per-slot patterns, and ``states`` holds
    the distinct patterns with their rational frequencies.  ``frame`` maps
    each slot to its state index.
    """

    capacity: CapacityMatrix
    permutations: tuple[np.ndarray, ...]
    states: tuple[tuple[np.ndarray, Fraction], ...]
    frame: tuple[int, ...]

    @property
    def state_count(self) -> int:
        return len(self.states)

    def slot_patterns(self) -> list[np.ndarray]:
        return [self.states[i][0] for i in self.frame]

    def reconstruct(self) -> list[list[Fraction]]:
        """Exact weighted sum of the states; equals the capacity matrix."""
        k = self.capacity.size
        total = [[Fraction(0)] * k for _ in range(k)]
        for pattern, weight in self.states:
            for i in range(k):
                for j in range(k):
                    total[i][j] += weight * int(pattern[i, j])
        return total


def _extract_permutation(residual: np.ndarray) -> np.ndarray:
    """Perfect matching on the support of ``residual`` as a 0/1 matrix."""
    k = residual.shape[0]
    edges = [(i, j) for i in range(k) for j in range(k) if residual[i, j] > 0]
    res = complete_matching(BipartiteGraph.from_edges(k, k, edges))
    if not res.complete:
        raise PreconditionError("residual lost its perfect matching; sums not uniform?")
    perm = np.zeros((k, k), dtype=np.int64)
    for i, j in res.matching.items():
        perm[i, j] = 1
    return perm


def bvn_decompose(capacity: CapacityMatrix, modules: int | None = None) -> Decomposition:
    """Expand F*C into m*F permutation matrices by repeated matchings and
    group them m at a time into per-slot connection patterns.

    The grouping is extraction order; equal patterns collapse into states
    with weight multiplicity/F, so the state count never exceeds F (a
    minimal-state regrouping could do no worse than k^2 - 2k + 2).
    """
    m = capacity.modules if modules is None else modules
    if m != capacity.modules:
        raise PreconditionError(
            f"matrix line sums give m={capacity.modules}, caller said {m}"
        )
    f = capacity.frame_size
    residual = capacity.scaled_int().copy()
    perms: list[np.ndarray] = []
    while len(perms) < m * f:
        p = _extract_permutation(residual)
        # peel the matching at full multiplicity: identical slots stay
        # adjacent, which keeps the grouped state count small
        mult = min(int(residual[p > 0].min()), m * f - len(perms))
        residual -= mult * p
        perms.extend([p] * mult)
    if residual.any():  # pragma: no cover - exact arithmetic guarantees zero
        raise PreconditionError("decomposition left a nonzero residual")
    patterns = [sum(perms[m * t : m * (t + 1)]) for t in range(f)]
    states: list[tuple[np.ndarray, Fraction]] = []
    index: dict[bytes, int] = {}
    frame = []
    for g in patterns:
        key = g.tobytes()
        if key not in index:
            index[key] = len(states)
            states.append((g, Fraction(0)))
        frame.append(index[key])
    counts = [0] * len(states)
    for idx in frame:
        counts[idx] += 1
    states = [(g, Fraction(c, f)) for (g, _), c in zip(states, counts)]
    return Decomposition(
        capacity=capacity,
        permutations=tuple(perms),
        states=tuple(states),
        frame=tuple(frame),
    )


def _transportation_round(frac: np.ndarray, row_need: np.ndarray, col_need: np.ndarray) -> np.ndarray:
    """0/1 matrix with prescribed line sums, preferring large fractional
    parts: unit-capacity bipartite flow, augmenting in fraction order."""
    k = frac.shape[0]
    order = sorted(
        ((i, j) for i in range(k) for j in range(k)),
        key=lambda ij: -frac[ij[0], ij[1]],
    )
    x = np.zeros((k, k), dtype=np.int64)
    row_left = row_need.copy()
    col_left = col_need.copy()
    for i, j in order:
        if row_left[i] > 0 and col_left[j] > 0 and x[i, j] == 0:
            x[i, j] = 1
            row_left[i] -= 1
            col_left[j] -= 1
    # the greedy pass can strand demand; fix with augmenting paths on the
    # bipartite exchange graph (row with demand -> any j with x=0, then give
    # back j's unit from a row that can route elsewhere)
    while row_left.sum() > 0:
        start = int(np.argmax(row_left))
        # BFS over alternating add/remove moves
        parent: dict[tuple[str, int], tuple[str, int, int]] = {}
        frontier = [("r", start)]
        seen = {("r", start)}
        goal = None
        while frontier and goal is None:
            kind, node = frontier.pop(0)
            if kind == "r":
                for j in range(k):
                    if x[node, j] == 0 and ("c", j) not in seen:
                        parent[("c", j)] = ("r", node, 1)
                        if col_left[j] > 0:
                            goal = ("c", j)
                            break
                        seen.add(("c", j))
                        frontier.append(("c", j))
            else:
                for i in range(k):
                    if x[i, node] == 1 and ("r", i) not in seen:
                        parent[("r", i)] = ("c", node, 0)
                        seen.add(("r", i))
                        frontier.append(("r", i))
        if goal is None:
            raise PreconditionError("infeasible rounding: cannot preserve line sums")
        node = goal
        while node != ("r", start):
            pkind, pnode, put = parent[node]
            if put:
                x[pnode, node[1]] = 1
            else:
                x[node[1], pnode] = 0
            node = (pkind, pnode)
        row_left[start] -= 1
        col_left[goal[1]] -= 1
    return x


def bandlimit_and_round(capacity, f_target: int, *, modules: int | None = None):
    """Quantize a capacity matrix to denominator ``f_target`` while keeping
    every row and column sum at exactly m * f_target.

    ``capacity`` is a :class:`CapacityMatrix` or a float matrix (then
    ``modules`` must be given).  Entries move by less than one frame unit,
    so the reported maximum round-off error is at most 1/f_target.
    Returns ``(rounded CapacityMatrix, max_abs_error)``.
    """
    if f_target < 1:
        raise DomainError("target frame size must be >= 1")
    if isinstance(capacity, CapacityMatrix):
        cap = capacity.as_float()
        m = capacity.modules
        exact = [[v * f_target for v in row] for row in capacity.entries]
        if all(x.denominator == 1 for row in exact for x in row):
            rounded = CapacityMatrix.from_integer_matrix(
                [[int(x) for x in row] for row in exact], f_target
            )
            return rounded, 0.0
    else:
        if modules is None:
            raise DomainError("modules count required for a raw matrix")
        cap = np.asarray(capacity, dtype=float)
        m = modules
    k = cap.shape[0]
    target = cap * f_target
    base = np.floor(target + 1e-9).astype(np.int64)
    frac = target - base
    row_need = m * f_target - base.sum(axis=1)
    col_need = m * f_target - base.sum(axis=0)
    if (row_need < 0).any() or (col_need < 0).any() or row_need.sum() != col_need.sum():
        raise PreconditionError("input line sums are not m (cannot round)")
    extra = _transportation_round(frac, row_need, col_need)
    scaled = base + extra
    rounded = CapacityMatrix.from_integer_matrix(scaled.tolist(), f_target)
    err = float(np.abs(cap - scaled / f_target).max())
    return rounded, err
