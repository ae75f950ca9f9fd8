"""Frame schedulers over a weighted state set and their smoothness metrics.

Weights are exact rationals over the frame size F, and the schedulers run on
exact arithmetic so finish-time ties are decided deterministically (lowest
state index wins every tie; this single rule reproduces all the worked
traces this module is validated against).  Smoothness uses base-2 logs, and
inter-state / inter-token times are measured circularly around the frame so
they always sum to F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .pathswitch import CapacityMatrix

__all__ = [
    "WeightSet",
    "FrameSequence",
    "SmoothnessReport",
    "Wf2qTrace",
    "TokenGrid",
    "TwoDimReport",
    "schedule_wfq",
    "schedule_wf2q",
    "wf2q_trace",
    "schedule_hurr",
    "schedule_random",
    "smoothness",
    "entropy",
    "random_sequence_smoothness",
    "expected_random_smoothness_gap",
    "grid_from_schedule",
    "smoothness_2d",
    "entropy_2d",
]


@dataclass(frozen=True)
class WeightSet:
    """State weights phi_1..phi_K: positive rationals summing to one, each an
    integer multiple of 1/F for the common frame size F."""

    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.weights:
            raise PreconditionError("need at least one weight")
        if any(w <= 0 for w in self.weights):
            raise PreconditionError("weights must be positive")
        if sum(self.weights) != 1:
            raise PreconditionError("weights must sum to one")

    @classmethod
    def of(cls, *values) -> "WeightSet":
        """Build from ints/strings/Fractions; '0.1' parses exactly."""
        return cls(tuple(Fraction(v) for v in values))

    @property
    def frame_size(self) -> int:
        return math.lcm(*(w.denominator for w in self.weights))

    @property
    def counts(self) -> tuple[int, ...]:
        f = self.frame_size
        return tuple(int(w * f) for w in self.weights)

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class FrameSequence:
    """One frame: slot t holds the index of the state served there."""

    slots: tuple[int, ...]

    def occurrences(self, state: int) -> list[int]:
        return [t for t, s in enumerate(self.slots) if s == state]

    def interstate_times(self, state: int) -> list[int]:
        """Circular gaps between consecutive occurrences; they sum to F."""
        pos = self.occurrences(state)
        if not pos:
            return []
        f = len(self.slots)
        return [pos[i + 1] - pos[i] for i in range(len(pos) - 1)] + [f - pos[-1] + pos[0]]


def _check_frame(seq: FrameSequence, weights: WeightSet) -> None:
    counts = weights.counts
    if len(seq.slots) != weights.frame_size:
        raise DomainError("sequence length differs from the frame size")
    seen = [0] * len(weights)
    for s in seq.slots:
        if not 0 <= s < len(weights):
            raise DomainError(f"slot holds unknown state {s}")
        seen[s] += 1
    if tuple(seen) != counts:
        raise DomainError(f"state counts {seen} do not match weights {counts}")


def _wfq_order(weights: Sequence[Fraction], slots: int) -> list[int]:
    """Virtual-finish-time scheduling core shared by WFQ and the tree
    scheduler: start each state at finish 1/phi, serve the smallest finish
    time (lowest index on ties), then push it by 1/phi."""
    finish = [Fraction(1, 1) / w for w in weights]
    out = []
    for _ in range(slots):
        pick = min(range(len(weights)), key=lambda i: (finish[i], i))
        out.append(pick)
        finish[pick] += 1 / weights[pick]
    return out


def schedule_wfq(weights: WeightSet) -> FrameSequence:
    """Weighted fair queueing over one frame."""
    return FrameSequence(tuple(_wfq_order(weights.weights, weights.frame_size)))


@dataclass(frozen=True)
class Wf2qTrace:
    """Per-slot record: finish times entering the slot, the qualified set,
    and the chosen state."""

    finish: tuple[Fraction, ...]
    qualified: tuple[int, ...]
    selection: int


def _wf2q(weights: WeightSet) -> tuple[list[int], list[Wf2qTrace]]:
    phis = weights.weights
    f = weights.frame_size
    finish = [Fraction(1, 1) / w for w in phis]
    served = [0] * len(phis)
    seq: list[int] = []
    traces: list[Wf2qTrace] = []
    for tau in range(1, f + 1):
        qualified = tuple(i for i, w in enumerate(phis) if served[i] < tau * w)
        if not qualified:  # pragma: no cover - impossible for valid weights
            raise AssertionError("no state qualified; weights malformed")
        pick = min(qualified, key=lambda i: (finish[i], i))
        traces.append(Wf2qTrace(tuple(finish), qualified, pick))
        seq.append(pick)
        served[pick] += 1
        finish[pick] += 1 / phis[pick]
    return seq, traces


def schedule_wf2q(weights: WeightSet) -> FrameSequence:
    """WFQ restricted per slot tau to states whose service so far is below
    tau * phi (the states already started in the fluid reference system)."""
    seq, _ = _wf2q(weights)
    return FrameSequence(tuple(seq))


def wf2q_trace(weights: WeightSet) -> list[Wf2qTrace]:
    return _wf2q(weights)[1]


class _HuffNode:
    __slots__ = ("weight", "min_leaf", "state", "children")

    def __init__(self, weight: Fraction, min_leaf: int, state: int | None = None,
                 children: tuple["_HuffNode", "_HuffNode"] | None = None):
        self.weight = weight
        self.min_leaf = min_leaf
        self.state = state
        self.children = children


def schedule_hurr(weights: WeightSet) -> FrameSequence:
    """Huffman round robin: merge the two lightest states into a tree (ties
    by lowest contained state index), then expand the frame top-down by
    running two-state WFQ over each intermediate symbol's occurrences and
    substituting in place."""
    if len(weights) < 2:
        raise DomainError("tree scheduling needs at least two states")
    nodes = [_HuffNode(w, i, state=i) for i, w in enumerate(weights.weights)]
    while len(nodes) > 1:
        nodes.sort(key=lambda nd: (nd.weight, nd.min_leaf))
        a, b = nodes[0], nodes[1]
        left, right = (a, b) if a.min_leaf < b.min_leaf else (b, a)
        merged = _HuffNode(a.weight + b.weight, left.min_leaf, children=(left, right))
        nodes = [merged] + nodes[2:]
    root = nodes[0]
    seq: list[_HuffNode] = [root] * weights.frame_size
    while True:
        targets = [nd for nd in seq if nd.children is not None]
        if not targets:
            break
        node = targets[0]
        count = sum(1 for nd in seq if nd is node)
        left, right = node.children
        total = left.weight + right.weight
        order = _wfq_order([left.weight / total, right.weight / total], count)
        replacement = iter(left if pick == 0 else right for pick in order)
        seq = [next(replacement) if nd is node else nd for nd in seq]
    return FrameSequence(tuple(nd.state for nd in seq))


def schedule_random(weights: WeightSet, slots: int, seed: int = 0) -> list[int]:
    """Memoryless scheduling: each slot draws a state i.i.d. with the given
    probabilities.  No frame structure is kept."""
    if slots < 1:
        raise DomainError("need at least one slot")
    rng = np.random.default_rng(seed)
    probs = [float(w) for w in weights.weights]
    return rng.choice(len(probs), size=slots, p=probs).tolist()


@dataclass(frozen=True)
class SmoothnessReport:
    """Per-state and average log-RMS interstate times (bits), with the
    entropy floor and the Kraft sum of the per-state values."""

    per_state: tuple[float, ...]
    average: float
    entropy: float
    kraft_sum: float


def entropy(weights: WeightSet) -> float:
    """Base-2 entropy of the weight distribution."""
    return -sum(float(w) * math.log2(float(w)) for w in weights.weights)


def smoothness(seq: FrameSequence, weights: WeightSet) -> SmoothnessReport:
    """Smoothness of a frame: per state, log2 of the RMS circular interstate
    time; averaged with the state weights.  Kraft sum <= 1 and average >=
    entropy for every valid frame, with equality exactly at constant gaps
    1/phi."""
    _check_frame(seq, weights)
    per = []
    for i, w in enumerate(weights.weights):
        gaps = seq.interstate_times(i)
        mean_sq = sum(g * g for g in gaps) / len(gaps)
        per.append(0.5 * math.log2(mean_sq))
    avg = sum(float(w) * l for w, l in zip(weights.weights, per))
    kraft = sum(2.0 ** (-l) for l in per)
    return SmoothnessReport(
        per_state=tuple(per), average=avg, entropy=entropy(weights), kraft_sum=kraft
    )


def random_sequence_smoothness(seq: Sequence[int], weights: WeightSet) -> float:
    """Empirical smoothness of an unframed sequence: consecutive
    inter-occurrence gaps are the samples, weighted by the nominal phis."""
    total = 0.0
    arr = np.asarray(seq)
    for i, w in enumerate(weights.weights):
        pos = np.nonzero(arr == i)[0]
        if pos.size < 2:
            raise DomainError(f"state {i} occurs too rarely to estimate")
        gaps = np.diff(pos).astype(float)
        total += float(w) * 0.5 * math.log2(float((gaps**2).mean()))
    return total


def expected_random_smoothness_gap(weights: WeightSet) -> float:
    """Analytic excess of memoryless scheduling over the entropy floor:
    (1/2) sum phi_i log2(2 - phi_i), always below 1/2."""
    return 0.5 * sum(float(w) * math.log2(2.0 - float(w)) for w in weights.weights)


# --- two-dimensional (token grid) smoothness --------------------------------

@dataclass(frozen=True)
class TokenGrid:
    """Frame of granted connections: cell (output j, slot t) lists the input
    modules holding a token there (repeats allowed when several central
    modules serve the same virtual path in one slot)."""

    cells: tuple[tuple[tuple[int, ...], ...], ...]  # [output][slot] -> inputs
    n_inputs: int

    @property
    def n_outputs(self) -> int:
        return len(self.cells)

    @property
    def frame_size(self) -> int:
        return len(self.cells[0])

    def token_slots(self, inp: int, out: int) -> list[int]:
        """Slots holding a token of path (inp, out), with multiplicity."""
        out_row = self.cells[out]
        slots: list[int] = []
        for t, cell in enumerate(out_row):
            slots.extend(t for v in cell if v == inp)
        return slots

    def token_counts(self) -> np.ndarray:
        counts = np.zeros((self.n_inputs, self.n_outputs), dtype=np.int64)
        for j, row in enumerate(self.cells):
            for cell in row:
                for i in cell:
                    counts[i, j] += 1
        return counts

    def to_text(self, symbols: str = "abcdefghijklmnopqrstuvwxyz") -> str:
        lines = []
        for row in self.cells:
            lines.append(" ".join("".join(symbols[i] for i in cell) or "-" for cell in row))
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, symbols: str = "abcdefghijklmnopqrstuvwxyz") -> "TokenGrid":
        rows = []
        n_inputs = 0
        for line in text.strip().splitlines():
            cells = []
            for token in line.split():
                if token == "-":
                    cells.append(())
                else:
                    ids = tuple(symbols.index(ch) for ch in token)
                    n_inputs = max(n_inputs, max(ids) + 1)
                    cells.append(ids)
            rows.append(tuple(cells))
        if len({len(r) for r in rows}) != 1:
            raise PreconditionError("grid rows must share one frame size")
        return cls(cells=tuple(rows), n_inputs=n_inputs)


def grid_from_schedule(patterns: Iterable[np.ndarray]) -> TokenGrid:
    """Token grid of a frame of connection patterns.

    Each slot pattern is a nonnegative integer matrix whose rows are inputs
    and columns outputs, with every line summing to the same m (a sum of m
    permutation matrices); entry (i, j) grants that many tokens to the path.
    """
    mats = [np.asarray(p, dtype=np.int64) for p in patterns]
    if not mats:
        raise DomainError("schedule holds no slots")
    k = mats[0].shape[0]
    m = int(mats[0].sum(axis=0)[0])
    for p in mats:
        if p.shape != (k, k) or (p < 0).any():
            raise PreconditionError("patterns must be square and nonnegative")
        if (p.sum(axis=0) != m).any() or (p.sum(axis=1) != m).any():
            raise PreconditionError("pattern line sums must equal the module count")
    cells = tuple(
        tuple(
            tuple(i for i in range(k) for _ in range(int(p[i, j])))
            for p in mats
        )
        for j in range(k)
    )
    return TokenGrid(cells=cells, n_inputs=k)


@dataclass(frozen=True)
class TwoDimReport:
    """Per-path, per-module and total smoothness of a token grid."""

    path: np.ndarray  # d[i, j]; zero where the path holds no tokens
    input_smoothness: np.ndarray
    output_smoothness: np.ndarray
    total: float
    kraft_matrix: np.ndarray


def _circular_gaps(slots: list[int], frame: int) -> list[int]:
    gaps = [slots[a + 1] - slots[a] for a in range(len(slots) - 1)]
    gaps.append(frame - slots[-1] + slots[0])
    return gaps


def smoothness_2d(grid: TokenGrid, capacity: CapacityMatrix | None = None) -> TwoDimReport:
    """Two-dimensional smoothness of a token grid.

    Path weights are the token rates n_ij / F (checked against ``capacity``
    when given).  d_ij is the log-RMS circular inter-token time of the path,
    with zero gaps allowed for multi-token slots; module smoothness weights
    d_ij by the rates, and the Kraft matrix 2^-d is doubly sub-stochastic
    for a doubly stochastic rate matrix.
    """
    f = grid.frame_size
    counts = grid.token_counts()
    if capacity is not None:
        expected = capacity.scaled_int() * (f // capacity.frame_size) if f % capacity.frame_size == 0 else None
        if expected is None or (counts != expected).any():
            raise DomainError("token counts disagree with the capacity matrix")
    ni, no = counts.shape
    d = np.zeros((ni, no))
    kraft = np.zeros((ni, no))
    for i in range(ni):
        for j in range(no):
            if counts[i, j] == 0:
                continue
            gaps = _circular_gaps(grid.token_slots(i, j), f)
            mean_sq = sum(g * g for g in gaps) / len(gaps)
            d[i, j] = 0.5 * math.log2(mean_sq)
            kraft[i, j] = mean_sq**-0.5
    rates = counts / f
    input_s = (rates * d).sum(axis=1)
    output_s = (rates * d).sum(axis=0)
    return TwoDimReport(
        path=d,
        input_smoothness=input_s,
        output_smoothness=output_s,
        total=float((rates * d).sum()),
        kraft_matrix=kraft,
    )


def entropy_2d(capacity) -> tuple[np.ndarray, np.ndarray, float]:
    """Input-module entropies, output-module entropies and their common sum
    for a doubly stochastic rate matrix (a CapacityMatrix is normalized by
    its module count first).  Base 2; 0 log 0 counts as 0."""
    if isinstance(capacity, CapacityMatrix):
        c = capacity.as_float() / capacity.modules
    else:
        c = np.asarray(capacity, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DomainError("rate matrix must be square")
    if not (np.allclose(c.sum(axis=0), 1.0, atol=1e-9) and np.allclose(c.sum(axis=1), 1.0, atol=1e-9)):
        raise DomainError("rate matrix must be doubly stochastic")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(c > 0, -c * np.log2(np.where(c > 0, c, 1.0)), 0.0)
    h_in = terms.sum(axis=1)
    h_out = terms.sum(axis=0)
    return h_in, h_out, float(terms.sum())
