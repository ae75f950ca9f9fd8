"""Parity-check codes on bipartite constraint graphs and the sequential
flip decoder, plus a brute-force neighborhood-expansion checker.

Variables are left vertices, parity constraints right vertices.  A variable
flips only on a *strict* majority of unsatisfied neighbours (ties stay put),
which guarantees the unsatisfied count drops with every flip and the decoder
terminates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, PreconditionError, ResourceLimitError
from .matching import BipartiteGraph

__all__ = [
    "TannerCode",
    "DecodeResult",
    "ExpansionVerdict",
    "is_codeword",
    "flip_decode",
    "expansion_check",
]

_EXHAUSTIVE_LEFT_LIMIT = 20


@dataclass(frozen=True)
class TannerCode:
    """Binary linear code given by a 0/1 parity matrix (constraints x vars)."""

    parity: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        widths = {len(row) for row in self.parity}
        if len(widths) != 1:
            raise PreconditionError("parity rows must share one width")
        if any(bit not in (0, 1) for row in self.parity for bit in row):
            raise PreconditionError("parity entries must be 0/1")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "TannerCode":
        return cls(tuple(tuple(int(b) for b in row) for row in rows))

    @property
    def n_variables(self) -> int:
        return len(self.parity[0])

    @property
    def n_constraints(self) -> int:
        return len(self.parity)

    def graph(self) -> BipartiteGraph:
        """Incidence graph: variables on the left, constraints on the right."""
        edges = [
            (v, c)
            for c, row in enumerate(self.parity)
            for v, bit in enumerate(row)
            if bit
        ]
        return BipartiteGraph.from_edges(self.n_variables, self.n_constraints, edges)

    def constraints_of(self, v: int) -> list[int]:
        return [c for c, row in enumerate(self.parity) if row[v]]

    def syndrome(self, word: Sequence[int]) -> list[int]:
        if len(word) != self.n_variables:
            raise DomainError("word length does not match the code")
        return [sum(b * x for b, x in zip(row, word)) % 2 for row in self.parity]

    def enumerate_codewords(self) -> list[tuple[int, ...]]:
        """All codewords by exhaustive scan; exponential, so capped."""
        n = self.n_variables
        if n > 16:
            raise ResourceLimitError("codeword enumeration capped at 16 variables")
        words = []
        for bits in range(1 << n):
            w = tuple(bits >> i & 1 for i in range(n))
            if not any(self.syndrome(w)):
                words.append(w)
        return words


def is_codeword(code: TannerCode, word: Sequence[int]) -> bool:
    """True iff every constraint sums to zero mod 2."""
    return not any(code.syndrome(word))


@dataclass(frozen=True)
class DecodeResult:
    word: tuple[int, ...]
    success: bool
    flips: tuple[int, ...]  # variable flipped at each round
    unsatisfied_trace: tuple[int, ...]  # count before each flip, then final


def flip_decode(code: TannerCode, received: Sequence[int], max_rounds: int = 1000) -> DecodeResult:
    """Sequential flip decoding: while some variable sees strictly more
    unsatisfied than satisfied neighbouring constraints, flip the
    lowest-indexed such variable.  Success means the result is a codeword;
    a stuck state or the round budget is reported as failure, never raised.
    """
    if len(received) != code.n_variables:
        raise DomainError("received length does not match the code")
    word = [int(b) & 1 for b in received]
    unsat = set(c for c, s in enumerate(code.syndrome(word)) if s)
    neighbours = [code.constraints_of(v) for v in range(code.n_variables)]
    flips: list[int] = []
    trace = [len(unsat)]
    for _ in range(max_rounds):
        if not unsat:
            break
        candidate = -1
        for v in range(code.n_variables):
            bad = sum(1 for c in neighbours[v] if c in unsat)
            if 2 * bad > len(neighbours[v]):
                candidate = v
                break
        if candidate < 0:
            break
        word[candidate] ^= 1
        for c in neighbours[candidate]:
            unsat.symmetric_difference_update((c,))
        flips.append(candidate)
        if len(unsat) >= trace[-1]:  # pragma: no cover - excluded by flip rule
            raise AssertionError("flip failed to reduce unsatisfied count")
        trace.append(len(unsat))
    return DecodeResult(
        word=tuple(word),
        success=not unsat,
        flips=tuple(flips),
        unsatisfied_trace=tuple(trace),
    )


@dataclass(frozen=True)
class ExpansionVerdict:
    satisfied: bool
    threshold: float  # required |N(A)| > threshold * |A|
    worst_subset: tuple[int, ...]
    worst_ratio: float  # min over scanned subsets of |N(A)| / |A|


def expansion_check(g: BipartiteGraph, k: int, alpha: float) -> ExpansionVerdict:
    """Scan every left subset A with |A| <= alpha * |V_L| and test
    |N(A)| > (3k/4) |A|, for a graph k-regular on the left.

    Exhaustive, hence limited to 20 left vertices.  Returns the subset with
    the smallest neighborhood-to-size ratio along with the verdict.
    """
    if g.left_count > _EXHAUSTIVE_LEFT_LIMIT:
        raise ResourceLimitError(
            f"exhaustive expansion scan capped at {_EXHAUSTIVE_LEFT_LIMIT} left vertices"
        )
    degrees = g.left_degrees()
    if any(d != k for d in degrees):
        raise PreconditionError(f"graph is not left-regular of degree {k}")
    max_size = int(alpha * g.left_count)
    if max_size < 1:
        raise DomainError("alpha admits no nonempty subsets")
    masks = [0] * g.left_count
    for l, r in g.edges:
        masks[l] |= 1 << r
    need = 0.75 * k
    ok = True
    worst: tuple[int, ...] = ()
    worst_ratio = float("inf")
    for size in range(1, max_size + 1):
        for subset in itertools.combinations(range(g.left_count), size):
            nb = 0
            for v in subset:
                nb |= masks[v]
            ratio = nb.bit_count() / size
            if ratio < worst_ratio:
                worst_ratio = ratio
                worst = subset
            if nb.bit_count() <= need * size:
                ok = False
    return ExpansionVerdict(
        satisfied=ok, threshold=need, worst_subset=worst, worst_ratio=worst_ratio
    )
