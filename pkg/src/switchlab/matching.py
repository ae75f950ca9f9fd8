"""Bipartite matching machinery: Hall condition, maximum matching, edge
coloring of regular multigraphs, Clos route assignment, and the cycle-flip
solver for the outer stage of a Benes network.

Multigraphs keep one entry per edge *instance* (stable index into the edge
list), so an edge coloring is well defined even with repeated endpoints.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .closmodel import ClosSpec, RoutingTag, address_split
from .errors import DomainError, PreconditionError

__all__ = [
    "BipartiteGraph",
    "HallVerdict",
    "MatchingResult",
    "EdgeColoring",
    "CallRequestSet",
    "BenesConstraintSystem",
    "BenesAssignment",
    "hall_check",
    "complete_matching",
    "edge_color",
    "clos_route_assignment",
    "verify_route_assignment",
    "benes_constraints",
    "benes_flip_assign",
    "benes_full_assign",
    "count_components",
    "count_solutions_bruteforce",
]

_EXHAUSTIVE_HALL_LIMIT = 20


@dataclass(frozen=True)
class BipartiteGraph:
    """Left/right vertex sets plus a multiset of edges (index = instance id)."""

    left_count: int
    right_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for l, r in self.edges:
            if not (0 <= l < self.left_count and 0 <= r < self.right_count):
                raise PreconditionError(f"edge ({l}, {r}) endpoint out of range")

    @classmethod
    def from_edges(cls, left_count: int, right_count: int,
                   edges: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        return cls(left_count, right_count, tuple((int(l), int(r)) for l, r in edges))

    def adjacency(self) -> list[list[int]]:
        """Left vertex -> sorted unique right neighbours."""
        adj: list[set[int]] = [set() for _ in range(self.left_count)]
        for l, r in self.edges:
            adj[l].add(r)
        return [sorted(s) for s in adj]

    def left_degrees(self) -> list[int]:
        deg = [0] * self.left_count
        for l, _ in self.edges:
            deg[l] += 1
        return deg

    def right_degrees(self) -> list[int]:
        deg = [0] * self.right_count
        for _, r in self.edges:
            deg[r] += 1
        return deg

    def regular_degree(self) -> int | None:
        """Common degree d if the multigraph is d-regular on both sides."""
        ld, rd = self.left_degrees(), self.right_degrees()
        if not ld or not rd:
            return None
        d = ld[0]
        if all(x == d for x in ld) and all(x == d for x in rd):
            return d
        return None

    def neighborhood(self, subset: Iterable[int]) -> set[int]:
        adj = self.adjacency()
        out: set[int] = set()
        for v in subset:
            out.update(adj[v])
        return out


@dataclass(frozen=True)
class HallVerdict:
    satisfied: bool
    witness: tuple[int, ...] | None  # a left subset A with |N(A)| < |A|
    neighborhood_size: int | None = None


def hall_check(g: BipartiteGraph) -> HallVerdict:
    """Check |N(A)| >= |A| for every left subset A.

    Exhaustive bitmask scan up to 20 left vertices (returns the subset of
    maximal deficiency); larger graphs fall back to the matching-based
    deficiency witness.
    """
    if g.left_count <= _EXHAUSTIVE_HALL_LIMIT:
        masks = [0] * g.left_count
        for l, r in g.edges:
            masks[l] |= 1 << r
        worst_def = 0
        worst: tuple[int, ...] | None = None
        worst_nb = None
        nb = [0] * (1 << g.left_count)
        for s in range(1, 1 << g.left_count):
            low = (s & -s).bit_length() - 1
            nb[s] = nb[s ^ (s & -s)] | masks[low]
            deficiency = s.bit_count() - nb[s].bit_count()
            if deficiency > worst_def:
                worst_def = deficiency
                worst = tuple(i for i in range(g.left_count) if s >> i & 1)
                worst_nb = nb[s].bit_count()
        if worst is None:
            return HallVerdict(True, None)
        return HallVerdict(False, worst, worst_nb)
    result = complete_matching(g)
    if result.complete:
        return HallVerdict(True, None)
    witness = result.violating_set
    assert witness is not None
    return HallVerdict(False, witness, len(g.neighborhood(witness)))


@dataclass(frozen=True)
class MatchingResult:
    matching: dict[int, int]  # left -> right, maximum cardinality
    complete: bool  # saturates every left vertex
    violating_set: tuple[int, ...] | None  # Hall witness when incomplete


class _HopcroftKarp:
    """Standard Hopcroft-Karp on adjacency lists; deterministic order."""

    INF = -1

    def __init__(self, adj: Sequence[Sequence[int]], right_count: int):
        self.adj = adj
        self.nl = len(adj)
        self.nr = right_count
        self.pair_l = [-1] * self.nl
        self.pair_r = [-1] * self.nr
        self.dist = [0] * self.nl

    def _bfs(self) -> bool:
        queue: deque[int] = deque()
        for l in range(self.nl):
            if self.pair_l[l] == -1:
                self.dist[l] = 0
                queue.append(l)
            else:
                self.dist[l] = self.INF
        found = False
        while queue:
            l = queue.popleft()
            for r in self.adj[l]:
                nxt = self.pair_r[r]
                if nxt == -1:
                    found = True
                elif self.dist[nxt] == self.INF:
                    self.dist[nxt] = self.dist[l] + 1
                    queue.append(nxt)
        return found

    def _dfs(self, l: int) -> bool:
        for r in self.adj[l]:
            nxt = self.pair_r[r]
            if nxt == -1 or (self.dist[nxt] == self.dist[l] + 1 and self._dfs(nxt)):
                self.pair_l[l] = r
                self.pair_r[r] = l
                return True
        self.dist[l] = self.INF
        return False

    def solve(self) -> int:
        size = 0
        while self._bfs():
            for l in range(self.nl):
                if self.pair_l[l] == -1 and self._dfs(l):
                    size += 1
        return size


def complete_matching(g: BipartiteGraph) -> MatchingResult:
    """Maximum matching; when it fails to saturate the left side, return the
    Hall-violating set of left vertices reachable by alternating paths from
    the exposed ones (Koenig duality)."""
    adj = g.adjacency()
    hk = _HopcroftKarp(adj, g.right_count)
    size = hk.solve()
    matching = {l: r for l, r in enumerate(hk.pair_l) if r != -1}
    if size == g.left_count:
        return MatchingResult(matching, True, None)
    # alternating BFS from exposed left vertices: unmatched edge ->, matched <-
    reach_l = {l for l in range(g.left_count) if hk.pair_l[l] == -1}
    frontier = deque(reach_l)
    seen_r: set[int] = set()
    while frontier:
        l = frontier.popleft()
        for r in adj[l]:
            if r in seen_r:
                continue
            seen_r.add(r)
            back = hk.pair_r[r]
            if back != -1 and back not in reach_l:
                reach_l.add(back)
                frontier.append(back)
    return MatchingResult(matching, False, tuple(sorted(reach_l)))


@dataclass(frozen=True)
class EdgeColoring:
    """Proper coloring of edge instances: no color repeats at any vertex."""

    graph: BipartiteGraph
    color_of: dict[int, int] = field(compare=False)
    colors: int = 0

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.colors)]
        for e, c in self.color_of.items():
            out[c].append(e)
        return out

    def is_proper(self) -> bool:
        seen: set[tuple[str, int, int]] = set()
        for e, c in self.color_of.items():
            l, r = self.graph.edges[e]
            kl, kr = ("L", l, c), ("R", r, c)
            if kl in seen or kr in seen:
                return False
            seen.add(kl)
            seen.add(kr)
        return len(self.color_of) == len(self.graph.edges)


def edge_color(g: BipartiteGraph, colors: int | None = None) -> EdgeColoring:
    """Color a d-regular bipartite multigraph with d colors by repeatedly
    extracting perfect matchings (each color class is one of them).

    ``colors`` may offer more than d colors; the extras stay unused.  A
    non-regular graph is rejected: regularity is what guarantees that every
    residual graph still has a perfect matching.
    """
    degree = g.regular_degree()
    if degree is None:
        raise PreconditionError("edge coloring requires a regular bipartite multigraph")
    if g.left_count != g.right_count:
        raise PreconditionError("regular coloring needs equal side sizes")
    if colors is not None and colors < degree:
        raise DomainError(f"need at least {degree} colors, got {colors}")
    # remaining multiplicity per vertex pair, with a pool of instance ids
    pool: dict[tuple[int, int], list[int]] = {}
    for idx, e in enumerate(g.edges):
        pool.setdefault(e, []).append(idx)
    color_of: dict[int, int] = {}
    for color in range(degree):
        support = [pair for pair, ids in pool.items() if ids]
        sub = BipartiteGraph.from_edges(g.left_count, g.right_count, support)
        res = complete_matching(sub)
        if not res.complete:  # pragma: no cover - impossible for regular input
            raise PreconditionError("residual graph lost regularity")
        for l, r in res.matching.items():
            color_of[pool[(l, r)].pop()] = color
    return EdgeColoring(graph=g, color_of=color_of, colors=degree)


@dataclass(frozen=True)
class CallRequestSet:
    """Point-to-point requests (source, destination) on a Clos network;
    sources all distinct and destinations all distinct."""

    pairs: tuple[tuple[int, int], ...]
    spec: ClosSpec

    def __post_init__(self) -> None:
        n_ports = self.spec.ports
        srcs = [s for s, _ in self.pairs]
        dsts = [d for _, d in self.pairs]
        if len(set(srcs)) != len(srcs) or len(set(dsts)) != len(dsts):
            raise PreconditionError("sources and destinations must each be distinct")
        for v in itertools.chain(srcs, dsts):
            if not 0 <= v < n_ports:
                raise PreconditionError(f"port {v} outside [0, {n_ports})")

    @classmethod
    def from_permutation(cls, pi: Sequence[int], spec: ClosSpec) -> "CallRequestSet":
        return cls(tuple((i, int(pi[i])) for i in range(len(pi))), spec)


def clos_route_assignment(reqs: CallRequestSet) -> list[RoutingTag]:
    """Assign a central module to every request so no two requests sharing an
    input module or an output module use the same one.

    Each request becomes an edge (source module, destination module) of a
    bipartite multigraph; coloring that graph with the available central
    modules is exactly the assignment.  Partial request sets are padded with
    dummy edges up to regularity, which are dropped afterwards.
    """
    spec = reqs.spec
    if spec.m < spec.n:
        raise DomainError("m >= n required for a rearrangeable assignment")
    n = spec.n
    edges = [(s // n, d // n) for s, d in reqs.pairs]
    k = spec.k
    # pad to n-regularity with dummy edges (greedy on deficits)
    ldef = [n] * k
    rdef = [n] * k
    for l, r in edges:
        ldef[l] -= 1
        rdef[r] -= 1
    if min(ldef) < 0 or min(rdef) < 0:
        raise PreconditionError("some module carries more requests than ports")
    real_count = len(edges)
    for l in range(k):
        while ldef[l] > 0:
            r = max(range(k), key=lambda j: rdef[j])
            if rdef[r] <= 0:  # pragma: no cover - deficits always balance
                raise PreconditionError("padding failed to balance degrees")
            edges.append((l, r))
            ldef[l] -= 1
            rdef[r] -= 1
    graph = BipartiteGraph.from_edges(k, k, edges)
    coloring = edge_color(graph, spec.m)
    tags = []
    for idx in range(real_count):
        _, dest = reqs.pairs[idx]
        q, r = address_split(dest, n, spec.k)
        tags.append(RoutingTag(central=coloring.color_of[idx], out_module=q, out_port=r))
    return tags


def verify_route_assignment(reqs: CallRequestSet, tags: Sequence[RoutingTag]) -> bool:
    """Independent nonblocking check: within any input module and within any
    output module, all assigned central modules are distinct, and every tag
    addresses its request's destination."""
    if len(tags) != len(reqs.pairs):
        return False
    n = reqs.spec.n
    by_in: dict[int, set[int]] = {}
    by_out: dict[int, set[int]] = {}
    for (src, dst), tag in zip(reqs.pairs, tags):
        if not 0 <= tag.central < reqs.spec.m:
            return False
        if tag.destination(n) != dst:
            return False
        ins = by_in.setdefault(src // n, set())
        outs = by_out.setdefault(dst // n, set())
        if tag.central in ins or tag.central in outs:
            return False
        ins.add(tag.central)
        outs.add(tag.central)
    return True


# --- Benes outer-stage assignment ------------------------------------------

@dataclass(frozen=True)
class BenesConstraintSystem:
    """Binary variables x_i (one per request) and parity constraints
    x_i + x_j = 1; every variable sits in exactly one input-side and one
    output-side constraint, so the constraint graph is a union of even
    cycles and the solution count is 2^components."""

    size: int
    constraints: tuple[tuple[int, int], ...]

    def variable_adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.size)]
        for c, (i, j) in enumerate(self.constraints):
            adj[i].append(c)
            adj[j].append(c)
        return adj


def benes_constraints(pi: Sequence[int]) -> BenesConstraintSystem:
    """Build the pairing constraints of the two-central-module outer stage
    for permutation ``pi`` (input constraints first, then output)."""
    n = len(pi)
    if n % 2 != 0:
        raise DomainError("outer stage pairs ports; size must be even")
    if sorted(pi) != list(range(n)):
        raise PreconditionError("pi must be a permutation of 0..N-1")
    cons: list[tuple[int, int]] = [(2 * t, 2 * t + 1) for t in range(n // 2)]
    by_out_module: dict[int, list[int]] = {}
    for i, d in enumerate(pi):
        by_out_module.setdefault(d // 2, []).append(i)
    for u in range(n // 2):
        pair = by_out_module[u]
        cons.append((pair[0], pair[1]))
    return BenesConstraintSystem(size=n, constraints=tuple(cons))


def _constraint_cycles(sys: BenesConstraintSystem) -> list[list[tuple[str, int]]]:
    """Cycles of the variable/constraint incidence graph, each an alternating
    list [("c", c0), ("v", v0), ("c", c1), ...] in traversal order."""
    var_adj = sys.variable_adjacency()
    con_vars = {c: pair for c, pair in enumerate(sys.constraints)}
    seen_c: set[int] = set()
    cycles = []
    for start in range(len(sys.constraints)):
        if start in seen_c:
            continue
        cycle: list[tuple[str, int]] = []
        c = start
        prev_var = -1
        while True:
            seen_c.add(c)
            cycle.append(("c", c))
            i, j = con_vars[c]
            v = j if i == prev_var else i
            cycle.append(("v", v))
            a, b2 = var_adj[v]
            c = b2 if a == c else a
            prev_var = v
            if c == start:
                break
        cycles.append(cycle)
    return cycles


def benes_flip_assign(pi: Sequence[int]) -> list[int]:
    """Solve the outer-stage constraints by the segment-flip rule.

    Start from the alternating assignment 0,1,0,1,... (every input-side
    constraint holds).  In each constraint cycle the unsatisfied vertices cut
    the cycle into segments; label them alternately starting at the
    lowest-indexed unsatisfied vertex and flip all variables in the first
    label class.  One pass satisfies everything.
    """
    sys = benes_constraints(pi)
    x = [i % 2 for i in range(sys.size)]

    def unsat(c: int) -> bool:
        i, j = sys.constraints[c]
        return x[i] + x[j] != 1

    for cycle in _constraint_cycles(sys):
        con_positions = [t for t, (kind, _) in enumerate(cycle) if kind == "c"]
        bad = [t for t in con_positions if unsat(cycle[t][1])]
        if not bad:
            continue
        # rotate so the walk starts at the lowest-indexed unsatisfied vertex
        anchor = min(bad, key=lambda t: cycle[t][1])
        size = len(cycle)
        label = 0  # 0 == alpha: segment right after the anchor flips
        flip: set[int] = set()
        for step in range(1, size):
            kind, idx = cycle[(anchor + step) % size]
            if kind == "c":
                if unsat(idx):
                    label ^= 1
            elif label == 0:
                flip.add(idx)
        for v in flip:
            x[v] ^= 1
    return x


def count_components(sys: BenesConstraintSystem) -> int:
    """Connected components of the constraint graph (== number of cycles)."""
    return len(_constraint_cycles(sys))


def count_solutions_bruteforce(sys: BenesConstraintSystem) -> int:
    """Exhaustively count satisfying assignments (2^g expected); the size is
    capped because the scan is exponential."""
    if sys.size > 20:
        raise DomainError("exhaustive solution count capped at 20 variables")
    count = 0
    for bits in range(1 << sys.size):
        ok = True
        for i, j in sys.constraints:
            if (bits >> i & 1) + (bits >> j & 1) != 1:
                ok = False
                break
        count += ok
    return count


@dataclass(frozen=True)
class BenesAssignment:
    """Recursive switch settings realizing a permutation on N = 2^t ports.

    ``input_cross[t]`` / ``output_cross[u]`` give the 2x2 element states of
    the outer columns; ``upper``/``lower`` route the half-size
    subpermutations through central subnetworks 0 and 1.  ``cross`` is the
    single element state at the N == 2 base case.
    """

    size: int
    cross: bool = False
    input_cross: tuple[bool, ...] = ()
    output_cross: tuple[bool, ...] = ()
    upper: "BenesAssignment | None" = None
    lower: "BenesAssignment | None" = None

    def route(self, port: int) -> int:
        """Walk one input through the configured network."""
        if self.size == 2:
            return port ^ 1 if self.cross else port
        t, pos = divmod(port, 2)
        goes_lower = (pos == 1) != self.input_cross[t]
        sub = self.lower if goes_lower else self.upper
        assert sub is not None
        u = sub.route(t)
        from_lower_to_top = self.output_cross[u]
        if goes_lower:
            return 2 * u + (0 if from_lower_to_top else 1)
        return 2 * u + (1 if from_lower_to_top else 0)

    def realized_permutation(self) -> list[int]:
        return [self.route(i) for i in range(self.size)]


def benes_full_assign(pi: Sequence[int]) -> BenesAssignment:
    """Recursively configure a Benes network for permutation ``pi``.

    The outer stage is solved by :func:`benes_flip_assign` (x_i = 0 routes
    request i through the upper subnetwork), then the two half-size
    subpermutations are assigned the same way.  Each recursion level checks
    that both subnetworks receive exactly one signal per link.
    """
    n = len(pi)
    if n < 2 or n & (n - 1):
        raise DomainError("size must be a power of two, at least 2")
    if sorted(pi) != list(range(n)):
        raise PreconditionError("pi must be a permutation of 0..N-1")
    if n == 2:
        return BenesAssignment(size=2, cross=pi[0] == 1)
    x = benes_flip_assign(pi)
    half = n // 2
    upper_pi = [-1] * half
    lower_pi = [-1] * half
    input_cross = []
    out_cross = [False] * half
    for t in range(half):
        i0, i1 = 2 * t, 2 * t + 1
        if x[i0] + x[i1] != 1:  # pragma: no cover - flip algorithm guarantee
            raise PreconditionError("input constraint unsatisfied")
        up_in = i0 if x[i0] == 0 else i1
        low_in = i1 if up_in == i0 else i0
        input_cross.append(up_in != i0)
        upper_pi[t] = pi[up_in] // 2
        lower_pi[t] = pi[low_in] // 2
        # the output element crosses when the upper-arriving signal targets
        # the bottom port of its output pair
        out_cross_needed = pi[up_in] % 2 == 1
        out_cross[pi[up_in] // 2] = out_cross_needed
    if sorted(upper_pi) != list(range(half)) or sorted(lower_pi) != list(range(half)):
        raise PreconditionError("subnetwork link used twice")  # pragma: no cover
    return BenesAssignment(
        size=n,
        input_cross=tuple(input_cross),
        output_cross=tuple(out_cross),
        upper=benes_full_assign(upper_pi),
        lower=benes_full_assign(lower_pi),
    )
