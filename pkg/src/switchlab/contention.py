"""Crossbar output contention: carried load, pseudo signal-to-noise ratio,
occupancy distributions from the maximum-entropy packet model, and a
slot-level Monte Carlo oracle.

All formulas here use the natural logarithm.  Packets losing an output
contention are dropped (no queueing); inputs are homogeneous with offered
load rho and uniformly random destinations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import DomainError, PreconditionError, ResourceLimitError

__all__ = [
    "CrossbarLoad",
    "PowerStats",
    "OccupancyDistribution",
    "CrossbarSimResult",
    "BruteForceResult",
    "carried_load",
    "psnr",
    "power_stats",
    "simulate_crossbar",
    "boltzmann_pmf",
    "count_states",
    "maximize_entropy_bruteforce",
]

OccupancyModel = Literal["distinguishable", "indistinguishable"]
StateModel = Literal["one-per-input", "distinguishable", "indistinguishable"]

_PMF_TAIL = 1e-12
_BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class CrossbarLoad:
    """Offered versus carried load of an N x N crossbar."""

    n_ports: int
    offered_load: float
    carried_load: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.carried_load <= self.offered_load <= 1.0:
            raise PreconditionError("need 0 <= carried <= offered <= 1")


@dataclass(frozen=True)
class PowerStats:
    """First- and second-moment statistics of the busy-output count."""

    signal_mean: float
    noise_mean: float
    variance: float
    psnr: float


@dataclass(frozen=True)
class OccupancyDistribution:
    """Truncated pmf of packets-per-output, tail mass folded into the last
    bucket so the probabilities sum to one exactly."""

    pmf: tuple[tuple[int, float], ...]
    model: OccupancyModel

    def probability(self, level: int) -> float:
        for i, p in self.pmf:
            if i == level:
                return p
        return 0.0

    def total(self) -> float:
        return sum(p for _, p in self.pmf)


def carried_load(rho: float, n_ports: int | None = None, *, asymptotic: bool = False) -> float:
    """Probability that an output is busy in a slot.

    Finite switch: 1 - (1 - rho/N)^N; ``asymptotic`` gives the N -> infinity
    limit 1 - exp(-rho).  Monotone nondecreasing in rho.
    """
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"offered load {rho} outside [0, 1]")
    if asymptotic:
        return -math.expm1(-rho)
    if n_ports is None or n_ports < 1:
        raise DomainError("need n_ports >= 1 or asymptotic=True")
    return 1.0 - (1.0 - rho / n_ports) ** n_ports


def psnr(carried: float) -> float:
    """Pseudo signal-to-noise ratio rho'/(1 - rho') of a carried load."""
    if not 0.0 <= carried < 1.0:
        raise DomainError("carried load must lie in [0, 1) for a finite PSNR")
    return carried / (1.0 - carried)


def power_stats(n_ports: int, rho: float) -> PowerStats:
    """Mean signal power N*rho', mean noise power N*(1-rho') and the busy
    count variance N*rho'*(1-rho')."""
    rho_p = carried_load(rho, n_ports)
    signal = n_ports * rho_p
    noise = n_ports - signal
    var = n_ports * rho_p * (1.0 - rho_p)
    ratio = math.inf if noise == 0.0 else signal / noise
    return PowerStats(signal_mean=signal, noise_mean=noise, variance=var, psnr=ratio)


@dataclass(frozen=True)
class CrossbarSimResult:
    """Empirical counterpart of :func:`power_stats` plus the per-output
    packet-count histogram aggregated over all slots."""

    load: CrossbarLoad
    busy_mean: float
    busy_variance: float
    busy_skewness: float
    histogram: np.ndarray  # counts of outputs seeing 0..N packets
    slots: int

    def occupancy_pmf(self) -> np.ndarray:
        return self.histogram / self.histogram.sum()


def simulate_crossbar(
    n_ports: int, rho: float, slots: int, seed: int = 0, *, chunk: int = 1 << 14
) -> CrossbarSimResult:
    """Monte Carlo slot simulation of an N x N bufferless crossbar.

    Each slot every input holds a packet with probability rho and draws an
    independent uniform output; an output is busy when at least one packet
    targets it.  Deterministic for a given seed; slots are independent, so
    parallel runs with distinct seeds can be merged by summing counts.
    """
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"offered load {rho} outside [0, 1]")
    if n_ports < 1 or slots < 1:
        raise DomainError("need n_ports >= 1 and slots >= 1")
    rng = np.random.default_rng(seed)
    hist = np.zeros(n_ports + 1, dtype=np.int64)
    s1 = s2 = s3 = 0.0
    done = 0
    while done < slots:
        b = min(chunk, slots - done)
        held = rng.random((b, n_ports)) < rho
        dests = rng.integers(0, n_ports, size=(b, n_ports))
        flat = (dests + n_ports * np.arange(b)[:, None])[held]
        counts = np.bincount(flat, minlength=b * n_ports).reshape(b, n_ports)
        hist += np.bincount(counts.ravel(), minlength=n_ports + 1)
        busy = (counts > 0).sum(axis=1).astype(np.float64)
        s1 += busy.sum()
        s2 += (busy**2).sum()
        s3 += (busy**3).sum()
        done += b
    mean = s1 / slots
    var = s2 / slots - mean**2
    mu3 = s3 / slots - 3 * mean * var - mean**3
    skew = mu3 / var**1.5 if var > 0 else 0.0
    carried = s1 / (slots * n_ports)
    noise = n_ports - mean
    return CrossbarSimResult(
        load=CrossbarLoad(n_ports, rho, carried),
        busy_mean=mean,
        busy_variance=var,
        busy_skewness=skew,
        histogram=hist,
        slots=slots,
    )


def boltzmann_pmf(rho: float, model: OccupancyModel = "distinguishable") -> OccupancyDistribution:
    """Maximum-entropy distribution of packets per output at offered load rho.

    Distinguishable packets give the Poisson pmf exp(-rho) rho^i / i!;
    indistinguishable packets the geometric (1/(1+rho)) (rho/(1+rho))^i.
    The series is truncated once cumulative mass exceeds 1 - 1e-12 and the
    remainder is folded into the final bucket.
    """
    if rho < 0:
        raise DomainError("offered load must be nonnegative")
    if model not in ("distinguishable", "indistinguishable"):
        raise DomainError(f"unknown occupancy model {model!r}")
    if rho == 0.0:
        return OccupancyDistribution(pmf=((0, 1.0),), model=model)
    terms: list[tuple[int, float]] = []
    cum = 0.0
    i = 0
    while cum < 1.0 - _PMF_TAIL:
        if model == "distinguishable":
            p = math.exp(-rho) * rho**i / math.factorial(i)
        else:
            p = (1.0 / (1.0 + rho)) * (rho / (1.0 + rho)) ** i
        terms.append((i, p))
        cum += p
        i += 1
        if i > 10_000:  # pragma: no cover - cannot trigger for finite rho
            raise ResourceLimitError("pmf failed to accumulate mass")
    last_i, last_p = terms[-1]
    terms[-1] = (last_i, last_p + (1.0 - cum))
    return OccupancyDistribution(pmf=tuple(terms), model=model)


def _validate_occupancy(occupancy: Sequence[int], n_ports: int, n_packets: int) -> None:
    if any(c < 0 for c in occupancy):
        raise PreconditionError("occupancy counts must be nonnegative")
    if sum(occupancy) != n_ports:
        raise PreconditionError("occupancy counts must sum to the output count")
    if sum(i * c for i, c in enumerate(occupancy)) != n_packets:
        raise PreconditionError("level-weighted occupancy must sum to the packet count")


def count_states(
    n_ports: int,
    n_packets: int,
    occupancy: Sequence[int],
    model: StateModel = "one-per-input",
) -> int:
    """Exact number of switch microstates for an occupancy vector.

    ``occupancy[i]`` counts outputs holding exactly i packets.  Models:
    ``one-per-input`` includes the choice of which inputs are active,
    ``distinguishable`` counts arrangements of labelled packets over outputs,
    ``indistinguishable`` only the division of outputs into levels.
    """
    _validate_occupancy(occupancy, n_ports, n_packets)
    division = math.factorial(n_ports)
    for c in occupancy:
        division //= math.factorial(c)
    if model == "indistinguishable":
        return division
    packets = math.factorial(n_packets)
    for i, c in enumerate(occupancy):
        packets //= math.factorial(i) ** c
    if model == "distinguishable":
        return division * packets
    if model == "one-per-input":
        return math.comb(n_ports, n_packets) * division * packets
    raise DomainError(f"unknown state model {model!r}")


def _occupancy_vectors(n_ports: int, n_packets: int) -> Iterable[tuple[int, ...]]:
    """All (n_0, ..., n_r) with sum n_i = N and sum i*n_i = M, emitted in
    lexicographic order."""

    def parts(remaining: int, max_part: int) -> Iterable[tuple[int, ...]]:
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, max_part), 0, -1):
            for rest in parts(remaining - first, first):
                yield (first,) + rest

    seen = set()
    for partition in parts(n_packets, n_packets if n_packets else 1):
        if len(partition) > n_ports:
            continue
        r = partition[0] if partition else 0
        vec = [0] * (r + 1)
        vec[0] = n_ports - len(partition)
        for part in partition:
            vec[part] += 1
        t = tuple(vec)
        if t not in seen:
            seen.add(t)
            yield t


@dataclass(frozen=True)
class BruteForceResult:
    """Outcome of exhaustive microstate maximization."""

    maximizer: tuple[int, ...]
    max_states: int
    poisson_vector: tuple[int, ...]
    poisson_states: int

    def proportions(self, n_ports: int) -> tuple[float, ...]:
        return tuple(c / n_ports for c in self.maximizer)


def maximize_entropy_bruteforce(
    n_ports: int, n_packets: int, model: StateModel = "one-per-input"
) -> BruteForceResult:
    """Enumerate every feasible occupancy vector and return the one with the
    most microstates (ties broken by lexicographically smallest vector).

    Also reports the feasible vector closest (L1) to the continuous Poisson
    profile N * exp(-rho) rho^i / i! with rho = M/N, and its state count.
    """
    if n_ports > _BRUTE_FORCE_LIMIT:
        raise ResourceLimitError(
            f"exhaustive search capped at {_BRUTE_FORCE_LIMIT} outputs, got {n_ports}"
        )
    if model == "one-per-input" and n_packets > n_ports:
        raise PreconditionError("one packet per input allows at most N packets")
    rho = n_packets / n_ports
    best: tuple[int, ...] | None = None
    best_w = -1
    nearest: tuple[int, ...] | None = None
    nearest_dist = math.inf
    for vec in sorted(_occupancy_vectors(n_ports, n_packets)):
        w = count_states(n_ports, n_packets, vec, model)
        if w > best_w:
            best, best_w = vec, w
        dist = _l1_to_poisson(vec, n_ports, rho, n_packets)
        if dist < nearest_dist - 1e-12:
            nearest, nearest_dist = vec, dist
    assert best is not None and nearest is not None
    return BruteForceResult(
        maximizer=best,
        max_states=best_w,
        poisson_vector=nearest,
        poisson_states=count_states(n_ports, n_packets, nearest, model),
    )


def _l1_to_poisson(vec: Sequence[int], n_ports: int, rho: float, levels: int) -> float:
    dist = 0.0
    for i in range(levels + 1):
        target = n_ports * math.exp(-rho) * rho**i / math.factorial(i) if rho > 0 else (
            n_ports if i == 0 else 0.0
        )
        actual = vec[i] if i < len(vec) else 0
        dist += abs(actual - target)
    return dist
