"""Brute-force separated/spanning estimators over exact orbit computations.

Greedy selection runs in a canonical order (lexicographic on coordinates),
decides every comparison exactly, and stops scanning a pair at the first
iterate that already separates it.  Orbit precomputation may be split over a
thread pool (MMDIM_THREADS or the `threads` argument); the split preserves
input order, so results are bitwise independent of the thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .constructions import IdentitySystem, StackedSystem, System, UnmaterializedBlockError
from .geometry import Point
from .horseshoe import square
from .mapping import ESCAPED, PAMap
from .metrics import MAXNORM, orbits_separate
from .symbolic import (
    DEFAULT_DPS,
    EpsSchedule,
    count_cylinders,
    enumerate_cylinders,
    rate_profile,
)

DEFAULT_BUDGET = 1_000_000


class BudgetExceeded(RuntimeError):
    pass


def thread_count(explicit: int | None = None) -> int:
    """Worker count: explicit argument, else MMDIM_THREADS, else 1."""
    if explicit is not None:
        return max(1, explicit)
    raw = os.environ.get("MMDIM_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SeedSet:
    """Deduplicated points in canonical (lexicographic) order."""

    points: tuple[Point, ...]
    provenance: str = "user"

    @staticmethod
    def of(points, provenance: str = "user") -> "SeedSet":
        return SeedSet(tuple(sorted(set(points))), provenance)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def cylinder_centers(system: System, k: int, m: int, budget: int | None = DEFAULT_BUDGET) -> SeedSet:
    """Centers of every depth-m selected cylinder of block k."""
    if isinstance(system, IdentitySystem):
        raise ValueError("identity systems have no cylinders")
    if not isinstance(system, StackedSystem):
        raise TypeError("cylinder centers are defined per stacked system block")
    block = system.block(k)
    if not block.active:
        raise ValueError(f"block {k} is inactive (identity); it has no cylinders")
    if block.horseshoe is None:
        raise UnmaterializedBlockError(f"block {k} exceeds the geometry budget")
    total = count_cylinders(k, system.n, m)
    if budget is not None and total > budget:
        raise BudgetExceeded(f"{total} cylinders at (k={k}, m={m}) exceed budget {budget}")
    centers = [
        box.center() for _, box in enumerate_cylinders(block.horseshoe, k, m, system.n)
    ]
    seeds = SeedSet.of(centers, provenance="cylinder-centers")
    assert len(seeds) == total, "cylinder centers must be pairwise distinct"
    return seeds


@dataclass(frozen=True)
class GreedyResult:
    chosen: tuple[Point, ...]
    m: int
    eps: Fraction
    metric: str
    seed_count: int
    truncated: bool  # some orbit escaped before step m
    cover_verified: bool

    def __len__(self) -> int:
        return len(self.chosen)


def _compute_orbits(pamap: PAMap, points: Sequence[Point], steps: int, workers: int):
    def chunk_orbits(chunk):
        return [pamap.orbit(p, steps) for p in chunk]

    if workers <= 1 or len(points) < 64:
        return chunk_orbits(points)
    size = -(-len(points) // workers)
    chunks = [points[i : i + size] for i in range(0, len(points), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(chunk_orbits, chunks))
    return [orbit for part in parts for orbit in part]


def _greedy_core(
    pamap: PAMap,
    seeds: SeedSet,
    m: int,
    eps: Fraction,
    metric: str,
    threads: int | None,
) -> GreedyResult:
    if m < 1:
        raise ValueError("greedy selection needs m >= 1")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    pts = seeds.points
    workers = thread_count(threads)
    orbits = _compute_orbits(pamap, pts, m - 1, workers)
    truncated = any(orbit[-1] is ESCAPED for orbit in orbits)
    chosen: list[int] = []
    for i in range(len(pts)):
        if all(orbits_separate(orbits[i], orbits[j], eps, metric) for j in chosen):
            chosen.append(i)
    # cover property: every seed within eps (Bowen d_m) of some chosen point
    cover_ok = all(
        any(not orbits_separate(orbits[i], orbits[j], eps, metric) for j in chosen)
        for i in range(len(pts))
    )
    if not cover_ok:
        raise AssertionError("greedy result failed its own cover check")
    return GreedyResult(
        chosen=tuple(pts[i] for i in chosen),
        m=m,
        eps=eps,
        metric=metric,
        seed_count=len(pts),
        truncated=truncated,
        cover_verified=True,
    )


def greedy_separated(
    pamap: PAMap,
    seeds: SeedSet,
    m: int,
    eps: Fraction,
    metric: str = MAXNORM,
    threads: int | None = None,
) -> GreedyResult:
    """Maximal subset with pairwise Bowen distance strictly above eps.

    The chosen count lower-bounds the separated number of the seed set at
    (m, eps); every seed lies within eps of a chosen point.
    """
    return _greedy_core(pamap, seeds, m, eps, metric, threads)


def greedy_spanning(
    pamap: PAMap,
    targets: SeedSet,
    m: int,
    eps: Fraction,
    metric: str = MAXNORM,
    threads: int | None = None,
) -> GreedyResult:
    """Greedy eps-cover of the targets in the Bowen metric.

    Runs the same maximal-separated scan: the chosen points cover every
    target within eps, and being pairwise separated they never outnumber
    the greedy separated set of the same inputs.
    """
    return _greedy_core(pamap, targets, m, eps, metric, threads)


@dataclass(frozen=True)
class GrowthRate:
    rate: float  # least-squares slope of ln(count) against m
    counts: dict[int, int]
    residual: float


def growth_rate(
    pamap: PAMap,
    seed_factory: Callable[[int], SeedSet],
    eps: Fraction,
    m_values: Sequence[int],
    metric: str = MAXNORM,
    threads: int | None = None,
) -> GrowthRate:
    counts: dict[int, int] = {}
    for m in sorted(set(m_values)):
        result = greedy_separated(pamap, seed_factory(m), m, eps, metric, threads)
        counts[m] = len(result.chosen)
    usable = [(m, c) for m, c in counts.items() if c > 0]
    if len(usable) < 2:
        raise ValueError("growth rate needs at least two m values with nonzero counts")
    xs = [m for m, _ in usable]
    ys = [math.log(c) for _, c in usable]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    intercept = my - slope * mx
    residual = (
        sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys)) / len(xs)
    ) ** 0.5
    return GrowthRate(slope, counts, residual)


@dataclass(frozen=True)
class NumericRateRow:
    """Measured growth of one block, ready for profile CSV export.

    The separated and spanning certificates coincide (one greedy scan yields
    both), so `rate` serves as lower and upper rate; the two ratios differ
    only in their denominators, mirroring the symbolic rows.
    """

    k: int
    active: bool
    rate: float
    ratio: float  # rate / |ln eps_{k+1}|, comparable with the symbolic rows
    upper_ratio: float  # rate / (ln 4 + |ln eps_k|)
    ratio_at_eps: float  # rate / |ln eps_k|, the raw dimension quotient
    eps_exact: Fraction | None
    counts: dict[int, int]
    error: str | None = None


def mdim_numeric_profile(
    system: System,
    k_range: Sequence[int],
    m_values: Sequence[int] = (1, 2, 3),
    budget: int = DEFAULT_BUDGET,
    metric: str = MAXNORM,
    threads: int | None = None,
    dps: int = DEFAULT_DPS,
    eps_override: Fraction | None = None,
) -> list[NumericRateRow]:
    """Greedy growth rates per block, with symbolic cross-checks.

    Inactive or identity rows report zero.  A block whose cylinder count
    blows the budget gets an error row instead of an answer; an active block
    without materialized geometry raises, since no honest measurement exists.
    With `eps_override` the greedy scans run at that scale instead of the
    block's own eps_k (and the symbolic coincidence check is skipped, since
    it only holds at the native scale).
    """
    rows: list[NumericRateRow] = []
    symbolic = {b.k: b for b in rate_profile(system, list(k_range), dps)}
    for k in sorted(set(k_range)):
        if isinstance(system, IdentitySystem):
            rows.append(NumericRateRow(k, False, 0.0, 0.0, 0.0, 0.0, None, {}))
            continue
        if not isinstance(system, StackedSystem):
            raise TypeError("numeric profiles run on stacked systems")
        block = system.block(k)
        if not block.active:
            rows.append(NumericRateRow(k, False, 0.0, 0.0, 0.0, 0.0, block.eps, {}))
            continue
        if block.horseshoe is None:
            raise UnmaterializedBlockError(f"block {k} exceeds the geometry budget")
        try:
            seeds_by_m = {m: cylinder_centers(system, k, m, budget) for m in m_values}
        except BudgetExceeded as exc:
            rows.append(
                NumericRateRow(k, True, 0.0, 0.0, 0.0, 0.0, block.eps, {}, error=str(exc))
            )
            continue
        squared = square(block.horseshoe)
        eps_used = block.eps if eps_override is None else Fraction(eps_override)
        measured = growth_rate(
            squared, lambda m: seeds_by_m[m], eps_used, list(m_values), metric, threads
        )
        eps_sched = EpsSchedule(system.schedule)
        den_next = eps_sched.log_inv(k + 1).to_float(dps)
        den_here = eps_sched.log_inv(k).to_float(dps)
        row = NumericRateRow(
            k,
            True,
            measured.rate,
            measured.rate / den_next,
            measured.rate / (math.log(4) + den_here),
            measured.rate / den_here,
            eps_used,
            measured.counts,
        )
        bound = symbolic[k]
        if eps_override is None and bound.active:
            # cylinder-center seeds realize the symbolic count exactly
            if row.ratio > bound.lower_ratio(dps) + 1e-9:
                raise AssertionError(
                    f"numeric ratio {row.ratio} exceeds symbolic bound at k={k}"
                )
        rows.append(row)
    return rows
