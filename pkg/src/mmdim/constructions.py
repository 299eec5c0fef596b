"""Stacked horseshoe systems with prescribed size/leg schedules.

A schedule assigns block k (k = 1, 2, ...) a cube side |E_k| and a leg count
L_k, plus an activity predicate.  Sizes follow either

* geometric decay  |E_k| = B / 3^(k r)  with rate parameter r > 0, or
* quadratic decay  |E_k| = B / k^2.

Blocks are laid out along the first axis of [0, 1]^n with disjoint
enlargements (a 1/10 side margin per face, clipped to the unit cube), the
active ones carrying an L_k-leg horseshoe and the inactive ones the identity.
A two-block system embeds one system in [0, 1/2]^n and another in [1/2, 1]^n
through scale-2 homothety charts; everything outside is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

from .geometry import Box, Cube, Point
from .horseshoe import HorseshoeMap, build_horseshoe
from .mapping import ESCAPED

GEOMETRIC = "geometric"
QUADRATIC = "quadratic"

ACTIVE_ALL = "all"
ACTIVE_SELF_POWERS = "self-powers"  # active exactly at k = j^j for j = 1, 2, ...

DEFAULT_GEOMETRY_BUDGET = 100_000

# Conservative rational bound: sum over k of 1/k^2 < 329/200, and each block
# consumes a slot of 6/5 times its side, so quadratic sides rescale to keep
# B_eff * (6/5) * (329/200) <= 1.
QUADRATIC_SIZE_CAP = Fraction(500, 987)


class ScheduleError(ValueError):
    pass


def _self_power_set(limit: int) -> set[int]:
    out, j = set(), 1
    while j**j <= limit:
        out.add(j**j)
        j += 1
    return out


@dataclass(frozen=True)
class Schedule:
    """Size law, leg law, and activity pattern for a stacked system."""

    kind: str
    B: Fraction
    r: Fraction | None = None
    active: object = ACTIVE_ALL  # "all" | "self-powers" | frozenset of indices
    leg_override: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.kind not in (GEOMETRIC, QUADRATIC):
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        if self.B <= 0:
            raise ScheduleError("B must be positive")
        if self.kind == GEOMETRIC:
            if self.r is None or self.r <= 0:
                raise ScheduleError("geometric schedules need r > 0")
            if self.r.denominator == 1 and self.B > 3**self.r.numerator - 1:
                raise ScheduleError("geometric sizes must sum to at most 1 (B <= 3^r - 1)")
        else:
            if self.r is not None:
                raise ScheduleError("quadratic schedules take no rate r")
            if self.B > 1:
                raise ScheduleError("quadratic schedules need B <= 1")
        if self.active not in (ACTIVE_ALL, ACTIVE_SELF_POWERS) and not isinstance(
            self.active, frozenset
        ):
            raise ScheduleError("active must be 'all', 'self-powers', or a frozenset")
        if self.leg_override:
            for k, L in self.leg_override:
                if L < 3 or L % 2 == 0:
                    raise ScheduleError(f"leg override at k={k} must be odd and >= 3")

    @staticmethod
    def geometric(B, r, active=ACTIVE_ALL, leg_override=None) -> "Schedule":
        return Schedule(GEOMETRIC, Fraction(B), Fraction(r), active, leg_override)

    @staticmethod
    def quadratic(B, active=ACTIVE_ALL, leg_override=None) -> "Schedule":
        return Schedule(QUADRATIC, Fraction(B), None, active, leg_override)

    @property
    def is_sparse(self) -> bool:
        return self.active != ACTIVE_ALL

    def has_rational_sizes(self) -> bool:
        return self.kind == QUADRATIC or self.r.denominator == 1

    def size(self, k: int) -> Fraction:
        """Exact side |E_k|; raises when 3^(k r) is irrational."""
        if k < 1:
            raise ScheduleError("block indices start at 1")
        if self.kind == QUADRATIC:
            return self.B / k**2
        exponent = k * self.r
        if exponent.denominator != 1:
            raise ScheduleError(
                f"|E_{k}| = B/3^({k}*{self.r}) is irrational; "
                "only integer rates materialize exactly"
            )
        return self.B / 3**exponent.numerator

    def legs(self, k: int) -> int:
        if k < 1:
            raise ScheduleError("block indices start at 1")
        if self.leg_override:
            for kk, L in self.leg_override:
                if kk == k:
                    return L
        return 3**k

    def is_active(self, k: int) -> bool:
        if self.active == ACTIVE_ALL:
            return True
        if self.active == ACTIVE_SELF_POWERS:
            return k in _self_power_set(k)
        return k in self.active


def solve_rate(alpha: Fraction, n: int) -> Schedule:
    """Schedule whose stacked system has metric mean dimension alpha.

    alpha in (0, n): geometric with r = n/alpha - 1; alpha = n: quadratic.
    """
    alpha = Fraction(alpha)
    if n < 2:
        raise ScheduleError("systems need dimension n >= 2")
    if alpha <= 0 or alpha > n:
        raise ScheduleError(f"solvable targets lie in (0, {n}], got {alpha}")
    if alpha == n:
        return Schedule.quadratic(1)
    return Schedule.geometric(1, Fraction(n, 1) / alpha - 1)


def place_cubes(schedule: Schedule, n: int, count: int) -> list[tuple[Fraction, Fraction]]:
    """First-axis anchors and sides for blocks 1..count inside [0, 1]^n.

    Geometric schedules use the telescoping anchors a_0 = 0,
    a_m = sum_{i<m} C/3^(i r) with C = (3^r - 1)/3^r, whose slot lengths sum
    to exactly 1; block k occupies the slot [a_{k-1}, a_k).  Quadratic
    schedules pack abutting slots of width (6/5)|E_k|, rescaling all sides by
    one global factor when B exceeds the packing cap.
    """
    if n < 2:
        raise ScheduleError("systems need dimension n >= 2")
    if count < 0:
        raise ScheduleError("count must be >= 0")
    if count == 0:
        return []
    if not schedule.has_rational_sizes():
        raise ScheduleError("cannot place cubes with irrational sides (non-integer r)")

    out: list[tuple[Fraction, Fraction]] = []
    if schedule.kind == GEOMETRIC:
        r = schedule.r.numerator
        pow_r = 3**r
        C = Fraction(pow_r - 1, pow_r)
        # margins of 1/10 of each side must fit between consecutive blocks
        if schedule.B * (Fraction(11, 10) + Fraction(1, 10 * pow_r)) > pow_r - 1:
            raise ScheduleError(
                "B too large for disjoint 1/10 enlargements under geometric placement"
            )
        anchor = Fraction(0)
        for k in range(1, count + 1):
            side = schedule.size(k)
            out.append((anchor, side))
            anchor += C / Fraction(3) ** ((k - 1) * r)
    else:
        scale = min(Fraction(1), QUADRATIC_SIZE_CAP / schedule.B)
        slot_lo = Fraction(0)
        for k in range(1, count + 1):
            side = schedule.size(k) * scale
            out.append((slot_lo + side / 10, side))
            slot_lo += side * Fraction(6, 5)
    return out


def quadratic_rescale_factor(schedule: Schedule) -> Fraction:
    if schedule.kind != QUADRATIC:
        return Fraction(1)
    return min(Fraction(1), QUADRATIC_SIZE_CAP / schedule.B)


def enlarged_box(cube: Cube, margin_num=1, margin_den=10) -> Box:
    """The cube fattened by (margin) * side per face, clipped to [0, 1]^n."""
    pad = cube.side * margin_num / margin_den
    ivs = []
    for lo, hi in cube.box().intervals:
        ivs.append((max(Fraction(0), lo - pad), min(Fraction(1), hi + pad)))
    return Box(tuple(ivs))


@dataclass(frozen=True)
class Block:
    k: int
    cube: Cube
    L: int
    active: bool
    horseshoe: HorseshoeMap | None

    @property
    def materialized(self) -> bool:
        return self.horseshoe is not None

    @property
    def eps(self) -> Fraction:
        """Separation scale of the block: side / (2 L - 1)."""
        return self.cube.side / (2 * self.L - 1)

    def enlargement(self) -> Box:
        return enlarged_box(self.cube)


class UnmaterializedBlockError(RuntimeError):
    pass


@dataclass(frozen=True)
class StackedSystem:
    n: int
    schedule: Schedule
    k_max: int
    blocks: tuple[Block, ...]
    geometry_budget: int = DEFAULT_GEOMETRY_BUDGET

    kind = "stacked"

    def block(self, k: int) -> Block:
        if not 1 <= k <= self.k_max:
            raise ValueError(f"block {k} is not materialized (k_max = {self.k_max})")
        return self.blocks[k - 1]

    def apply(self, p: Point):
        """One step of the full system: block dynamics inside, identity outside."""
        if p is ESCAPED:
            return ESCAPED
        for block in self.blocks:
            if block.cube.contains(p):
                if not block.active:
                    return p
                if block.horseshoe is None:
                    raise UnmaterializedBlockError(
                        f"block {block.k} exceeds the geometry budget"
                    )
                return block.horseshoe.pamap.apply(p)
        return p


def build_stacked(
    schedule: Schedule,
    n: int,
    k_max: int,
    geometry_budget: int = DEFAULT_GEOMETRY_BUDGET,
) -> StackedSystem:
    placements = place_cubes(schedule, n, k_max)
    blocks = []
    for k, (anchor, side) in enumerate(placements, start=1):
        L = schedule.legs(k)
        active = schedule.is_active(k)
        cube = Cube(anchor, anchor + side, n)
        horseshoe = None
        if active and L ** (n - 1) <= geometry_budget:
            horseshoe = build_horseshoe(cube, L, n)
        blocks.append(Block(k, cube, L, active, horseshoe))
    return StackedSystem(n, schedule, k_max, tuple(blocks), geometry_budget)


@dataclass(frozen=True)
class IdentitySystem:
    """The identity map; metric mean dimension 0."""

    n: int

    kind = "identity"

    def apply(self, p: Point):
        return p


def _half_to_unit(p: Point, lower: bool) -> Point:
    if lower:
        return tuple(2 * c for c in p)
    return tuple(2 * c - 1 for c in p)


def _unit_to_half(p: Point, lower: bool) -> Point:
    if lower:
        return tuple(c / 2 for c in p)
    return tuple((c + 1) / 2 for c in p)


@dataclass(frozen=True)
class TwoBlockSystem:
    """Two systems riding the corner cubes [0,1/2]^n and [1/2,1]^n.

    Each half is conjugated to a unit-cube system by the scale-2 homothety
    chart of its corner; the charts are bi-Lipschitz with constant 2, which
    leaves metric mean dimension unchanged.  Points on the shared boundary
    belong to the lower half; points in neither corner are fixed.
    """

    n: int
    alpha: Fraction
    beta: Fraction
    lower: Union[StackedSystem, IdentitySystem]
    upper: Union[StackedSystem, IdentitySystem]
    k_max: int

    kind = "two-block"

    def _in_half(self, p: Point, lower: bool) -> bool:
        half = Fraction(1, 2)
        if lower:
            return all(0 <= c <= half for c in p)
        return all(half <= c <= 1 for c in p)

    def apply(self, p: Point):
        if p is ESCAPED:
            return ESCAPED
        for is_lower, system in ((True, self.lower), (False, self.upper)):
            if self._in_half(p, is_lower):
                inner = system.apply(_half_to_unit(p, is_lower))
                if inner is ESCAPED:
                    return ESCAPED
                return _unit_to_half(inner, is_lower)
        return p


System = Union[StackedSystem, TwoBlockSystem, IdentitySystem]


def build_two_block(
    alpha,
    beta,
    n: int,
    k_max: int,
    geometry_budget: int = DEFAULT_GEOMETRY_BUDGET,
) -> TwoBlockSystem:
    """System with lower metric mean dimension alpha and upper beta.

    The lower corner carries a sparse system active at the self powers
    {j^j}, realizing beta as the superior limit while contributing nothing
    in between; the upper corner carries the dense system for alpha, which
    pins the inferior limit.  Requires 0 <= alpha <= beta <= n.
    """
    alpha, beta = Fraction(alpha), Fraction(beta)
    if n < 2:
        raise ScheduleError("systems need dimension n >= 2")
    if not 0 <= alpha <= beta <= n:
        raise ScheduleError(f"need 0 <= alpha <= beta <= n, got ({alpha}, {beta})")

    def dense(target) -> Union[StackedSystem, IdentitySystem]:
        if target == 0:
            return IdentitySystem(n)
        return build_stacked(solve_rate(target, n), n, k_max, geometry_budget)

    if alpha == beta:
        shared = dense(alpha)
        return TwoBlockSystem(n, alpha, beta, shared, shared, k_max)

    sparse_schedule = replace(solve_rate(beta, n), active=ACTIVE_SELF_POWERS)
    lower = build_stacked(sparse_schedule, n, k_max, geometry_budget)
    return TwoBlockSystem(n, alpha, beta, lower, dense(alpha), k_max)
