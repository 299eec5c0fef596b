"""Exact separated/spanning rate bounds and cylinder combinatorics.

Separation scales, per-step code counts, and the log quotients that bound
metric mean dimension are all stored as integer-argument log expressions
(sums c_i * ln(a_i) with rational c_i, integer a_i >= 2) and only evaluated
numerically on demand, at a requested decimal precision, through mpmath.

For block k of a stacked system (L_k legs per transverse axis) the scale is
eps_k = |E_k| / (2 L_k - 1) and each step of the squared block map codes
L_k selected strips x L_k^(n-1) legs = L_k^n cylinders, so depth-m words
number L_k^(nm) (= 3^(knm) on the default leg schedule).  The quotient
n ln L_k / |ln eps_{k+1}| lower-bounds the dimension contribution of block k
and n ln L_k / ln(4 (2 L_k - 1) / |E_k|) upper-bounds it; both converge to
the same limit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath

from .constructions import (
    GEOMETRIC,
    Block,
    IdentitySystem,
    Schedule,
    StackedSystem,
    System,
    TwoBlockSystem,
    UnmaterializedBlockError,
)
from .geometry import Box
from .horseshoe import HorseshoeMap

DEFAULT_DPS = 30


@dataclass(frozen=True)
class LogExpr:
    """Exact sum of rational multiples of logs of integers >= 2."""

    terms: tuple[tuple[int, Fraction], ...]  # (argument, coefficient), sorted

    @staticmethod
    def _normalize(parts: dict[int, Fraction]) -> "LogExpr":
        clean = {a: c for a, c in parts.items() if c != 0 and a != 1}
        return LogExpr(tuple(sorted(clean.items())))

    @staticmethod
    def zero() -> "LogExpr":
        return LogExpr(())

    @staticmethod
    def of(argument: int, coefficient=1) -> "LogExpr":
        if argument < 1:
            raise ValueError("log arguments must be positive integers")
        return LogExpr._normalize({argument: Fraction(coefficient)})

    @staticmethod
    def of_rational(q: Fraction, coefficient=1) -> "LogExpr":
        """ln(p/q) as ln p - ln q."""
        q = Fraction(q)
        if q <= 0:
            raise ValueError("log arguments must be positive")
        c = Fraction(coefficient)
        return LogExpr._normalize({q.numerator: c, q.denominator: -c})

    def __add__(self, other: "LogExpr") -> "LogExpr":
        parts = dict(self.terms)
        for a, c in other.terms:
            parts[a] = parts.get(a, Fraction(0)) + c
        return LogExpr._normalize(parts)

    def __sub__(self, other: "LogExpr") -> "LogExpr":
        return self + other.scale(-1)

    def scale(self, factor) -> "LogExpr":
        f = Fraction(factor)
        return LogExpr._normalize({a: c * f for a, c in self.terms})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def eval(self, dps: int = DEFAULT_DPS) -> mpmath.mpf:
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            for a, c in self.terms:
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.log(a)
            return total

    def to_float(self, dps: int = DEFAULT_DPS) -> float:
        return float(self.eval(dps))


def log_ratio(num: LogExpr, den: LogExpr, dps: int = DEFAULT_DPS) -> float:
    """num/den at the requested precision; zero numerator short-circuits to 0."""
    if num.is_zero:
        return 0.0
    with mpmath.workdps(dps):
        d = den.eval(dps)
        if d <= 0:
            raise ZeroDivisionError("log-expression denominator is not positive")
        return float(num.eval(dps) / d)


class EpsSchedule:
    """Separation scales eps_k = |E_k| / (2 L_k - 1); strictly decreasing."""

    def __init__(self, schedule: Schedule, quad_scale: Fraction = Fraction(1)):
        self.schedule = schedule
        self.quad_scale = quad_scale  # placed sizes differ by this factor

    def exact(self, k: int) -> Fraction | None:
        if not self.schedule.has_rational_sizes():
            return None
        return self.schedule.size(k) / (2 * self.schedule.legs(k) - 1)

    def exact_placed(self, k: int) -> Fraction | None:
        e = self.exact(k)
        return None if e is None else e * self.quad_scale

    def log_inv(self, k: int) -> LogExpr:
        """|ln eps_k| as an exact log expression (uses the nominal size)."""
        sched = self.schedule
        expr = LogExpr.of(2 * sched.legs(k) - 1) + LogExpr.of_rational(sched.B, -1)
        if sched.kind == GEOMETRIC:
            expr = expr + LogExpr.of(3, k * sched.r)
        else:
            expr = expr + LogExpr.of(k, 2)
        return expr

    def to_float(self, k: int, dps: int = DEFAULT_DPS) -> float:
        with mpmath.workdps(dps):
            return float(mpmath.exp(-self.log_inv(k).eval(dps)))


def selected_strips(k: int, n: int) -> list[int]:
    """3^k odd strip indices of block k whose mutual gaps beat eps_k.

    There are 3^(k(n-1)) odd strips; taking every 3^(k(n-2))-th one spaces
    the selected strips at least two s-cells apart relative to the eps_k
    grid, so cylinder seeds in distinct selected strips separate strictly in
    one application.  For n = 2 every odd strip is selected.
    """
    if k < 1 or n < 2:
        raise ValueError("need k >= 1 and n >= 2")
    return _selected_strip_indices(3**k, n)


def _selected_strip_indices(L: int, n: int) -> list[int]:
    stride = L ** (n - 2)
    return [2 * j * stride + 1 for j in range(L)]


def count_cylinders(k: int, n: int, m: int) -> int:
    """Depth-m words over selected strips x legs: exactly 3^(k n m)."""
    if k < 1 or n < 2 or m < 1:
        raise ValueError("need k >= 1, n >= 2, m >= 1")
    return 3 ** (k * n * m)


def count_cylinders_log(k: int, n: int, m: int) -> LogExpr:
    count_cylinders(k, n, m)  # argument validation
    return LogExpr.of(3, k * n * m)


@dataclass(frozen=True)
class CylinderCode:
    """Depth-m itinerary of the squared block map: one (strip, leg) per step."""

    k: int
    word: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self):
        if not self.word:
            raise ValueError("cylinder codes need depth >= 1")
        for l, leg in self.word:
            if l % 2 == 0 or l < 1:
                raise ValueError(f"strip index {l} must be odd and positive")
            if any(i % 2 == 0 or i < 1 for i in leg):
                raise ValueError(f"leg index {leg} must be odd and positive")

    @property
    def depth(self) -> int:
        return len(self.word)


def _cell_box(h: HorseshoeMap, l: int, leg: tuple[int, ...]) -> Box:
    box = h.grid.strip_box(l).intersect(h.grid.leg_box(leg))
    assert box is not None
    return box


def cylinder_geometry(h: HorseshoeMap, code: CylinderCode) -> Box:
    """Exact box of points whose squared-map itinerary follows the code.

    Backward pass: starting from the final (strip, leg) cell, each earlier
    step pulls the running box through the two strip maps of one squared
    step; the intermediate strip is forced by the next step's leg through
    the strip-to-leg bijection.
    """
    pieces = {l: _piece_of(h, l) for l, _ in h.assignment}
    grid = h.grid
    for l, leg in code.word:
        if l not in pieces:
            raise ValueError(f"strip {l} is not an odd strip of block {code.k}")
        grid.leg_box(leg)  # validates leg indices
    last_l, last_leg = code.word[-1]
    box = _cell_box(h, last_l, last_leg)
    for t in range(code.depth - 2, -1, -1):
        l, leg = code.word[t]
        leg_next = code.word[t + 1][1]
        mid_strip = h.strip_for_leg(leg_next)
        pulled = pieces[mid_strip].preimage_box(box)
        if pulled is None:
            raise AssertionError("cylinder chain broke at the intermediate strip")
        pulled = pieces[l].preimage_box(pulled)
        if pulled is None:
            raise AssertionError("cylinder chain broke at the outer strip")
        box = pulled.intersect(_cell_box(h, l, leg))
        if box is None:
            raise AssertionError("cylinder chain left its own cell")
    return box


def _piece_of(h: HorseshoeMap, l: int):
    target = tuple(h.grid.strip_box(l).intervals)
    for piece in h.pamap.pieces:
        if tuple(piece.domain.intervals) == target:
            return piece
    raise ValueError(f"no piece with domain = strip {l}")


def enumerate_cylinders(
    h: HorseshoeMap, k: int, m: int, n: int, strips: Sequence[int] | None = None
) -> Iterator[tuple[CylinderCode, Box]]:
    """Brute-force oracle: every depth-m code over selected strips x legs."""
    if strips is None:
        strips = _selected_strip_indices(h.grid.L, n)
    legs = h.grid.odd_leg_indices()
    steps = list(itertools.product(strips, legs))
    for word in itertools.product(steps, repeat=m):
        code = CylinderCode(k, tuple(word))
        yield code, cylinder_geometry(h, code)


def strip_word_box(h: HorseshoeMap, word: Sequence[int]) -> Box:
    """Box of points whose unsquared itinerary visits the given odd strips."""
    pieces = {l: _piece_of(h, l) for l, _ in h.assignment}
    box = h.grid.strip_box(word[-1])
    for l in reversed(word[:-1]):
        pulled = pieces[l].preimage_box(box)
        if pulled is None:
            raise AssertionError("strip word is not realizable")
        box = pulled
    return box


@dataclass(frozen=True)
class RateBound:
    """Symbolic separated/spanning dimension bounds for one block index.

    lower_rate / lower_den bound the separated growth against |ln eps_{k+1}|
    from below; upper_rate / upper_den bound the spanning growth against
    ln(4 / eps_k) from above.  Inactive blocks carry zero rates.
    """

    k: int
    active: bool
    lower_rate: LogExpr
    upper_rate: LogExpr
    lower_den: LogExpr
    upper_den: LogExpr
    eps_exact: Fraction | None
    eps_log_inv: LogExpr

    def lower_ratio(self, dps: int = DEFAULT_DPS) -> float:
        return log_ratio(self.lower_rate, self.lower_den, dps)

    def upper_ratio(self, dps: int = DEFAULT_DPS) -> float:
        return log_ratio(self.upper_rate, self.upper_den, dps)

    def eps_float(self, dps: int = DEFAULT_DPS) -> float:
        if self.eps_log_inv.is_zero:
            return float("nan")
        with mpmath.workdps(dps):
            return float(mpmath.exp(-self.eps_log_inv.eval(dps)))


def _zero_bound(k: int) -> RateBound:
    z = LogExpr.zero()
    return RateBound(k, False, z, z, z, z, None, z)


def _stacked_bound(schedule: Schedule, n: int, k: int) -> RateBound:
    eps = EpsSchedule(schedule)
    active = schedule.is_active(k)
    if not active:
        return RateBound(
            k, False, LogExpr.zero(), LogExpr.zero(), LogExpr.zero(), LogExpr.zero(),
            eps.exact(k), eps.log_inv(k),
        )
    L = schedule.legs(k)
    rate = LogExpr.of(3, n * k) if L == 3**k else LogExpr.of(L, n)
    lower_den = eps.log_inv(k + 1)
    upper_den = LogExpr.of(4) + eps.log_inv(k)
    return RateBound(k, True, rate, rate, lower_den, upper_den, eps.exact(k), eps.log_inv(k))


def rate_profile(system: System, k_range: Sequence[int], dps: int = DEFAULT_DPS) -> list[RateBound]:
    """Symbolic profile rows for each k; needs no materialized geometry."""
    ks = sorted(set(k_range))
    if not ks or ks[0] < 1:
        raise ValueError("profile indices must be >= 1")
    if isinstance(system, IdentitySystem):
        return [_zero_bound(k) for k in ks]
    if isinstance(system, StackedSystem):
        return [_stacked_bound(system.schedule, system.n, k) for k in ks]
    if isinstance(system, TwoBlockSystem):
        return [_two_block_bound(system, k, dps) for k in ks]
    raise TypeError(f"unknown system type {type(system).__name__}")


def _half_bound(half, n: int, k: int) -> RateBound:
    if isinstance(half, IdentitySystem):
        return _zero_bound(k)
    return _stacked_bound(half.schedule, n, k)


def _two_block_bound(system: TwoBlockSystem, k: int, dps: int) -> RateBound:
    """Max rule: the combined bound at index k is the larger half's bound.

    Both halves sit in scale-2 charts, which shift |ln eps| by the constant
    ln 2; the constant drops out of every limit, so bounds are compared at
    equal k in inner coordinates.  The combined row is flagged active only
    at the sparse half's spikes, which is what separates the superior-limit
    subsequence from the inferior one downstream.
    """
    low = _half_bound(system.lower, system.n, k)
    up = _half_bound(system.upper, system.n, k)
    if (low.lower_ratio(dps), low.active) >= (up.lower_ratio(dps), up.active):
        winner, half = low, system.lower
    else:
        winner, half = up, system.upper
    spike = (
        winner.active
        and isinstance(half, StackedSystem)
        and half.schedule.is_sparse
    )
    return replace(winner, active=spike)


@dataclass(frozen=True)
class FitResult:
    value: float
    slope: float
    residual: float
    points: int
    degenerate: bool


@dataclass(frozen=True)
class ExtrapolationResult:
    """c - d/k tail fits of the profile's lower ratios on both subsequences."""

    liminf_estimate: float
    limsup_estimate: float
    liminf_fit: FitResult
    limsup_fit: FitResult
    upper_liminf_estimate: float
    upper_limsup_estimate: float


FIT_TAIL = 12


def _tail(points: list[tuple[int, float]]) -> list[tuple[int, float]]:
    # largest-k half of the subsequence, capped at FIT_TAIL entries
    keep = max(2, min(FIT_TAIL, -(-len(points) // 2)))
    return points[-keep:]


def _fit_c_minus_d_over_k(points: list[tuple[int, float]]) -> FitResult:
    if not points:
        return FitResult(0.0, 0.0, 0.0, 0, True)
    if len(points) == 1:
        return FitResult(points[0][1], 0.0, 0.0, 1, True)
    pts = _tail(sorted(points))
    xs = [1.0 / k for k, _ in pts]
    ys = [y for _, y in pts]
    n = len(pts)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        return FitResult(ys[-1], 0.0, 0.0, n, True)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    c = my - slope * mx
    residual = (sum((y - (c + slope * x)) ** 2 for x, y in zip(xs, ys)) / n) ** 0.5
    return FitResult(c, -slope, residual, n, False)


def extrapolate(profile: Sequence[RateBound], dps: int = DEFAULT_DPS) -> ExtrapolationResult:
    """Estimate the inferior/superior limits of the profile ratios.

    Active rows chase the superior limit (for sparse systems they are the
    spikes), inactive rows the inferior one; a profile that is all active or
    all inactive has a single limit and gets one shared fit.
    """
    if len(profile) < 4:
        raise ValueError("extrapolation needs at least 4 profile rows")
    rows = sorted(profile, key=lambda b: b.k)
    lower_pts = [(b.k, b.lower_ratio(dps)) for b in rows]
    upper_pts = [(b.k, b.upper_ratio(dps)) for b in rows]
    act = [i for i, b in enumerate(rows) if b.active]
    inact = [i for i, b in enumerate(rows) if not b.active]
    if act and inact:
        sup_l = _fit_c_minus_d_over_k([lower_pts[i] for i in act])
        inf_l = _fit_c_minus_d_over_k([lower_pts[i] for i in inact])
        sup_u = _fit_c_minus_d_over_k([upper_pts[i] for i in act])
        inf_u = _fit_c_minus_d_over_k([upper_pts[i] for i in inact])
    else:
        sup_l = inf_l = _fit_c_minus_d_over_k(lower_pts)
        sup_u = inf_u = _fit_c_minus_d_over_k(upper_pts)
    return ExtrapolationResult(
        liminf_estimate=inf_l.value,
        limsup_estimate=sup_l.value,
        liminf_fit=inf_l,
        limsup_fit=sup_l,
        upper_liminf_estimate=inf_u.value,
        upper_limsup_estimate=sup_u.value,
    )


def analytic_targets(system: System) -> tuple[Fraction, Fraction]:
    """Exact (liminf, limsup) the construction prescribes."""
    if isinstance(system, IdentitySystem):
        return Fraction(0), Fraction(0)
    if isinstance(system, StackedSystem):
        sched = system.schedule
        value = Fraction(system.n) if sched.kind != GEOMETRIC else Fraction(system.n) / (sched.r + 1)
        if sched.is_sparse:
            return Fraction(0), value
        return value, value
    if isinstance(system, TwoBlockSystem):
        return system.alpha, system.beta
    raise TypeError(f"unknown system type {type(system).__name__}")
