"""Horseshoe homeomorphism data on an n-cube.

For an odd leg count L >= 3 on a cube E = [a, b]^n:

* the transverse axes are cut by 2L points t_0 < ... < t_{2L-1} with uniform
  spacing (b - a)/(2L - 1); legs are the products of [a, b] on the first axis
  with odd t-cells on the others, so there are L^(n-1) legs;
* the first axis is cut by 2L^(n-1) points s_i with spacing
  (b - a)/(2L^(n-1) - 1); the odd s-cells are the L^(n-1) vertical strips
  that the map carries affinely onto the legs, and the even cells escape.

Each odd strip is expanded by 2L^(n-1) - 1 along the first axis and
contracted by 1/(2L - 1) transversally.  Strips are matched to legs in
boustrophedon (snake) order running from the leg containing (a, ..., a, b)
to the leg containing (b, ..., b, a), which makes those two corners fixed
points with orientation-preserving pieces throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .geometry import Box, Cube, Point
from .mapping import AffinePiece, PAMap


@dataclass(frozen=True)
class Strip:
    index: int  # 1-based cell index along the first axis; odd = mapped
    box: Box

    @property
    def is_mapped(self) -> bool:
        return self.index % 2 == 1


@dataclass(frozen=True)
class Leg:
    index: tuple[int, ...]  # one odd 1-based t-cell index per transverse axis
    box: Box


@dataclass(frozen=True)
class SubdivisionGrid:
    cube: Cube
    n: int
    L: int
    t: tuple[Fraction, ...]
    s: tuple[Fraction, ...]

    @property
    def strip_count(self) -> int:
        return 2 * self.L ** (self.n - 1) - 1

    @property
    def leg_cell_count(self) -> int:
        return 2 * self.L - 1

    def odd_strip_indices(self) -> list[int]:
        return list(range(1, self.strip_count + 1, 2))

    def strip_box(self, l: int) -> Box:
        if not 1 <= l <= self.strip_count:
            raise ValueError(f"strip index {l} out of range")
        first = (self.s[l - 1], self.s[l])
        rest = ((self.cube.lo, self.cube.hi),) * (self.n - 1)
        return Box((first,) + rest)

    def leg_box(self, index: tuple[int, ...]) -> Box:
        if len(index) != self.n - 1:
            raise ValueError("leg index needs one entry per transverse axis")
        ivs = [(self.cube.lo, self.cube.hi)]
        for i in index:
            if not 1 <= i <= self.leg_cell_count:
                raise ValueError(f"t-cell index {i} out of range")
            ivs.append((self.t[i - 1], self.t[i]))
        return Box(tuple(ivs))

    def odd_leg_indices(self) -> list[tuple[int, ...]]:
        odd = range(1, self.leg_cell_count + 1, 2)
        return list(itertools.product(odd, repeat=self.n - 1))

    def strips(self) -> list[Strip]:
        return [Strip(l, self.strip_box(l)) for l in range(1, self.strip_count + 1)]

    def legs(self) -> list[Leg]:
        return [Leg(ix, self.leg_box(ix)) for ix in self.odd_leg_indices()]


def subdivide(cube: Cube, L: int, n: int | None = None) -> SubdivisionGrid:
    """Cut the cube into the t/s grids for an L-leg horseshoe."""
    n = cube.dim if n is None else n
    if n != cube.dim:
        raise ValueError("n disagrees with the cube dimension")
    if n < 2:
        raise ValueError("horseshoes need dimension n >= 2")
    if L < 3 or L % 2 == 0:
        raise ValueError("leg count L must be odd and >= 3")
    side = cube.side
    t = tuple(cube.lo + side * j / (2 * L - 1) for j in range(2 * L))
    m = 2 * L ** (n - 1)
    s = tuple(cube.lo + side * i / (m - 1) for i in range(m))
    return SubdivisionGrid(cube, n, L, t, s)


def boustrophedon_legs(L: int, n: int) -> list[tuple[int, ...]]:
    """Odd leg indices in snake order from (1, ..., 1, 2L-1) to (2L-1, ..., 2L-1, 1).

    A mixed-radix counter is decoded with direction flips on each axis
    (reversed whenever the more significant digits sum to an odd value), and
    the final axis is mirrored so the walk starts at the top of the last
    coordinate.  Consecutive entries differ by one cell on one axis.
    """
    axes = n - 1
    order = []
    for counter in itertools.product(range(L), repeat=axes):
        pos = []
        prefix = 0
        for j, c in enumerate(counter):
            p = c if prefix % 2 == 0 else L - 1 - c
            if j == axes - 1:
                p = L - 1 - p
            pos.append(p)
            prefix += c
        order.append(tuple(2 * p + 1 for p in pos))
    return order


@dataclass(frozen=True)
class HorseshoeMap:
    grid: SubdivisionGrid
    assignment: tuple[tuple[int, tuple[int, ...]], ...]  # (odd strip, leg index)
    pamap: PAMap

    @property
    def cube(self) -> Cube:
        return self.grid.cube

    @property
    def expansion(self) -> int:
        """First-axis expansion factor of every piece."""
        return 2 * self.grid.L ** (self.grid.n - 1) - 1

    @property
    def contraction_denominator(self) -> int:
        """Transverse contraction is 1 over this factor."""
        return 2 * self.grid.L - 1

    def leg_for_strip(self, l: int) -> tuple[int, ...]:
        for strip, leg in self.assignment:
            if strip == l:
                return leg
        raise KeyError(f"strip {l} is not assigned")

    def strip_for_leg(self, leg: tuple[int, ...]) -> int:
        for strip, assigned in self.assignment:
            if assigned == leg:
                return strip
        raise KeyError(f"leg {leg} is not assigned")


def _strip_piece(grid: SubdivisionGrid, l: int, leg: tuple[int, ...]) -> AffinePiece:
    cube = grid.cube
    kappa = 2 * grid.L ** (grid.n - 1) - 1
    eta = 2 * grid.L - 1
    scale = [Fraction(kappa)]
    offset = [cube.lo - grid.s[l - 1] * kappa]
    for i in leg:
        scale.append(Fraction(1, eta))
        offset.append(grid.t[i - 1] - Fraction(cube.lo, eta))
    return AffinePiece(grid.strip_box(l), tuple(scale), tuple(offset))


def build_horseshoe(cube: Cube, L: int, n: int | None = None) -> HorseshoeMap:
    """The canonical L-leg horseshoe on the cube."""
    grid = subdivide(cube, L, n)
    strips = grid.odd_strip_indices()
    legs = boustrophedon_legs(L, grid.n)
    assignment = tuple(zip(strips, legs))
    pieces = tuple(_strip_piece(grid, l, leg) for l, leg in assignment)
    return HorseshoeMap(grid, assignment, PAMap(cube, pieces))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            mark = "ok" if c.passed else "FAIL"
            text = f"  [{mark}] {c.name}"
            if c.detail and not c.passed:
                text += f": {c.detail}"
            lines.append(text)
        return "\n".join(lines)


def validate_horseshoe(h: HorseshoeMap) -> ValidationReport:
    """Check the defining identities; failures come back as report entries."""
    grid, cube = h.grid, h.grid.cube
    checks: list[CheckResult] = []

    def add(name: str, passed: bool, detail: str = ""):
        checks.append(CheckResult(name, passed, detail))

    L, n = grid.L, grid.n
    t_step = Fraction(cube.side, 2 * L - 1)
    s_step = Fraction(cube.side, 2 * L ** (n - 1) - 1)
    t_ok = len(grid.t) == 2 * L and all(
        b - a == t_step for a, b in zip(grid.t, grid.t[1:])
    ) and grid.t[0] == cube.lo and grid.t[-1] == cube.hi
    add("t-grid uniform spacing", t_ok)
    s_ok = len(grid.s) == 2 * L ** (n - 1) and all(
        b - a == s_step for a, b in zip(grid.s, grid.s[1:])
    ) and grid.s[0] == cube.lo and grid.s[-1] == cube.hi
    add("s-grid uniform spacing", s_ok)

    odd = grid.odd_strip_indices()
    assigned_strips = [l for l, _ in h.assignment]
    add(
        "one piece per odd strip",
        sorted(assigned_strips) == odd and len(h.pamap.pieces) == len(odd),
        f"assigned {sorted(assigned_strips)} vs odd strips {odd}",
    )
    add(
        "strip-to-leg assignment is a bijection",
        sorted(leg for _, leg in h.assignment) == sorted(grid.odd_leg_indices()),
    )

    by_domain = {tuple(p.domain.intervals): p for p in h.pamap.pieces}
    images_ok, crossing_ok, domains_ok = True, True, True
    detail = ""
    for l, leg in h.assignment:
        strip_box = grid.strip_box(l)
        piece = by_domain.get(tuple(strip_box.intervals))
        if piece is None:
            domains_ok = False
            detail = f"no piece with domain = strip {l}"
            continue
        img = piece.image_box()
        if img != grid.leg_box(leg):
            images_ok = False
            detail = f"strip {l} image differs from leg {leg}"
        if img.intervals[0] != (cube.lo, cube.hi):
            crossing_ok = False
    add("piece domains are exactly the odd strips", domains_ok, detail)
    add("each strip maps onto its assigned leg", images_ok, detail)
    add("every leg crosses the full first axis", crossing_ok)

    even_ok = True
    for l in range(2, grid.strip_count + 1, 2):
        box = grid.strip_box(l)
        for piece in h.pamap.pieces:
            if piece.domain.interiors_overlap(box):
                even_ok = False
    add("even strips escape (no piece covers them)", even_ok)

    low_corner: Point = (cube.lo,) * (n - 1) + (cube.hi,)
    high_corner: Point = (cube.hi,) * (n - 1) + (cube.lo,)
    add("corner (a,...,a,b) is fixed", h.pamap.apply(low_corner) == low_corner)
    add("corner (b,...,b,a) is fixed", h.pamap.apply(high_corner) == high_corner)

    return ValidationReport(tuple(checks))


def square(h: HorseshoeMap) -> PAMap:
    """The second iterate as an explicit piecewise-affine map.

    One piece per ordered pair of odd strips (l, l'): its domain is the part
    of strip l that lands in strip l' after one application, and the piece is
    the exact composition of the two strip maps.  Full crossing makes every
    such domain nonempty, so there are L^(2(n-1)) pieces.
    """
    grid = h.grid
    by_strip = {l: _strip_piece(grid, l, leg) for l, leg in h.assignment}
    pieces = []
    for l, first in by_strip.items():
        for l2, second in by_strip.items():
            domain = first.preimage_box(grid.strip_box(l2))
            if domain is None or domain.is_degenerate():
                raise AssertionError("full crossing violated")
            pieces.append(first.then(second, domain))
    return PAMap(h.cube, tuple(pieces))
