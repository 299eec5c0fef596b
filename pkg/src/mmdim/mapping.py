"""Piecewise-affine maps on a cube, with absorbing escape semantics.

A `PAMap` is a finite list of `AffinePiece`s whose domains have pairwise
disjoint interiors.  Applying the map to a point inside some piece domain
gives the exact affine image; points inside the ambient cube but outside
every piece domain (and points already outside) go to the absorbing
`ESCAPED` state.  Orbits that escape stay escaped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .geometry import Box, Cube, Point, find_interior_overlap


class _Escaped:
    """Absorbing out-of-system state."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Escaped"


ESCAPED = _Escaped()

MapState = "Point | _Escaped"


def is_escaped(state) -> bool:
    return state is ESCAPED


@dataclass(frozen=True)
class AffinePiece:
    """x -> offset + scale * x per axis, restricted to a box domain.

    A negative scale on an axis is an orientation reversal; `reflections`
    reports those axes.  Scales must be nonzero so every piece is invertible.
    """

    domain: Box
    scale: tuple[Fraction, ...]
    offset: tuple[Fraction, ...]

    def __post_init__(self):
        if not (self.domain.dim == len(self.scale) == len(self.offset)):
            raise ValueError("piece dimensions disagree")
        if any(s == 0 for s in self.scale):
            raise ValueError("piece scales must be nonzero")

    @property
    def reflections(self) -> tuple[bool, ...]:
        return tuple(s < 0 for s in self.scale)

    def apply_point(self, p: Point) -> Point:
        return tuple(o + s * x for x, s, o in zip(p, self.scale, self.offset))

    def image_box(self) -> Box:
        ivs = []
        for (lo, hi), s, o in zip(self.domain.intervals, self.scale, self.offset):
            a, b = o + s * lo, o + s * hi
            ivs.append((a, b) if a <= b else (b, a))
        return Box(tuple(ivs))

    def map_box(self, box: Box) -> Box:
        """Exact affine image of an arbitrary box (not clipped to the domain)."""
        ivs = []
        for (lo, hi), s, o in zip(box.intervals, self.scale, self.offset):
            a, b = o + s * lo, o + s * hi
            ivs.append((a, b) if a <= b else (b, a))
        return Box(tuple(ivs))

    def preimage_box(self, box: Box) -> Box | None:
        """Exact preimage of `box` intersected with the piece domain."""
        return self.invert().map_box(box).intersect(self.domain)

    def invert(self) -> "AffinePiece":
        inv_scale = tuple(1 / s for s in self.scale)
        inv_offset = tuple(-o / s for s, o in zip(self.scale, self.offset))
        return AffinePiece(self.image_box(), inv_scale, inv_offset)

    def then(self, other: "AffinePiece", domain: Box) -> "AffinePiece":
        """Composition other(self(x)) restricted to an explicitly given domain."""
        scale = tuple(s2 * s1 for s1, s2 in zip(self.scale, other.scale))
        offset = tuple(
            o2 + s2 * o1 for o1, s2, o2 in zip(self.offset, other.scale, other.offset)
        )
        return AffinePiece(domain, scale, offset)


def _piece_sort_key(piece: AffinePiece):
    return tuple(piece.domain.intervals)


@dataclass(frozen=True)
class PAMap:
    """Piecewise-affine map with escape outside the piece domains.

    Pieces are kept sorted by domain so that a point on a shared boundary is
    resolved to the lexicographically smallest piece, deterministically.
    """

    ambient: Cube
    pieces: tuple[AffinePiece, ...]
    _sorted: tuple[AffinePiece, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for piece in self.pieces:
            if piece.domain.dim != self.ambient.dim:
                raise ValueError("piece dimension differs from ambient cube")
        hit = find_interior_overlap([p.domain for p in self.pieces])
        if hit is not None:
            i, j = hit
            raise ValueError(f"piece domains {i} and {j} have overlapping interiors")
        object.__setattr__(self, "_sorted", tuple(sorted(self.pieces, key=_piece_sort_key)))

    def piece_for(self, p: Point) -> AffinePiece | None:
        for piece in self._sorted:
            if piece.domain.contains(p):
                return piece
        return None

    def apply(self, state):
        if state is ESCAPED:
            return ESCAPED
        piece = self.piece_for(state)
        if piece is None:
            return ESCAPED
        return piece.apply_point(state)

    def orbit(self, p: Point, steps: int) -> list:
        """States [x, f(x), ..., f^steps(x)]; escapes are absorbing."""
        states = [p]
        cur = p
        for _ in range(steps):
            cur = self.apply(cur)
            states.append(cur)
            if cur is ESCAPED:
                states.extend([ESCAPED] * (steps - len(states) + 1))
                break
        return states


def apply(pamap: PAMap, state):
    """Apply one step of the map; ESCAPED is absorbing."""
    return pamap.apply(state)
