"""Exact rational geometry on the d-torus.

Wrapped half-open intervals, axis-aligned box unions, cube embeddings of
residue vectors, approximate Hamming balls, Minkowski sums, Haar measure,
and separation distances. All arithmetic is Fraction-exact; containment and
disjointness results are certificates, not float observations.

Canonical form stores wrap-free, pairwise-disjoint boxes: a normalization
pass splits wrapping intervals at 0 and subtracts overlaps. On canonical
data the measure is a plain sum of volumes and subset tests are emptiness
checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_BOX_CAP = 1_000_000

Rat = Fraction | int | str

ZERO = Fraction(0)
ONE = Fraction(1)


def _frac(x: Rat) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _mod1(x: Fraction) -> Fraction:
    return x % 1


@dataclass(frozen=True)
class TorusInterval:
    """Half-open arc [start, start + length) mod 1; length 1 is the full circle."""

    start: Fraction
    length: Fraction

    def __post_init__(self):
        object.__setattr__(self, "start", _frac(self.start))
        object.__setattr__(self, "length", _frac(self.length))
        if not (ZERO <= self.start < ONE):
            raise ValueError(f"start {self.start} outside [0, 1)")
        if not (ZERO <= self.length <= ONE):
            raise ValueError(f"length {self.length} outside [0, 1]")

    def contains(self, x: Rat, closed: bool = False) -> bool:
        if self.length == 0:
            return False
        if self.length == 1:
            return True
        off = _mod1(_frac(x) - self.start)
        return off <= self.length if closed else off < self.length

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        """Wrap-free (lo, hi) segments within [0, 1] covering the arc."""
        if self.length == 0:
            return []
        if self.length == 1:
            return [(ZERO, ONE)]
        end = self.start + self.length
        if end <= 1:
            return [(self.start, end)]
        return [(self.start, ONE), (ZERO, end - 1)]


@dataclass(frozen=True)
class Box:
    """Product of per-axis arcs."""

    intervals: tuple[TorusInterval, ...]

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        if not self.intervals:
            raise ValueError("box needs dimension >= 1")

    @property
    def d(self) -> int:
        return len(self.intervals)

    @property
    def volume(self) -> Fraction:
        v = ONE
        for iv in self.intervals:
            v *= iv.length
        return v

    def contains(self, point: "RatPoint", closed: bool = False) -> bool:
        return all(
            iv.contains(x, closed) for iv, x in zip(self.intervals, point.coords)
        )


@dataclass(frozen=True)
class RatPoint:
    """Point of T^d with exact rational coordinates in [0, 1)."""

    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(_mod1(_frac(c)) for c in self.coords))
        if not self.coords:
            raise ValueError("point needs dimension >= 1")

    @property
    def d(self) -> int:
        return len(self.coords)

    def add(self, other: "RatPoint") -> "RatPoint":
        if self.d != other.d:
            raise ValueError("mismatched dimensions")
        return RatPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def scale(self, n: int) -> "RatPoint":
        return RatPoint(tuple(n * c for c in self.coords))


@dataclass(frozen=True)
class BoxUnion:
    """Finite union of boxes; `closed` marks the union as standing for its closure."""

    d: int
    boxes: tuple[Box, ...]
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        for b in self.boxes:
            if b.d != self.d:
                raise ValueError("box dimension mismatch")

    def contains(self, point: RatPoint) -> bool:
        if point.d != self.d:
            raise ValueError("mismatched dimensions")
        return any(b.contains(point, self.closed) for b in self.boxes)


# Wrap-free boxes are tuples of (lo, hi) segment pairs, 0 <= lo < hi <= 1.

_Seg = tuple[Fraction, Fraction]
_LinBox = tuple[_Seg, ...]


def _linear_boxes(box: Box) -> Iterable[_LinBox]:
    per_axis = [iv.pieces() for iv in box.intervals]
    if any(not p for p in per_axis):
        return
    yield from itertools.product(*per_axis)


def _sub_linear(a: _LinBox, b: _LinBox) -> list[_LinBox]:
    """a minus b as disjoint wrap-free boxes; both inputs wrap-free."""
    inter = []
    for (l1, h1), (l2, h2) in zip(a, b):
        lo, hi = max(l1, l2), min(h1, h2)
        if lo >= hi:
            return [a]
        inter.append((lo, hi))
    out = []
    for j, ((l1, h1), (il, ih)) in enumerate(zip(a, inter)):
        head = tuple(inter[:j])
        tail = a[j + 1 :]
        if l1 < il:
            out.append(head + ((l1, il),) + tail)
        if ih < h1:
            out.append(head + ((ih, h1),) + tail)
    return out


def _box_of(lin: _LinBox) -> Box:
    return Box(tuple(TorusInterval(lo, hi - lo) for lo, hi in lin))


def normalize(u: BoxUnion, cap: int = DEFAULT_BOX_CAP) -> BoxUnion:
    """Canonical form: wrap-free, pairwise-disjoint, sorted boxes.

    Idempotent; preserves the point set and hence the measure. Raises if the
    disjoint decomposition would exceed `cap` boxes.
    """
    pending = sorted(lb for b in u.boxes for lb in _linear_boxes(b))
    result: list[_LinBox] = []
    for nb in pending:
        frags = [nb]
        for r in result:
            frags = [piece for f in frags for piece in _sub_linear(f, r)]
            if not frags:
                break
        result.extend(frags)
        if len(result) > cap:
            raise ValueError(f"box union exceeds cap of {cap} boxes")
    result.sort()
    return BoxUnion(u.d, tuple(_box_of(lin) for lin in result), u.closed)


def measure(u: BoxUnion) -> Fraction:
    """Haar measure: sum of box volumes over the disjoint canonical form."""
    return sum((b.volume for b in normalize(u).boxes), ZERO)


def translate(u: BoxUnion, v: RatPoint | Sequence[Rat]) -> BoxUnion:
    """Shift every box by v mod 1; wrapping intervals are re-split."""
    shift = v.coords if isinstance(v, RatPoint) else tuple(_frac(c) for c in v)
    if len(shift) != u.d:
        raise ValueError("mismatched dimensions")
    boxes = []
    for b in u.boxes:
        boxes.append(
            Box(
                tuple(
                    TorusInterval(_mod1(iv.start + dx), iv.length)
                    for iv, dx in zip(b.intervals, shift)
                )
            )
        )
    return normalize(BoxUnion(u.d, tuple(boxes), u.closed))


def _arc_sum(a: TorusInterval, b: TorusInterval) -> TorusInterval:
    total = a.length + b.length
    if total >= 1:
        return TorusInterval(ZERO, ONE)
    return TorusInterval(_mod1(a.start + b.start), total)


def minkowski_sum(u: BoxUnion, v: BoxUnion, cap: int = DEFAULT_BOX_CAP) -> BoxUnion:
    """Pointwise sumset: union over box pairs of per-axis arc sums.

    Zero-length sides make a summand degenerate (the half-open box is empty
    while its arc sum is not) and are rejected.
    """
    if u.d != v.d:
        raise ValueError("mismatched dimensions")
    for w in (u, v):
        for b in w.boxes:
            if any(iv.length == 0 for iv in b.intervals):
                raise ValueError("degenerate summand: zero-length interval")
    boxes = []
    for a in u.boxes:
        for b in v.boxes:
            boxes.append(
                Box(tuple(_arc_sum(x, y) for x, y in zip(a.intervals, b.intervals)))
            )
    return normalize(BoxUnion(u.d, tuple(boxes), u.closed or v.closed), cap)


def intersection(u: BoxUnion, v: BoxUnion) -> BoxUnion:
    """Pairwise box intersection on canonical forms; result is canonical."""
    if u.d != v.d:
        raise ValueError("mismatched dimensions")
    ub, vb = normalize(u), normalize(v)
    out: list[_LinBox] = []
    for a in ub.boxes:
        la = tuple((iv.start, iv.start + iv.length) for iv in a.intervals)
        for b in vb.boxes:
            segs = []
            for (l1, h1), iv in zip(la, b.intervals):
                lo, hi = max(l1, iv.start), min(h1, iv.start + iv.length)
                if lo >= hi:
                    break
                segs.append((lo, hi))
            else:
                out.append(tuple(segs))
    out.sort()
    return BoxUnion(u.d, tuple(_box_of(lin) for lin in out), u.closed and v.closed)


def is_subset(u: BoxUnion, v: BoxUnion) -> bool:
    """Exact containment of the half-open data: u minus v is empty.

    For unions carrying the closed flag the same test decides containment of
    the closures: on the common refinement grid both unions are unions of
    whole half-open cells, so closure(u) is inside closure(v) exactly when
    u is inside v.
    """
    if u.d != v.d:
        raise ValueError("mismatched dimensions")
    # wrap-split only; subtracting overlapping v-boxes in sequence is exact,
    # so no disjoint decomposition (and its fragment blowup) is needed
    vlin = [lb for b in v.boxes for lb in _linear_boxes(b)]
    for ub in u.boxes:
        for a in _linear_boxes(ub):
            frags = [a]
            for b in vlin:
                frags = [piece for f in frags for piece in _sub_linear(f, b)]
                if not frags:
                    break
            if frags:
                return False
    return True


def same_set(u: BoxUnion, v: BoxUnion) -> bool:
    return is_subset(u, v) and is_subset(v, u)


def complement(u: BoxUnion, cap: int = DEFAULT_BOX_CAP) -> BoxUnion:
    """T^d minus the half-open union, again as a half-open union."""
    if u.closed:
        raise ValueError("complement of a closed union is open; use half-open data")
    un = normalize(u, cap)
    frags: list[_LinBox] = [tuple((ZERO, ONE) for _ in range(u.d))]
    for b in un.boxes:
        lb = tuple((iv.start, iv.start + iv.length) for iv in b.intervals)
        frags = [piece for f in frags for piece in _sub_linear(f, lb)]
        if len(frags) > cap:
            raise ValueError(f"complement exceeds cap of {cap} boxes")
    frags.sort()
    return BoxUnion(u.d, tuple(_box_of(lin) for lin in frags), False)


def _closed_halfopen_meet(a: Box, w: Box) -> bool:
    # per-axis: closed segment [lo1, hi1] (torus point 1 identified with 0)
    # versus half-open [lo2, hi2); the product meets iff every axis meets
    for iva, ivw in zip(a.intervals, w.intervals):
        lo1, hi1 = iva.start, iva.start + iva.length
        lo2, hi2 = ivw.start, ivw.start + ivw.length
        x = max(lo1, lo2)
        if x <= hi1 and x < hi2:
            continue
        if hi1 == 1 and lo2 == 0:
            continue
        return False
    return True


def closure_subset(u: BoxUnion, v: BoxUnion, cap: int = DEFAULT_BOX_CAP) -> bool:
    """Whether closure(u) lies inside the point set of v.

    For closed v this reduces to the half-open containment test. For
    half-open v the closure may stick out through box faces, so the check is
    exact emptiness of closure(u) against the complement of v, box pair by
    box pair.
    """
    if u.d != v.d:
        raise ValueError("mismatched dimensions")
    if v.closed:
        return is_subset(u, v)
    w = complement(v, cap)
    un = normalize(u, cap)
    for a in un.boxes:
        for b in w.boxes:
            if _closed_halfopen_meet(a, b):
                return False
    return True


def _arc_distance(a: TorusInterval, b: TorusInterval) -> Fraction:
    """Distance between the closed arcs; 0 iff the closures meet."""
    if a.length >= 1 or b.length >= 1:
        return ZERO
    if _mod1(b.start - a.start) <= a.length or _mod1(a.start - b.start) <= b.length:
        return ZERO
    gap1 = _mod1(b.start - (a.start + a.length))
    gap2 = _mod1(a.start - (b.start + b.length))
    return min(gap1, gap2)


def separation(u: BoxUnion, v: BoxUnion) -> Fraction:
    """Sup-metric distance between the closures; 0 iff the closures meet."""
    if u.d != v.d:
        raise ValueError("mismatched dimensions")
    ub = [b for b in u.boxes if all(iv.length > 0 for iv in b.intervals)]
    vb = [b for b in v.boxes if all(iv.length > 0 for iv in b.intervals)]
    if not ub or not vb:
        raise ValueError("separation of an empty union")
    best = None
    for a in ub:
        for b in vb:
            dist = ZERO
            for x, y in zip(a.intervals, b.intervals):
                axis = _arc_distance(x, y)
                if axis > dist:
                    dist = axis
            if best is None or dist < best:
                best = dist
            if best == 0:
                return ZERO
    return best


def phi(x, N: int) -> RatPoint:
    """Coordinatewise x_j / N; the standard embedding of residue vectors."""
    coords = tuple(getattr(x, "coords", x))
    if not coords:
        raise ValueError("empty vector")
    for c in coords:
        if not (0 <= c < N):
            raise ValueError(f"coordinate {c} outside [0, {N})")
    return RatPoint(tuple(Fraction(c, N) for c in coords))


def cube_embed(A: Iterable, N: int, epsilon: Rat = 0) -> BoxUnion:
    """Union over A of cubes of side 1/N - 2*eps anchored at phi(a) + eps.

    At eps = 0 the cubes tile the torus as A runs over all of (Z/NZ)^d.
    """
    eps = _frac(epsilon)
    if not (ZERO <= eps < Fraction(1, 2 * N)):
        raise ValueError(f"epsilon {eps} outside [0, 1/{2 * N})")
    side = Fraction(1, N) - 2 * eps
    seen = set()
    boxes = []
    d = None
    for a in A:
        coords = tuple(getattr(a, "coords", a))
        if d is None:
            d = len(coords)
        elif len(coords) != d:
            raise ValueError("mixed dimensions in vector list")
        if coords in seen:
            continue
        seen.add(coords)
        anchor = phi(coords, N)
        boxes.append(
            Box(tuple(TorusInterval(c + eps, side) for c in anchor.coords))
        )
    if d is None:
        raise ValueError("need at least one vector to fix the dimension")
    # distinct anchors on the 1/N grid with side <= 1/N never overlap or
    # wrap, so sorting alone yields the canonical form
    boxes.sort(key=lambda b: tuple(iv.start for iv in b.intervals))
    return BoxUnion(d, tuple(boxes))


def approx_hamming(d: int, k: int, eta: Rat, closed: bool = False) -> BoxUnion:
    """Points with at most k coordinates eta-far from 0.

    Union over coordinate subsets F of size k of boxes that are free on F
    and within (-eta, eta) elsewhere; subsets smaller than k give nested
    boxes, so size-k subsets suffice. The near-0 window is stored as the
    half-open arc [-eta, eta); the closed flag marks the union as standing
    for its closure [-eta, eta].
    """
    eta = _frac(eta)
    if not (ZERO < eta < Fraction(1, 2)):
        raise ValueError(f"eta {eta} outside (0, 1/2)")
    if not (0 <= k < d):
        raise ValueError(f"need 0 <= k < d, got k={k} d={d}")
    full = TorusInterval(ZERO, ONE)
    near = TorusInterval(ONE - eta, 2 * eta)
    boxes = []
    for F in itertools.combinations(range(d), k):
        fs = set(F)
        boxes.append(
            Box(tuple(full if j in fs else near for j in range(d)))
        )
    return normalize(BoxUnion(d, tuple(boxes), closed))


def _rat_pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def to_json(u: BoxUnion) -> dict:
    return {
        "d": u.d,
        "closed": u.closed,
        "boxes": [
            [[_rat_pair(iv.start), _rat_pair(iv.length)] for iv in b.intervals]
            for b in u.boxes
        ],
    }


def from_json(data: dict) -> BoxUnion:
    boxes = []
    for raw in data["boxes"]:
        if len(raw) != data["d"]:
            raise ValueError("box dimension mismatch in serialized union")
        boxes.append(
            Box(
                tuple(
                    TorusInterval(Fraction(s[0], s[1]), Fraction(l[0], l[1]))
                    for s, l in raw
                )
            )
        )
    return BoxUnion(data["d"], tuple(boxes), bool(data["closed"]))
