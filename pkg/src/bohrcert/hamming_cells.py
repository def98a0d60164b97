"""Exact combinatorics of bias cells in (Z/pZ)^d.

Vectors over Z/pZ, Hamming weights relative to a nonzero-count profile,
bias cells selected by a residue subset, orbit transversals under the
all-ones shift, exact cell counting by convolution, and the tiling search
that locates the least dimension whose biased family beats a density
threshold.

All thresholds are exact rationals; counting is integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator

DEFAULT_D_CAP = 4096
DEFAULT_ENUM_CAP = 4_000_000


@dataclass(frozen=True)
class GpVector:
    """A point of (Z/pZ)^d with coordinates stored as residues in [0, p)."""

    p: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if any(not (0 <= c < self.p) for c in self.coords):
            raise ValueError("coordinates must be residues in [0, p)")

    @property
    def d(self) -> int:
        return len(self.coords)

    def weight(self) -> int:
        """Number of nonzero coordinates."""
        return sum(1 for c in self.coords if c != 0)

    def weight_at(self, t: int) -> int:
        """Number of coordinates equal to the residue t."""
        return self.coords.count(t % self.p)

    def profile(self) -> tuple[int, ...]:
        """Residue count vector (weight_at(0), ..., weight_at(p-1))."""
        counts = [0] * self.p
        for c in self.coords:
            counts[c] += 1
        return tuple(counts)

    def add(self, other: "GpVector") -> "GpVector":
        if self.p != other.p or self.d != other.d:
            raise ValueError("mismatched vector shapes")
        return GpVector(self.p, tuple((a + b) % self.p for a, b in zip(self.coords, other.coords)))

    def shift_all(self, r: int) -> "GpVector":
        """Add r * (1, ..., 1)."""
        return GpVector(self.p, tuple((c + r) % self.p for c in self.coords))


def ones(p: int, d: int) -> GpVector:
    return GpVector(p, (1 % p,) * d)


@dataclass(frozen=True)
class CellSpec:
    """Bias cell: residues in C must appear more than d/p + k times,
    residues outside C fewer than d/p - k times."""

    p: int
    d: int
    k: int
    residues: frozenset[int]

    def __post_init__(self):
        if not (1 <= self.k):
            raise ValueError("k must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        rs = frozenset(r % self.p for r in self.residues)
        if not rs or len(rs) == self.p:
            raise ValueError("residue set must be a proper nonempty subset of Z/pZ")
        object.__setattr__(self, "residues", rs)

    def shifted(self, r: int = 1) -> "CellSpec":
        return CellSpec(self.p, self.d, self.k, frozenset((c + r) % self.p for c in self.residues))


def bias_contains(spec: CellSpec, x: GpVector) -> bool:
    """Exact membership test against the rational thresholds d/p +- k."""
    if x.p != spec.p or x.d != spec.d:
        raise ValueError("vector shape does not match cell")
    mean = Fraction(spec.d, spec.p)
    for t, m in enumerate(x.profile()):
        if t in spec.residues:
            if not m > mean + spec.k:
                return False
        else:
            if not m < mean - spec.k:
                return False
    return True


def hamming_ball(p: int, d: int, radius: int) -> Iterator[GpVector]:
    """All vectors of weight <= radius (small d only)."""
    if p ** d > DEFAULT_ENUM_CAP and radius >= d:
        raise ValueError("ball too large to enumerate")
    for w in range(radius + 1):
        for idx in combinations(range(d), w):
            for vals in product(range(1, p), repeat=w):
                coords = [0] * d
                for i, v in zip(idx, vals):
                    coords[i] = v
                yield GpVector(p, tuple(coords))


def hamming_contains(p: int, d: int, radius: int, x: GpVector) -> bool:
    if x.p != p or x.d != d:
        raise ValueError("vector shape mismatch")
    return x.weight() <= radius


@dataclass(frozen=True)
class Transversal:
    """One representative per orbit of proper nonempty residue subsets
    under C -> C + 1."""

    p: int
    reps: tuple[frozenset[int], ...]


def orbit_transversal(p: int) -> Transversal:
    """Lexicographically least representative per shift orbit, subsets
    compared as sorted residue tuples."""
    if p < 2:
        raise ValueError("p must be >= 2")
    if p > 22:
        raise ValueError("transversal enumeration capped at p <= 22")
    seen: set[frozenset[int]] = set()
    reps: list[frozenset[int]] = []
    all_subsets = []
    for size in range(1, p):
        for comb in combinations(range(p), size):
            all_subsets.append(frozenset(comb))
    all_subsets.sort(key=lambda s: (len(s), tuple(sorted(s))))
    for cand in all_subsets:
        if cand in seen:
            continue
        orbit = [frozenset((c + r) % p for c in cand) for r in range(p)]
        least = min(orbit, key=lambda s: tuple(sorted(s)))
        if least not in seen:
            reps.append(least)
        seen.update(orbit)
    reps.sort(key=lambda s: (len(s), tuple(sorted(s))))
    return Transversal(p, tuple(reps))


@dataclass(frozen=True)
class CellFamily:
    """Union of bias cells: kind "E0" over a transversal, "E" over every
    proper nonempty residue subset."""

    p: int
    d: int
    k: int
    kind: str  # "E0" | "E"

    def __post_init__(self):
        if self.kind not in ("E0", "E"):
            raise ValueError("kind must be E0 or E")

    def transversal(self) -> Transversal:
        return orbit_transversal(self.p)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "d": self.d,
            "kind": self.kind,
            "transversal": [sorted(c) for c in self.transversal().reps],
        }

    @staticmethod
    def from_json(obj: dict) -> "CellFamily":
        fam = CellFamily(int(obj["p"]), int(obj["d"]), int(obj["k"]), str(obj["kind"]))
        want = [sorted(c) for c in fam.transversal().reps]
        if obj.get("transversal") is not None and [list(c) for c in obj["transversal"]] != want:
            raise ValueError("serialized transversal does not match the canonical one")
        return fam


def _cell_of(fam: CellFamily, x: GpVector) -> frozenset[int] | None:
    """The unique cell containing x, or None. Derived from the count
    profile: candidate C is forced, then checked."""
    mean = Fraction(fam.d, fam.p)
    prof = x.profile()
    cand = frozenset(t for t, m in enumerate(prof) if m > mean + fam.k)
    if not cand or len(cand) == fam.p:
        return None
    for t, m in enumerate(prof):
        if t not in cand and not m < mean - fam.k:
            return None
    return cand


def family_contains(fam: CellFamily, x: GpVector) -> bool:
    if x.p != fam.p or x.d != fam.d:
        raise ValueError("vector shape mismatch")
    cell = _cell_of(fam, x)
    if cell is None:
        return False
    if fam.kind == "E":
        return True
    return cell in fam.transversal().reps


# counting -------------------------------------------------------------

def _count_range(p: int, d: int, k: int, inside: bool) -> tuple[int, int]:
    """Admissible per-residue count range [lo, hi] for residues in C
    (inside=True) or outside C."""
    mean = Fraction(d, p)
    if inside:
        lo = math.floor(mean + k) + 1
        return lo, d
    hi = math.ceil(mean - k) - 1
    return 0, hi


@lru_cache(maxsize=None)
def _count_bias_by_size(p: int, d: int, k: int, csize: int) -> int:
    """|Bias(C, k, d)| depends on C only through |C|: any residue bijection
    carrying C to C' permutes coordinates' values and fixes the count."""
    lo_in, hi_in = _count_range(p, d, k, True)
    lo_out, hi_out = _count_range(p, d, k, False)
    if hi_out < 0 and csize < p:
        return 0
    if lo_in > d:
        return 0
    # dp[u] = weighted assignments using u coordinates so far
    dp = [0] * (d + 1)
    dp[0] = 1
    for t in range(p):
        lo, hi = (lo_in, hi_in) if t < csize else (lo_out, hi_out)
        lo = max(lo, 0)
        ndp = [0] * (d + 1)
        for u in range(d + 1):
            if dp[u] == 0:
                continue
            top = min(hi, d - u)
            for m in range(lo, top + 1):
                ndp[u + m] += dp[u] * math.comb(d - u, m)
        dp = ndp
    return dp[d]


def count_bias(spec: CellSpec) -> int:
    """Exact |Bias(C, k, d)| by per-residue convolution with binomial
    placement weights."""
    return _count_bias_by_size(spec.p, spec.d, spec.k, len(spec.residues))


def _orbit_size(p: int, cell: frozenset[int]) -> int:
    for r in range(1, p + 1):
        if frozenset((c + r) % p for c in cell) == cell:
            return r
    return p


def count_family(fam: CellFamily) -> int:
    """Exact size of the cell family union; cells are pairwise disjoint so
    the count is a plain sum over cells."""
    reps = fam.transversal().reps
    total = 0
    for rep in reps:
        cnt = _count_bias_by_size(fam.p, fam.d, fam.k, len(rep))
        if fam.kind == "E":
            cnt *= _orbit_size(fam.p, rep)
        total += cnt
    return total


def family_fraction(fam: CellFamily) -> Fraction:
    return Fraction(count_family(fam), fam.p ** fam.d)


def enumerate_family(fam: CellFamily, cap: int = DEFAULT_ENUM_CAP) -> list[GpVector]:
    """Explicit member list, generated profile-by-profile (never a scan of
    all p^d vectors)."""
    n = count_family(fam)
    if n > cap:
        raise ValueError(f"family has {n} members, above the cap {cap}")
    reps = list(fam.transversal().reps)
    cells: list[frozenset[int]] = []
    for rep in reps:
        if fam.kind == "E":
            orbit = {frozenset((c + r) % fam.p for c in rep) for r in range(fam.p)}
            cells.extend(sorted(orbit, key=lambda s: tuple(sorted(s))))
        else:
            cells.append(rep)
    out: list[GpVector] = []
    for cell in cells:
        out.extend(_enumerate_cell(fam.p, fam.d, fam.k, cell))
    return out


def _enumerate_cell(p: int, d: int, k: int, cell: frozenset[int]) -> Iterator[GpVector]:
    lo_in, hi_in = _count_range(p, d, k, True)
    lo_out, hi_out = _count_range(p, d, k, False)
    if hi_out < 0 or lo_in > d:
        return
    ranges = []
    for t in range(p):
        if t in cell:
            ranges.append(range(max(lo_in, 0), hi_in + 1))
        else:
            ranges.append(range(max(lo_out, 0), hi_out + 1))

    def profiles(t: int, left: int) -> Iterator[tuple[int, ...]]:
        if t == p - 1:
            if left in ranges[t]:
                yield (left,)
            return
        for m in ranges[t]:
            if m > left:
                break
            for rest in profiles(t + 1, left - m):
                yield (m,) + rest

    for prof in profiles(0, d):
        yield from _vectors_with_profile(p, d, prof)


def _vectors_with_profile(p: int, d: int, prof: tuple[int, ...]) -> Iterator[GpVector]:
    def place(positions: tuple[int, ...], t: int) -> Iterator[dict[int, int]]:
        if t == p:
            yield {}
            return
        for chosen in combinations(positions, prof[t]):
            remaining = tuple(i for i in positions if i not in set(chosen))
            for rest in place(remaining, t + 1):
                assign = {i: t for i in chosen}
                assign.update(rest)
                yield assign

    for assign in place(tuple(range(d)), 0):
        yield GpVector(p, tuple(assign[i] for i in range(d)))


def eprime_bound(p: int, d: int, k: int) -> Fraction:
    """Upper bound p(2k+1)(p-1)^d M_d / p^d on the complement fraction,
    M_d = max binomial C(d, m) over m <= d/p + k."""
    b = math.floor(Fraction(d, p) + k)
    b = min(b, d)
    if b < 0:
        raise ValueError("empty range for M_d")
    m_star = min(b, d // 2)
    m_d = math.comb(d, m_star)
    return Fraction(p * (2 * k + 1) * (p - 1) ** d * m_d, p ** d)


# tiling search --------------------------------------------------------

@dataclass(frozen=True)
class GpTileResult:
    p: int
    k: int
    epsilon: Fraction
    d: int
    family: CellFamily      # E0(k+1, d), the tile
    inner: CellFamily       # E0(1, d), the enlarged tile
    count: int
    threshold_num: int      # count must satisfy count * p^? comparison; kept for audit
    screened: bool

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.count, self.p ** self.d)


def _float_family_fraction(p: int, d: int, k: int) -> float:
    """Float screen of count_family(E0)/p^d, mirroring the exact DP on
    probability scale. Never part of a certified claim."""
    trans = orbit_transversal(p)
    total = 0.0
    for rep in trans.reps:
        csize = len(rep)
        lo_in = math.floor(Fraction(d, p) + k) + 1
        hi_out = math.ceil(Fraction(d, p) - k) - 1
        if hi_out < 0 or lo_in > d:
            continue
        dp = {0: 1.0}
        for t in range(p):
            if t < csize:
                lo, hi = lo_in, d
            else:
                lo, hi = 0, hi_out
            ndp: dict[int, float] = {}
            for u, w in dp.items():
                top = min(hi, d - u)
                for m in range(lo, top + 1):
                    ndp[u + m] = ndp.get(u + m, 0.0) + w * math.comb(d - u, m) * p ** (-float(m))
            dp = ndp
        total += dp.get(d, 0.0)
    return total


def gp_tile(
    p: int,
    k: int,
    epsilon: Fraction | float | str,
    d_cap: int = DEFAULT_D_CAP,
) -> GpTileResult:
    """Least d whose bias family E0(k+1, d) exceeds the (1-eps)/p density
    threshold; returns the tile family together with the radius-1 family it
    sits inside.

    The fraction is not monotone in d (threshold floors move with d mod p),
    so d increments one at a time. For p >= 3 and d past a small bound each
    candidate is screened with a float DP first; the returned d and its
    predecessor, and any float-marginal candidate, are confirmed exactly.

    Dimensions at or below p*(k+2) are skipped as degenerate: there the
    out-of-cell bound ceil(d/p - (k+1)) - 1 is below 1, every suppressed
    residue is forbidden outright, and each cell collapses to a handful of
    near-constant vectors. A threshold crossing in that regime is an
    artifact of tiny d rather than concentration of the weight profile, so
    the search starts at the least d whose suppressed residues may still
    appear at least once.
    """
    eps = Fraction(epsilon)
    if not (0 < eps < 1):
        raise ValueError("epsilon must be in (0, 1)")
    if k < 1:
        raise ValueError("k must be >= 1")
    thr = (1 - eps) / p
    screen_from = 48 if p >= 3 else d_cap + 1
    screened = False
    best_seen = 0.0
    d_min = p * (k + 2) + 1

    def exact_success(dd: int) -> bool:
        fam = CellFamily(p, dd, k + 1, "E0")
        return Fraction(count_family(fam), p ** dd) > thr

    d = d_min
    while d <= d_cap:
        if d >= screen_from:
            screened = True
            f = _float_family_fraction(p, d, k + 1)
            best_seen = max(best_seen, f)
            if f - float(thr) < -1e-9:
                d += 1
                continue
        if exact_success(d):
            # exact minimality boundary: walk back over any screen misses
            while d > d_min and exact_success(d - 1):
                d -= 1
            fam = CellFamily(p, d, k + 1, "E0")
            inner = CellFamily(p, d, 1, "E0")
            return GpTileResult(
                p=p, k=k, epsilon=eps, d=d, family=fam, inner=inner,
                count=count_family(fam), threshold_num=thr.numerator,
                screened=screened,
            )
        best_seen = max(best_seen, float(family_fraction(CellFamily(p, d, k + 1, "E0"))))
        d += 1
    raise ValueError(
        f"tile search hit the cap d={d_cap}; best fraction {best_seen:.3g} "
        f"below threshold {float(thr):.3g}"
    )
