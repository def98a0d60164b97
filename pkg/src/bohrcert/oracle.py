"""Brute-force oracles for cross-checking the exact algorithms.

Everything here is deliberately naive: full enumerations, backtracking
searches, and grid sampling, written without reusing any code from the
exact modules so that agreement between the two is evidence rather than
tautology. Small instances only, guarded by hard caps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

ENUM_CAP = 10_000_000
GRID_CAP = 100_000_000


@dataclass(frozen=True)
class GridSpec:
    d: int
    m: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.m < 2:
            raise ValueError("need at least 2 subdivisions per axis")
        if self.m ** self.d > GRID_CAP:
            raise ValueError(f"grid size {self.m}^{self.d} exceeds cap {GRID_CAP}")


@dataclass(frozen=True)
class CellTables:
    """Explicit membership tables for every bias cell at (p, d, k)."""

    p: int
    d: int
    k: int
    bias: dict
    e0: frozenset
    e: frozenset
    transversal: tuple


def enumerate_cells(p: int, d: int, k: int) -> CellTables:
    """Scan all p^d vectors against the defining inequalities of each cell."""
    if p ** d > ENUM_CAP:
        raise ValueError(f"p^d = {p ** d} exceeds cap {ENUM_CAP}")
    residues = list(range(p))
    cells = []
    for r in range(1, p):
        for combo in itertools.combinations(residues, r):
            cells.append(frozenset(combo))

    # orbit representatives by minimal sorted shift
    reps = []
    seen = set()
    for c in cells:
        if c in seen:
            continue
        orbit = []
        for n in range(p):
            shifted = frozenset((t + n) % p for t in c)
            orbit.append(shifted)
            seen.add(shifted)
        reps.append(min(orbit, key=lambda s: tuple(sorted(s))))
    reps.sort(key=lambda s: (len(s), tuple(sorted(s))))

    bias: dict = {c: set() for c in cells}
    for vec in itertools.product(residues, repeat=d):
        counts = [0] * p
        for x in vec:
            counts[x] += 1
        for c in cells:
            ok = True
            for t in residues:
                if t in c:
                    if not (counts[t] * p > d + k * p):
                        ok = False
                        break
                else:
                    if not (counts[t] * p < d - k * p):
                        ok = False
                        break
            if ok:
                bias[c].add(vec)

    e0 = frozenset(v for c in reps for v in bias[c])
    e = frozenset(v for c in cells for v in bias[c])
    return CellTables(
        p, d, k,
        {c: frozenset(v) for c, v in bias.items()},
        e0, e, tuple(reps),
    )


def exhaustive_avoiding(S: Iterable[int], N: int) -> int:
    """Max |A|, A in {0..N-1}, A+S in {0..N-1}, A disjoint from A+S.

    Backtracking over all subsets with a count-bound prune.
    """
    if N > 24:
        raise ValueError(f"N={N} exceeds exhaustive cap 24")
    S = sorted(set(S))
    if 0 in S:
        raise ValueError("steps must be nonzero")
    feasible = [
        all(0 <= i + s < N for s in S) for i in range(N)
    ]
    best = 0
    chosen: set[int] = set()

    def go(i: int, count: int):
        nonlocal best
        if count + (N - i) <= best:
            return
        if i == N:
            best = max(best, count)
            return
        if feasible[i] and all(
            i - s not in chosen and i + s not in chosen for s in S
        ):
            chosen.add(i)
            go(i + 1, count + 1)
            chosen.discard(i)
        go(i + 1, count)

    go(0, 0)
    return best


def exhaustive_cyclic_avoiding(S: Iterable[int], N: int) -> int:
    """Max |A|, A in Z/NZ avoiding all rotations by S; scans all 2^N masks."""
    if N > 20:
        raise ValueError(f"N={N} exceeds exhaustive cap 20")
    S = sorted(set(s % N for s in S))
    if 0 in S:
        raise ValueError("a step is 0 mod N")
    best = 0
    for mask in range(1 << N):
        members = [i for i in range(N) if (mask >> i) & 1]
        if len(members) <= best:
            continue
        mem = set(members)
        if all((a + s) % N not in mem for a in members for s in S):
            best = len(members)
    return best


def _dist_to_zero(x: Fraction) -> Fraction:
    off = x % 1
    return min(off, 1 - off)


def grid_margin(
    S: Sequence[int], d: int, grid: GridSpec
) -> tuple[Fraction, Fraction]:
    """Enclosure of sup over alpha of min over s of max_j dist(s*alpha_j).

    Samples the m^d grid exactly; the upper end adds Lipschitz slack
    L/(2m) with L = max|s|, since every alpha is within 1/(2m) per axis of
    a grid point.
    """
    if grid.d != d:
        raise ValueError("grid dimension mismatch")
    S = sorted(set(S))
    if not S:
        raise ValueError("need at least one step")
    m = grid.m
    L = max(abs(s) for s in S)
    best = Fraction(0)
    for idx in itertools.product(range(m), repeat=d):
        alpha = [Fraction(i, m) for i in idx]
        val = min(
            max(_dist_to_zero(s * a) for a in alpha) for s in S
        )
        if val > best:
            best = val
    upper = min(Fraction(1, 2), best + Fraction(L, 2 * m))
    return best, upper


def _axis_hits(iv, m: int, closed: bool) -> np.ndarray:
    # cell centers (2i+1)/(2m) against the arc [start, start+length) mod 1
    start, length = iv.start, iv.length
    row = np.zeros(m, dtype=bool)
    if length == 0:
        return row
    for i in range(m):
        off = (Fraction(2 * i + 1, 2 * m) - start) % 1
        row[i] = off <= length if closed else off < length
    return row


def rasterize(u, grid: GridSpec) -> tuple[np.ndarray, Fraction]:
    """Cell-center bitmap of a box union and the induced measure estimate."""
    if grid.d != u.d:
        raise ValueError("grid dimension mismatch")
    m = grid.m
    acc = np.zeros((m,) * u.d, dtype=bool)
    for box in u.boxes:
        rows = [_axis_hits(iv, m, u.closed) for iv in box.intervals]
        cur = rows[0]
        for row in rows[1:]:
            cur = np.logical_and.outer(cur, row)
        acc |= cur
    return acc, Fraction(int(acc.sum()), m ** u.d)


def surface_cell_bound(u, grid: GridSpec) -> int:
    """Cells whose closed cube can meet a face of some canonical box.

    Overcounts freely (faces shared between boxes are counted per box);
    used only to bound the rasterization error: cells away from every face
    are classified exactly by their center.
    """
    from .torus_boxes import normalize

    m = grid.m
    total = 0
    for box in normalize(u).boxes:
        segs = [(iv.start, iv.start + iv.length) for iv in box.intervals]
        spans = []
        for lo, hi in segs:
            first = int(lo * m)  # cell index containing lo
            last = min(int(hi * m), m - 1) if hi < 1 else m - 1
            spans.append(last - first + 1)
        for j, (lo, hi) in enumerate(segs):
            for c in (lo, hi % 1):
                cells = 1
                for jj, span in enumerate(spans):
                    if jj != j:
                        cells *= span
                # the fixed coordinate may sit on a cell border: 2 cells
                cells *= 2 if (c * m).denominator == 1 else 1
                total += cells
    return total
