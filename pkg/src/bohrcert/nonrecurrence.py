"""Finite nonrecurrence witnesses for sets of integer steps.

A witness is a subset A of {0, ..., N-1} with A + S inside the interval and
A disjoint from every translate A + s. Interval witnesses come from a
bitmask window DP (maximum cardinality, lexicographically least), cyclic
witnesses from the same DP with the wrap handled by prefix enumeration.
Certificates compose: coprime cyclic witnesses multiply into a witness for
the union of their step sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

WINDOW_CAP = 24

Rat = Fraction | int | str


def _steps(S: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted(set(int(s) for s in S)))
    if 0 in out:
        raise ValueError("0 is always recurrent; steps must be nonzero")
    return out


@dataclass(frozen=True)
class Witness:
    """S-avoiding subset of {0, ..., N-1} with A + S inside the interval."""

    N: int
    S: tuple[int, ...]
    A: tuple[int, ...]
    optimal: bool = True

    def __post_init__(self):
        object.__setattr__(self, "S", tuple(self.S))
        object.__setattr__(self, "A", tuple(self.A))

    @property
    def density(self) -> Fraction:
        return Fraction(len(self.A), self.N)

    def to_json(self) -> dict:
        d = self.density
        return {
            "N": self.N,
            "S": list(self.S),
            "A": list(self.A),
            "optimal": self.optimal,
            "density": {"num": str(d.numerator), "den": str(d.denominator)},
        }

    @staticmethod
    def from_json(data: dict) -> "Witness":
        w = Witness(
            data["N"], tuple(data["S"]), tuple(data["A"]),
            optimal=data.get("optimal", True),
        )
        stored = Fraction(int(data["density"]["num"]), int(data["density"]["den"]))
        if stored != w.density:
            raise ValueError(f"stored density {stored} is not |A|/N")
        return w


@dataclass(frozen=True)
class CyclicWitness:
    """Subset of Z/NZ avoiding every rotation by s in S."""

    N: int
    S: tuple[int, ...]
    A: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "S", tuple(self.S))
        object.__setattr__(self, "A", tuple(self.A))

    @property
    def density(self) -> Fraction:
        return Fraction(len(self.A), self.N)

    def to_json(self) -> dict:
        d = self.density
        return {
            "N": self.N,
            "S": list(self.S),
            "A": list(self.A),
            "density": {"num": str(d.numerator), "den": str(d.denominator)},
        }

    @staticmethod
    def from_json(data: dict) -> "CyclicWitness":
        w = CyclicWitness(data["N"], tuple(data["S"]), tuple(data["A"]))
        stored = Fraction(int(data["density"]["num"]), int(data["density"]["den"]))
        if stored != w.density:
            raise ValueError(f"stored density {stored} is not |A|/N")
        return w


@dataclass(frozen=True)
class UnionCertificate:
    """Product of coprime cyclic witnesses; avoids the union of step sets."""

    parts: tuple[CyclicWitness, ...]
    combined: CyclicWitness

    def to_json(self) -> dict:
        return {
            "parts": [p.to_json() for p in self.parts],
            "combined": self.combined.to_json(),
        }

    @staticmethod
    def from_json(data: dict) -> "UnionCertificate":
        return UnionCertificate(
            tuple(CyclicWitness.from_json(p) for p in data["parts"]),
            CyclicWitness.from_json(data["combined"]),
        )


def verify_witness(w: Witness) -> bool:
    """Both defining conditions by direct set arithmetic; ignores stored flags."""
    A = set(w.A)
    if len(A) != len(w.A) or any(not (0 <= a < w.N) for a in A):
        return False
    for a in A:
        for s in w.S:
            if not (0 <= a + s < w.N):
                return False
            if a + s in A:
                return False
    return True


def verify_cyclic_witness(w: CyclicWitness) -> bool:
    A = set(w.A)
    if len(A) != len(w.A) or any(not (0 <= a < w.N) for a in A):
        return False
    if any(s % w.N == 0 for s in w.S):
        return False
    return all((a + s) % w.N not in A for a in A for s in w.S)


def _interval_bounds(S: Sequence[int], N: int) -> tuple[int, int]:
    # A + S inside [0, N) pins a feasible position range, negative steps
    # shifting the start upward and positive steps the end downward
    lo = max((-s for s in S if s < 0), default=0)
    hi = N - 1 - max((s for s in S if s > 0), default=0)
    return lo, hi


def _window_dp(
    dists: tuple[int, ...], n: int, allowed: Sequence[bool]
) -> tuple[int, list[int]]:
    """Max subset of positions 0..n-1 avoiding the given positive gaps.

    Positions with allowed[i] false are forced out. Returns the optimum and
    its lexicographically least attaining set. States are membership masks
    of the last max(dists) positions; only reachable masks are stored.
    """
    M = max(dists, default=0)
    full = (1 << M) - 1
    conflict = 0
    for d in dists:
        conflict |= 1 << (d - 1)

    reach: list[set[int]] = [set() for _ in range(n + 1)]
    reach[0].add(0)
    for i in range(n):
        nxt = reach[i + 1]
        for m in reach[i]:
            nxt.add((m << 1) & full)
            if allowed[i] and not (m & conflict):
                nxt.add(((m << 1) | 1) & full)

    g: dict[int, int] = {m: 0 for m in reach[n]}
    tables: list[dict[int, int]] = [g]
    for i in range(n - 1, -1, -1):
        cur: dict[int, int] = {}
        for m in reach[i]:
            best = tables[0][(m << 1) & full]
            if allowed[i] and not (m & conflict):
                best = max(best, 1 + tables[0][((m << 1) | 1) & full])
            cur[m] = best
        tables.insert(0, cur)

    chosen = []
    m = 0
    for i in range(n):
        take = (
            allowed[i]
            and not (m & conflict)
            and 1 + tables[i + 1][((m << 1) | 1) & full] == tables[i][m]
        )
        if take:
            chosen.append(i)
            m = ((m << 1) | 1) & full
        else:
            m = (m << 1) & full
    return tables[0][0], chosen


def max_avoiding_set(S: Iterable[int], N: int, window_cap: int = WINDOW_CAP) -> Witness:
    """Maximum-cardinality witness for (S, N); lexicographically least optimum.

    Above the window cap falls back to left-to-right greedy and flags the
    result non-optimal.
    """
    S = _steps(S)
    if N < 1:
        raise ValueError("N must be >= 1")
    lo, hi = _interval_bounds(S, N)
    if hi < lo:
        return Witness(N, S, ())
    dists = tuple(sorted(set(abs(s) for s in S)))
    allowed = [lo <= i <= hi for i in range(N)]
    M = max(dists, default=0)
    if M > window_cap:
        chosen: list[int] = []
        taken = set()
        for i in range(N):
            if allowed[i] and all(i - d not in taken for d in dists):
                chosen.append(i)
                taken.add(i)
        return Witness(N, S, tuple(chosen), optimal=False)
    _, chosen = _window_dp(dists, N, allowed)
    return Witness(N, S, tuple(chosen))


def max_cyclic_avoiding(S: Iterable[int], N: int, window_cap: int = 14) -> CyclicWitness:
    """Maximum subset of Z/NZ avoiding all rotations by S.

    Wrap is handled by enumerating the first W membership bits, running the
    interval DP on the rest, and rejecting completions that conflict with
    the prefix across 0. W is the largest folded gap, at most N // 2.
    """
    S = _steps(S)
    if N < 1:
        raise ValueError("N must be >= 1")
    if not S:
        return CyclicWitness(N, S, tuple(range(N)))
    if any(s % N == 0 for s in S):
        raise ValueError("a step is 0 mod N; every subset recurs")
    dists = tuple(sorted(set(min(s % N, (-s) % N) for s in S)))
    W = max(dists)
    if W > window_cap:
        raise ValueError(f"folded window {W} exceeds cap {window_cap}")

    best_count = -1
    best_set: tuple[int, ...] = ()
    for pref in range(1 << W):
        bits = [(pref >> j) & 1 for j in range(W)]
        if any(
            bits[j] and j + d < W and bits[j + d] for j in range(W) for d in dists
        ):
            continue
        chosen_pref = [j for j in range(W) if bits[j]]
        count, tail = _cyclic_tail(dists, N, W, bits)
        if count is None:
            continue
        total = len(chosen_pref) + count
        cand = tuple(chosen_pref + tail)
        if total > best_count or (total == best_count and cand < best_set):
            best_count = total
            best_set = cand
    return CyclicWitness(N, S, best_set)


def _cyclic_tail(
    dists: tuple[int, ...], N: int, W: int, prefix_bits: list[int]
) -> tuple[int | None, list[int]]:
    """Best tail over positions W..N-1 compatible with the wrapped prefix."""
    n = N - W
    M = max(dists)
    full = (1 << M) - 1
    conflict = 0
    for d in dists:
        conflict |= 1 << (d - 1)

    start_mask = 0
    for j in range(min(M, W)):
        if prefix_bits[W - 1 - j]:
            start_mask |= 1 << j

    def wrap_ok(final_mask: int) -> bool:
        # final_mask bit t is position N-1-t; prefix positions j see
        # conflicts from j - d mod N landing in the tail's last stretch
        for j in range(W):
            if not prefix_bits[j]:
                continue
            for d in dists:
                t = (j - d) % N
                back = N - 1 - t
                if W <= t and back < M and (final_mask >> back) & 1:
                    return False
        return True

    reach: list[set[int]] = [set() for _ in range(n + 1)]
    reach[0].add(start_mask)
    for i in range(n):
        nxt = reach[i + 1]
        for m in reach[i]:
            nxt.add((m << 1) & full)
            if not (m & conflict):
                nxt.add(((m << 1) | 1) & full)

    g: dict[int, int | None] = {
        m: (0 if wrap_ok(m) else None) for m in reach[n]
    }
    tables: list[dict[int, int | None]] = [g]
    for i in range(n - 1, -1, -1):
        cur: dict[int, int | None] = {}
        for m in reach[i]:
            cands = []
            skip = tables[0][(m << 1) & full]
            if skip is not None:
                cands.append(skip)
            if not (m & conflict):
                take = tables[0][((m << 1) | 1) & full]
                if take is not None:
                    cands.append(1 + take)
            cur[m] = max(cands) if cands else None
        tables.insert(0, cur)

    if tables[0][start_mask] is None:
        return None, []
    chosen = []
    m = start_mask
    for i in range(n):
        take = False
        if not (m & conflict):
            t = tables[i + 1][((m << 1) | 1) & full]
            if t is not None and 1 + t == tables[i][m]:
                take = True
        if take:
            chosen.append(W + i)
            m = ((m << 1) | 1) & full
        else:
            m = (m << 1) & full
    return tables[0][start_mask], chosen


def finite_set_certificate(S: Iterable[int]) -> CyclicWitness:
    """Cyclic witness at N = 1 + max|s|; no step is 0 mod N, so {0} avoids."""
    S = _steps(S)
    if not S:
        raise ValueError("need at least one step")
    N = 1 + max(abs(s) for s in S)
    return max_cyclic_avoiding(S, N)


def union_certificate(w1: CyclicWitness, w2: CyclicWitness) -> UnionCertificate:
    """Product witness on N1*N2 avoiding S1 union S2; density multiplies."""
    if gcd(w1.N, w2.N) != 1:
        raise ValueError(f"moduli {w1.N}, {w2.N} are not coprime")
    for w in (w1, w2):
        if not verify_cyclic_witness(w):
            raise ValueError("invalid input witness")
    N = w1.N * w2.N
    A1, A2 = set(w1.A), set(w2.A)
    A = tuple(n for n in range(N) if n % w1.N in A1 and n % w2.N in A2)
    S = tuple(sorted(set(w1.S) | set(w2.S)))
    combined = CyclicWitness(N, S, A)
    if not verify_cyclic_witness(combined):
        raise ValueError("combined witness failed verification")
    if combined.density != w1.density * w2.density:
        raise ValueError("density is not multiplicative; inputs inconsistent")
    return UnionCertificate((w1, w2), combined)


def verify_union(cert: UnionCertificate) -> bool:
    """Re-derive the product witness from the parts and compare."""
    if len(cert.parts) != 2:
        return False
    try:
        again = union_certificate(*cert.parts)
    except ValueError:
        return False
    return again.combined == cert.combined


def delta_certificate(
    S: Iterable[int], delta: Rat, n_range: Iterable[int]
) -> Witness:
    """First N in n_range whose optimal witness has density above delta.

    Raises with the best density found when the whole range falls short.
    """
    S = _steps(S)
    delta = Fraction(delta)
    best: Witness | None = None
    for N in n_range:
        w = max_avoiding_set(S, N)
        if w.density > delta:
            return w
        if best is None or w.density > best.density:
            best = w
    detail = (
        f"best density {best.density} at N={best.N}" if best else "empty range"
    )
    raise ValueError(f"no witness with density > {delta}: {detail}")
