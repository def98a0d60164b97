"""Bohr neighborhoods, Bohr-Hamming membership, and recurrence margins.

The margin of a step set S in rank d is sup over alpha in T^d of
min over s in S of max_j dist(s * alpha_j, Z). S hits every rank-d Bohr
neighborhood of radius eps around 0 exactly when its margin is below eps.
Rank 1 margins are computed exactly from the piecewise-linear breakpoint
structure; higher ranks get certified enclosures from branch-and-bound.

Linear independence over Q is handled symbolically: coordinates live in a
formal basis {1, theta_1, theta_2, ...} and disjointness of spans is exact
rational rank arithmetic, following the subgroup-intersection reduction.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Sequence

from .torus_boxes import RatPoint

SYMBOL_CAP = 16
DEFAULT_NODE_BUDGET = 200_000

Rat = Fraction | int | str


def torus_norm(x: Rat) -> Fraction:
    """Distance from x to the nearest integer."""
    off = Fraction(x) % 1
    return min(off, 1 - off)


@dataclass(frozen=True)
class SymbolicReal:
    """Rational combination c_0 + c_1 theta_1 + ... over formal symbols.

    The symbols are declared independent over Q together with 1; all
    certified span arguments reduce to exact rank computations on the
    coefficient vectors.
    """

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        c = tuple(Fraction(x) for x in self.coeffs)
        if len(c) > SYMBOL_CAP + 1:
            raise ValueError(f"more than {SYMBOL_CAP} symbols")
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c if c else (Fraction(0),))

    @staticmethod
    def rational(q: Rat) -> "SymbolicReal":
        return SymbolicReal((Fraction(q),))

    @staticmethod
    def symbol(i: int) -> "SymbolicReal":
        if not (1 <= i <= SYMBOL_CAP):
            raise ValueError(f"symbol index {i} outside 1..{SYMBOL_CAP}")
        return SymbolicReal((Fraction(0),) * i + (Fraction(1),))

    def _vec(self, width: int) -> list[Fraction]:
        return [
            self.coeffs[i] if i < len(self.coeffs) else Fraction(0)
            for i in range(width)
        ]

    def __add__(self, other):
        o = other if isinstance(other, SymbolicReal) else SymbolicReal.rational(other)
        w = max(len(self.coeffs), len(o.coeffs))
        return SymbolicReal(tuple(a + b for a, b in zip(self._vec(w), o._vec(w))))

    def __sub__(self, other):
        o = other if isinstance(other, SymbolicReal) else SymbolicReal.rational(other)
        w = max(len(self.coeffs), len(o.coeffs))
        return SymbolicReal(tuple(a - b for a, b in zip(self._vec(w), o._vec(w))))

    def __mul__(self, q: Rat) -> "SymbolicReal":
        q = Fraction(q)
        return SymbolicReal(tuple(q * c for c in self.coeffs))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def evaluate(self, proxies: dict[int, Fraction]) -> Fraction:
        """Numeric value with rational stand-ins for the symbols."""
        val = self.coeffs[0]
        for i, c in enumerate(self.coeffs[1:], start=1):
            if c != 0:
                val += c * Fraction(proxies[i])
        return val


def _as_symbolic(x) -> SymbolicReal:
    return x if isinstance(x, SymbolicReal) else SymbolicReal.rational(x)


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot column list; rows are copied."""
    mat = [list(r) for r in rows]
    pivots = []
    r = 0
    cols = len(mat[0]) if mat else 0
    for c in range(cols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def _rank(rows: list[list[Fraction]]) -> int:
    return len(_rref(rows)[0]) if rows else 0


def _coeff_rows(values: Sequence[SymbolicReal], width: int) -> list[list[Fraction]]:
    return [v._vec(width) for v in values]


def q_disjoint(alpha: Sequence, beta: Sequence) -> bool:
    """Whether span_Q(alpha) meets span_Q(beta, 1) only in 0.

    Decided by rank additivity: the spans are disjoint exactly when the
    stacked coefficient matrix has full combined rank.
    """
    a = [_as_symbolic(x) for x in alpha]
    b = [_as_symbolic(x) for x in beta] + [SymbolicReal.rational(1)]
    width = max(len(v.coeffs) for v in a + b)
    ra = _rank(_coeff_rows(a, width))
    rb = _rank(_coeff_rows(b, width))
    rab = _rank(_coeff_rows(a + b, width))
    return rab == ra + rb


def _kernel_vector(rows: list[list[Fraction]]) -> list[Fraction] | None:
    """A deterministic nonzero x with sum x_i row_i = 0, or None."""
    n = len(rows)
    if n == 0:
        return None
    width = len(rows[0])
    # solve transpose(rows) x = 0: columns of the transpose are the rows
    mat = [[rows[i][c] for i in range(n)] for c in range(width)]
    rref, pivots = _rref(mat)
    free = [j for j in range(n) if j not in pivots]
    if not free:
        return None
    j = free[0]
    x = [Fraction(0)] * n
    x[j] = Fraction(1)
    for r, p in enumerate(pivots):
        x[p] = -rref[r][j]
    return x


def choose_indices(
    alpha: Sequence[SymbolicReal], beta: Sequence[SymbolicReal]
) -> tuple[int, ...]:
    """0-based indices I of size d-k with span(alpha_I) disjoint from span(beta, 1).

    Requires {alpha_1, ..., alpha_d, 1} independent over Q. Repeatedly finds
    a nonzero element of the current span intersection, drops the least
    alpha index appearing in it, and finally truncates to the first d-k
    surviving indices.
    """
    a = [_as_symbolic(x) for x in alpha]
    b = [_as_symbolic(x) for x in beta]
    d, k = len(a), len(b)
    if k >= d:
        raise ValueError(f"need k < d, got k={k} d={d}")
    unit = SymbolicReal.rational(1)
    width = max(len(v.coeffs) for v in a + b + [unit])
    if _rank(_coeff_rows(a + [unit], width)) != d + 1:
        raise ValueError("alpha coordinates and 1 are not independent over Q")

    live = list(range(d))
    for _ in range(k):
        rows = _coeff_rows([a[i] for i in live] + b + [unit], width)
        x = _kernel_vector(rows)
        if x is None:
            break
        drop = next(
            pos for pos, i in enumerate(live) if x[pos] != 0
        )
        live.pop(drop)
    chosen = tuple(live[: d - k])
    if not q_disjoint([a[i] for i in chosen], b):
        raise ValueError("index selection failed to separate the spans")
    return chosen


@dataclass(frozen=True)
class BohrSpec:
    """The set m + {n : dist(n * alpha_j) < radius for all j}."""

    d: int
    alpha: tuple
    radius: Fraction
    center: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(self.alpha))
        object.__setattr__(self, "radius", Fraction(self.radius))
        if len(self.alpha) != self.d or self.d < 1:
            raise ValueError("alpha length must equal the rank")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def bohr_contains(
    spec: BohrSpec, n: int, proxies: dict[int, Fraction] | None = None
) -> bool:
    """Exact membership using rational coordinates or proxy values."""
    m = n - spec.center
    for a in spec.alpha:
        if isinstance(a, SymbolicReal):
            if proxies is None:
                raise ValueError("symbolic coordinate needs proxies")
            val = a.evaluate(proxies)
        else:
            val = Fraction(a)
        if torus_norm(m * val) >= spec.radius:
            return False
    return True


@dataclass(frozen=True)
class BHSpec:
    """Bohr-Hamming ball data: at most k coordinates of n*alpha far from 0.

    alpha_star is the rational working point; rho bounds the per-unit drift
    of the true alpha from it, so a membership claim at n must survive a
    |n| * rho perturbation in every coordinate. alpha_sym optionally carries
    the symbolic coordinates for span arguments.
    """

    d: int
    alpha_star: RatPoint
    rho: Fraction
    k: int
    eta: Fraction
    alpha_sym: tuple[SymbolicReal, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "rho", Fraction(self.rho))
        object.__setattr__(self, "eta", Fraction(self.eta))
        if self.alpha_star.d != self.d:
            raise ValueError("alpha_star dimension mismatch")
        if not (0 <= self.k < self.d):
            raise ValueError("need 0 <= k < d")
        if self.eta <= 0 or self.rho < 0:
            raise ValueError("need eta > 0 and rho >= 0")
        if self.alpha_sym is not None and len(self.alpha_sym) != self.d:
            raise ValueError("alpha_sym dimension mismatch")


def bh_contains(spec: BHSpec, n: int) -> Literal["yes", "no", "unknown"]:
    """Three-valued membership of n, robust to the rho drift.

    A coordinate is certainly far when its distance is at least
    eta + |n| rho, certainly near below eta - |n| rho. Membership is yes
    when even the uncertain coordinates could not push the far count past
    k, no when the certain ones already do.
    """
    slack = abs(n) * spec.rho
    far = uncertain = 0
    for a in spec.alpha_star.coords:
        dist = torus_norm(n * a)
        if dist >= spec.eta + slack:
            far += 1
        elif not (dist < spec.eta - slack):
            uncertain += 1
    if far > spec.k:
        return "no"
    if far + uncertain <= spec.k:
        return "yes"
    return "unknown"


@dataclass(frozen=True)
class MarginResult:
    lower: Fraction
    upper: Fraction
    witness_alpha: RatPoint
    nodes_explored: int
    converged: bool = True
    # why the search ended: converged, below-threshold, above-threshold,
    # or node-budget; threshold stops can leave the enclosure wide
    stopped: str = "converged"

    def to_json(self) -> dict:
        return {
            "lower": {"num": str(self.lower.numerator), "den": str(self.lower.denominator)},
            "upper": {"num": str(self.upper.numerator), "den": str(self.upper.denominator)},
            "witness_alpha": [
                {"num": str(c.numerator), "den": str(c.denominator)}
                for c in self.witness_alpha.coords
            ],
            "nodes_explored": self.nodes_explored,
            "converged": self.converged,
            "stopped": self.stopped,
        }

    @staticmethod
    def from_json(data: dict) -> "MarginResult":
        rat = lambda r: Fraction(int(r["num"]), int(r["den"]))
        return MarginResult(
            rat(data["lower"]),
            rat(data["upper"]),
            RatPoint(tuple(rat(c) for c in data["witness_alpha"])),
            data["nodes_explored"],
            data["converged"],
            data["stopped"],
        )


def _sup_norm_scaled(s: int, lo: Fraction, hi: Fraction) -> Fraction:
    """Exact sup of dist(s * x) for x in the closed interval [lo, hi]."""
    if s == 0:
        return Fraction(0)
    u, v = abs(s) * lo, abs(s) * hi
    if v - u >= 1:
        return Fraction(1, 2)
    # any half-integer inside [u, v] tops out the distance
    twice_lo = -((-2 * u) // 1)  # ceil(2u)
    twice_hi = (2 * v) // 1
    t = twice_lo if twice_lo % 2 == 1 else twice_lo + 1
    if t <= twice_hi:
        return Fraction(1, 2)
    return max(torus_norm(u), torus_norm(v))


def _eval_point(S: Sequence[int], point: Sequence[Fraction]) -> Fraction:
    return min(max(torus_norm(s * x) for x in point) for s in S)


def _margin_rank1(S: Sequence[int]) -> tuple[Fraction, Fraction, int]:
    """Exact rank-1 margin via breakpoints of the piecewise-linear objective.

    Kinks of dist(s * x) sit at multiples of 1/(2|s|); crossings of two
    terms at multiples of 1/|s1 - s2| and 1/|s1 + s2|. The max over [0, 1)
    is attained at one of these, so enumeration is exact.
    """
    qs = set()
    for s in S:
        qs.add(2 * abs(s))
    for i, s1 in enumerate(S):
        for s2 in S[i + 1 :]:
            for q in (abs(s1 - s2), abs(s1 + s2)):
                if q:
                    qs.add(q)
    best = Fraction(0)
    arg = Fraction(0)
    count = 0
    for q in sorted(qs):
        for c in range(q):
            x = Fraction(c, q)
            count += 1
            val = min(torus_norm(s * x) for s in S)
            if val > best or (val == best and x < arg):
                best, arg = val, x
    return best, arg, count


def recurrence_margin(
    S: Iterable[int],
    d: int,
    tol: Rat = Fraction(1, 1024),
    stop_below: Rat | None = None,
    stop_above: Rat | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> MarginResult:
    """Enclosure of sup over T^d of min_s max_j dist(s * alpha_j).

    Rank 1 is exact (width-0 enclosure). Higher ranks run best-first
    branch-and-bound over closed dyadic boxes with the per-coordinate
    Lipschitz bound; subdivision stops when the enclosure is within tol,
    or earlier when a decision threshold settles: all remaining upper
    bounds under stop_below, or a witness above stop_above. A threshold
    stop can leave the enclosure wider than tol. Budget exhaustion returns
    the achieved enclosure flagged non-converged.
    """
    S = sorted(set(int(s) for s in S))
    if not S:
        raise ValueError("need at least one step")
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if d < 1:
        raise ValueError("rank must be >= 1")
    if 0 in S:
        zero = RatPoint((Fraction(0),) * d)
        return MarginResult(Fraction(0), Fraction(0), zero, 0)

    if d == 1:
        val, arg, nodes = _margin_rank1(S)
        return MarginResult(val, val, RatPoint((arg,)), nodes)

    stop_below = None if stop_below is None else Fraction(stop_below)
    stop_above = None if stop_above is None else Fraction(stop_above)
    half = Fraction(1, 2)
    init = tuple((Fraction(0), Fraction(1)) for _ in range(d))

    def box_ub(box) -> Fraction:
        return min(
            min(half, max(_sup_norm_scaled(s, lo, hi) for lo, hi in box))
            for s in S
        )

    def center(box) -> tuple[Fraction, ...]:
        return tuple((lo + hi) / 2 for lo, hi in box)

    best_lower = _eval_point(S, center(init))
    best_point = center(init)
    heap = [(-box_ub(init), init)]
    nodes = 1
    converged = True
    stopped = "converged"
    frontier_ub = None
    while heap:
        neg_ub, box = heapq.heappop(heap)
        ub = -neg_ub
        if ub <= best_lower:
            continue
        # best-first: ub dominates everything still on the heap
        if ub - best_lower <= tol:
            frontier_ub = ub
            break
        if stop_below is not None and ub < stop_below:
            frontier_ub = ub
            stopped = "below-threshold"
            break
        if stop_above is not None and best_lower > stop_above:
            frontier_ub = ub
            stopped = "above-threshold"
            break
        if nodes >= node_budget:
            converged = False
            stopped = "node-budget"
            frontier_ub = ub
            break
        j = max(range(d), key=lambda i: (box[i][1] - box[i][0], -i))
        lo, hi = box[j]
        mid = (lo + hi) / 2
        for part in ((lo, mid), (mid, hi)):
            child = box[:j] + (part,) + box[j + 1 :]
            c = center(child)
            val = _eval_point(S, c)
            nodes += 1
            if val > best_lower or (val == best_lower and c < best_point):
                best_lower, best_point = val, c
            cub = box_ub(child)
            if cub > best_lower:
                heapq.heappush(heap, (-cub, child))
    upper = best_lower if frontier_ub is None else max(best_lower, frontier_ub)
    return MarginResult(
        best_lower, upper, RatPoint(best_point), nodes, converged, stopped
    )


@dataclass(frozen=True)
class RecurrenceAnswer:
    recurrent: bool
    margin: MarginResult

    def __bool__(self) -> bool:
        return self.recurrent


def is_recurrent(
    S: Iterable[int], d: int, eps: Rat, node_budget: int = DEFAULT_NODE_BUDGET
) -> RecurrenceAnswer:
    """Whether S meets every rank-d Bohr neighborhood of radius eps at 0.

    True when the margin's upper bound falls below eps, false when the
    lower bound reaches it; retries at tighter tolerances while eps sits
    strictly inside the enclosure.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    tol = eps / 4
    for _ in range(6):
        r = recurrence_margin(
            list(S), d, tol,
            stop_below=eps, stop_above=eps, node_budget=node_budget,
        )
        if r.upper < eps:
            return RecurrenceAnswer(True, r)
        if r.lower >= eps:
            return RecurrenceAnswer(False, r)
        if not r.converged:
            break
        tol /= 8
    raise ValueError(
        f"margin enclosure [{r.lower}, {r.upper}] straddles eps={eps} "
        "within the node budget"
    )


@dataclass(frozen=True)
class TranslateCheck:
    ok: bool
    failed_m: int | None = None
    margin: MarginResult | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_translates(
    S: Iterable[int], d: int, eps: Rat, M: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> TranslateCheck:
    """Recurrence of every translate S - m for |m| <= M.

    Translates are visited in the order 0, 1, -1, 2, -2, ...; the first
    failure is reported with its margin.
    """
    S = sorted(set(int(s) for s in S))
    order = [0]
    for m in range(1, M + 1):
        order += [m, -m]
    for m in order:
        shifted = [s - m for s in S]
        ans = is_recurrent(shifted, d, eps, node_budget)
        if not ans.recurrent:
            return TranslateCheck(False, m, ans.margin)
    return TranslateCheck(True)


def bh_inner_bohr(spec: BHSpec, beta: Sequence[SymbolicReal]) -> BohrSpec:
    """Bohr neighborhood inside the Bohr-Hamming ball, span-disjoint from beta.

    Keeps d - k symbolic coordinates chosen by choose_indices; any n with
    all kept coordinates eta-close to 0 leaves at most k far coordinates,
    so it belongs to the ball.
    """
    if spec.alpha_sym is None:
        raise ValueError("inner Bohr neighborhood needs symbolic coordinates")
    if len(beta) != spec.k:
        raise ValueError(f"expected {spec.k} beta coordinates")
    idx = choose_indices(spec.alpha_sym, beta)
    alpha = tuple(spec.alpha_sym[i] for i in idx)
    return BohrSpec(len(alpha), alpha, spec.eta)


def bohr_intersect_nonempty(
    b1: BohrSpec,
    b2: BohrSpec,
    proxies: dict[int, Fraction] | None = None,
    n_max: int = 10_000,
) -> tuple[bool, int | None]:
    """(True, explicit member or None) for span-disjoint Bohr neighborhoods.

    Nonemptiness is guaranteed once span(alpha) meets span(beta, 1) only
    in 0; the member search evaluates both specs at rational proxies,
    trying continued-fraction convergent denominators of the coordinates
    first and then |n| ascending.
    """
    if not q_disjoint(b1.alpha, b2.alpha):
        raise ValueError("coordinate spans are not disjoint over Q")
    if proxies is None:
        return True, None

    def coord_values(spec: BohrSpec) -> list[Fraction]:
        return [
            a.evaluate(proxies) if isinstance(a, SymbolicReal) else Fraction(a)
            for a in spec.alpha
        ]

    vals = coord_values(b1) + coord_values(b2)
    candidates: list[int] = []
    for v in vals:
        candidates.extend(_convergent_denominators(v % 1, n_max))
    seen = set()
    ordered = []
    for n in candidates + list(range(1, n_max + 1)):
        for cand in (n, -n):
            if cand not in seen:
                seen.add(cand)
                ordered.append(cand)
    for n in ordered:
        if abs(n) > n_max:
            continue
        if bohr_contains(b1, n, proxies) and bohr_contains(b2, n, proxies):
            return True, n
    return True, None


def _convergent_denominators(x: Fraction, cap: int) -> list[int]:
    """Denominators of the continued-fraction convergents of x, up to cap."""
    out = []
    h_prev, h = 0, 1
    num, den = x.numerator, x.denominator
    while den:
        a, rem = divmod(num, den)
        num, den = den, rem
        h_prev, h = h, a * h + h_prev
        if h > cap:
            break
        if h > 0:
            out.append(h)
    return out
