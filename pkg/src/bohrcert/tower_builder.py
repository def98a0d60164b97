"""Rohlin tower data over rational torus rotations, built from bias tiles.

A tower instance embeds the tile family A = E0(k+1, d) as margin-2eta cubes
E in T^d, thickens it by the approximate Hamming ball U = Hamm(k, eta) to
the closed E1, and rotates by alpha near (1/p, ..., 1/p). The certificate
records exact measures, the pairwise separation of the rotated copies of
E1, and a robustness radius rho: disjointness survives any alpha within
rho of the recorded rational point, which is what lets a Q-independent
alpha inherit the finite checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Literal, Sequence

import numpy as np

from . import hamming_cells as hc
from . import torus_boxes as tb
from .bohr_analysis import BHSpec, bh_contains
from .torus_boxes import Box, BoxUnion, RatPoint, TorusInterval

ETA_SCALE_BITS = 40
GEOM_PAIR_CAP = 4_000_000
SAMPLE_TRIALS = 20_000
EXHAUSTIVE_CAP = 10_000_000

Rat = Fraction | int | str


@dataclass(frozen=True)
class TowerSpec:
    """Tower data; verification, not construction, enforces the invariants.

    In exact mode E and E1 are explicit box unions (E1 closed, held as the
    raw per-cell boxes without canonicalization: its boxes overlap by
    design and only membership, containment, and separation are ever
    asked of it). In reduced mode both are None and the finite group
    facts stand in for the geometry.
    """

    p: int
    k: int
    epsilon: Fraction
    d: int
    eta: Fraction
    alpha_star: RatPoint
    rho: Fraction
    mode: Literal["exact", "reduced"]
    E: BoxUnion | None = None
    E1: BoxUnion | None = None

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "eta", Fraction(self.eta))
        object.__setattr__(self, "rho", Fraction(self.rho))
        if self.mode not in ("exact", "reduced"):
            raise ValueError("mode must be exact or reduced")

    @property
    def tile_family(self) -> hc.CellFamily:
        return hc.CellFamily(self.p, self.d, self.k + 1, "E0")

    @property
    def outer_family(self) -> hc.CellFamily:
        return hc.CellFamily(self.p, self.d, 1, "E0")

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "epsilon": _rat_json(self.epsilon),
            "d": self.d,
            "eta": _rat_json(self.eta),
            "alpha_star": [_rat_json(c) for c in self.alpha_star.coords],
            "rho": _rat_json(self.rho),
            "mode": self.mode,
            "E": None if self.E is None else tb.to_json(self.E),
            "E1": None if self.E1 is None else tb.to_json(self.E1),
        }

    @staticmethod
    def from_json(data: dict) -> "TowerSpec":
        return TowerSpec(
            p=int(data["p"]),
            k=int(data["k"]),
            epsilon=_rat_parse(data["epsilon"]),
            d=int(data["d"]),
            eta=_rat_parse(data["eta"]),
            alpha_star=RatPoint(tuple(_rat_parse(c) for c in data["alpha_star"])),
            rho=_rat_parse(data["rho"]),
            mode=data["mode"],
            E=None if data["E"] is None else tb.from_json(data["E"]),
            E1=None if data["E1"] is None else tb.from_json(data["E1"]),
        )


@dataclass(frozen=True)
class TowerCertificate:
    spec: TowerSpec
    checks: dict[str, str]
    mu_E: Fraction
    separation_min: Fraction
    valid: bool
    seed: int | None = None
    trials: int | None = None

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "checks": dict(self.checks),
            "mu_E": _rat_json(self.mu_E),
            "separation_min": _rat_json(self.separation_min),
            "valid": self.valid,
            "seed": self.seed,
            "trials": self.trials,
        }

    @staticmethod
    def from_json(data: dict) -> "TowerCertificate":
        return TowerCertificate(
            spec=TowerSpec.from_json(data["spec"]),
            checks=dict(data["checks"]),
            mu_E=_rat_parse(data["mu_E"]),
            separation_min=_rat_parse(data["separation_min"]),
            valid=bool(data["valid"]),
            seed=data.get("seed"),
            trials=data.get("trials"),
        )


def _rat_json(x: Fraction) -> dict:
    x = Fraction(x)
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _rat_parse(data: dict) -> Fraction:
    return Fraction(int(data["num"]), int(data["den"]))


def _select_eta(p: int, d: int, count: int, epsilon: Fraction) -> Fraction:
    """Largest a/2^40 keeping mu(E) above both measure thresholds.

    Thresholds: (1 - eps/2) of the full cube mass |A| p^-d, and the tower
    bound (1 - eps)/p itself. Both are monotone in eta, so binary search
    on the scaled numerator is exact.
    """
    scale = 1 << ETA_SCALE_BITS
    cube_mass = Fraction(count, p**d)
    need = max((1 - epsilon / 2) * cube_mass, Fraction(1 - epsilon, p))

    def ok(a: int) -> bool:
        side = Fraction(1, p) - 4 * Fraction(a, scale)
        return side > 0 and count * side**d > need

    lo, hi = 1, scale // (4 * p)
    if not ok(lo):
        raise ValueError("no admissible eta: tile too thin for the measure bound")
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    return Fraction(lo, scale)


def _tile_boxes(
    A: Sequence[hc.GpVector], p: int, d: int, k: int, eta: Fraction
) -> list[Box]:
    """The closed thickening E1 box per (cell vector, free axis set)."""
    margin = TorusInterval(0, 1)
    out = []
    inner_len = Fraction(1, p) - 2 * eta
    for a in A:
        base = [
            TorusInterval(Fraction(c, p) + eta, inner_len) for c in a.coords
        ]
        for F in combinations(range(d), k):
            ivs = list(base)
            for j in F:
                ivs[j] = margin
            out.append(Box(tuple(ivs)))
    return out


def build_tower(
    p: int,
    k: int,
    epsilon: Rat,
    mode: Literal["exact", "reduced"] = "exact",
    d_cap: int = hc.DEFAULT_D_CAP,
) -> TowerSpec:
    """Tower spec from the least workable tile dimension.

    Runs the tile search at loss epsilon, picks the largest dyadic eta
    whose cube embedding keeps enough mass, and centers the rotation at
    phi(1) = (1/p, ..., 1/p) with rho = eta/(p-1), half the translate
    separation per unit of drift.
    """
    epsilon = Fraction(epsilon)
    tile = hc.gp_tile(p, k, epsilon, d_cap)
    d = tile.d
    eta = _select_eta(p, d, tile.count, epsilon)
    alpha_star = RatPoint((Fraction(1, p),) * d)
    rho = eta / (p - 1)
    E = E1 = None
    if mode == "exact":
        n_boxes = tile.count * _comb(d, k)
        if tile.count > tb.DEFAULT_BOX_CAP or n_boxes > tb.DEFAULT_BOX_CAP:
            raise ValueError(
                f"tile needs {n_boxes} boxes, above the cap {tb.DEFAULT_BOX_CAP}"
            )
        A = hc.enumerate_family(tile.family)
        E = tb.cube_embed(A, p, 2 * eta)
        E1 = BoxUnion(d, tuple(_tile_boxes(A, p, d, k, eta)), closed=True)
    return TowerSpec(
        p=p, k=k, epsilon=epsilon, d=d, eta=eta,
        alpha_star=alpha_star, rho=rho, mode=mode, E=E, E1=E1,
    )


def _comb(n: int, r: int) -> int:
    from math import comb

    return comb(n, r)


def _encode(arr: np.ndarray, p: int) -> np.ndarray:
    powers = p ** np.arange(arr.shape[1], dtype=np.int64)
    return arr.astype(np.int64) @ powers


def _vectors_array(vs: Sequence[hc.GpVector]) -> np.ndarray:
    return np.array([v.coords for v in vs], dtype=np.int64)


def _shift_avoids(
    arr: np.ndarray, codes: np.ndarray, p: int, shifts: Iterable[Sequence[int]]
) -> bool:
    """No row of arr lands back in codes under any of the shifts."""
    for shift in shifts:
        moved = _encode((arr + np.array(shift, dtype=np.int64)) % p, p)
        idx = np.searchsorted(codes, moved)
        idx[idx == len(codes)] = 0
        if np.any(codes[idx] == moved):
            return False
    return True


def _covered(
    arr: np.ndarray, target_codes: np.ndarray, p: int,
    shifts: Iterable[Sequence[int]],
) -> bool:
    """Every row of arr stays inside target_codes under every shift."""
    for shift in shifts:
        moved = _encode((arr + np.array(shift, dtype=np.int64)) % p, p)
        idx = np.searchsorted(target_codes, moved)
        idx[idx == len(target_codes)] = 0
        if not np.all(target_codes[idx] == moved):
            return False
    return True


def _structural_separation(
    spec: TowerSpec, A: Sequence[hc.GpVector]
) -> Fraction | None:
    """Separation of the rotated E1 copies from the cell combinatorics.

    Valid when alpha_star is exactly phi(1) and p <= 3, so every pair of
    distinct residues is cyclically adjacent: two boxes either share all
    pinned axes (prevented by A avoiding A + n*1 + H_2k) or sit 2*eta
    apart on some axis. Returns None when the hypotheses fail.
    """
    p, d, k = spec.p, spec.d, spec.k
    if p > 3 or spec.alpha_star.coords != (Fraction(1, p),) * d:
        return None
    arr = _vectors_array(A)
    codes = np.sort(_encode(arr, p))
    shifts = []
    for n in range(1, p):
        for h in hc.hamming_ball(p, d, 2 * k):
            shifts.append(tuple((c + n) % p for c in h.coords))
    if not _shift_avoids(arr, codes, p, shifts):
        return None
    return 2 * spec.eta


def _geometric_separation(spec: TowerSpec) -> Fraction | None:
    n_boxes = len(spec.E1.boxes)
    if (spec.p - 1) * n_boxes * n_boxes > GEOM_PAIR_CAP:
        return None
    sep = None
    for n in range(1, spec.p):
        shift = spec.alpha_star.scale(n)
        s = tb.separation(spec.E1, tb.translate(spec.E1, shift))
        sep = s if sep is None else min(sep, s)
    return sep


def verify_tower(
    spec: TowerSpec, seed: int = 0, trials: int = SAMPLE_TRIALS
) -> TowerCertificate:
    """Re-derive every tower fact from the spec alone.

    Exact mode checks the box geometry: E inside E1, E1 as the exact
    thickening of E by Hamm(k, eta), rotated copies of E1 separated, and
    the measure bound, all in rational arithmetic. Reduced mode checks
    the finite-group reductions (tile containment and shift-disjointness,
    exhaustively when p^d is small enough, sampled otherwise) plus the
    analytic eta/rho inequalities. Any failure marks the certificate
    invalid with the failing fact named.
    """
    checks: dict[str, str] = {}
    mu = Fraction(0)
    sep = Fraction(0)
    used_sampling = False

    def fail(name: str, why: str) -> TowerCertificate:
        checks[name] = f"failed: {why}"
        return TowerCertificate(
            spec, checks, mu, sep, False,
            seed if used_sampling else None, trials if used_sampling else None,
        )

    p, d, k = spec.p, spec.d, spec.k
    if k < 1 or d < 1 or not (0 < spec.epsilon < 1):
        return fail("parameters", "need k >= 1, d >= 1, 0 < epsilon < 1")
    if spec.eta <= 0:
        return fail("parameters", "degenerate thickening: eta must be positive")
    if 4 * spec.eta >= Fraction(1, p):
        return fail("parameters", "eta too large for the cube margins")
    if spec.rho < 0:
        return fail("parameters", "rho must be nonnegative")

    count = hc.count_family(spec.tile_family)
    side = Fraction(1, p) - 4 * spec.eta
    mu = count * side**d
    need = max(
        (1 - spec.epsilon / 2) * Fraction(count, p**d),
        Fraction(1 - spec.epsilon, p),
    )
    if not (mu > need):
        return fail("measure_lower_bound", f"mu(E) = {mu} not above {need}")
    checks["measure_lower_bound"] = "verified-exact"

    if spec.mode == "exact":
        if spec.E is None or spec.E1 is None:
            return fail("shape", "exact mode requires explicit E and E1")
        A = hc.enumerate_family(spec.tile_family)
        expect_E = tb.cube_embed(A, p, 2 * spec.eta)
        if sorted(spec.E.boxes, key=_box_key) != sorted(expect_E.boxes, key=_box_key):
            return fail("shape", "E does not match the cube embedding of the tile")
        expected = sorted(_tile_boxes(A, p, d, k, spec.eta), key=_box_key)
        if not spec.E1.closed or sorted(spec.E1.boxes, key=_box_key) != expected:
            return fail(
                "thickening", "E1 is not the closed thickening of E by Hamm(k, eta)"
            )
        checks["thickening"] = "verified-exact"

        # E in E1 cube by cube: margin 2*eta sits inside margin eta on the
        # pinned axes, free axes absorb anything; with the shapes pinned
        # above this is the inequality eta < 2*eta, i.e. eta > 0
        checks["tile_in_thickening"] = "verified-exact"

        sep_s = _structural_separation(spec, A)
        sep_g = _geometric_separation(spec)
        if sep_g is None and sep_s is None:
            return fail(
                "translate_disjoint", "instance too large for exact separation"
            )
        if sep_s is not None and sep_g is not None and sep_s != sep_g:
            return fail(
                "translate_disjoint",
                f"structural separation {sep_s} disagrees with geometric {sep_g}",
            )
        sep = sep_g if sep_g is not None else sep_s
        if not (sep > 0):
            return fail("translate_disjoint", f"separation {sep} not positive")
        checks["translate_disjoint"] = "verified-exact"
    else:
        inner = spec.tile_family
        outer = spec.outer_family
        if spec.alpha_star.coords != (Fraction(1, p),) * d:
            return fail("rotation", "reduced mode certifies only alpha = phi(1)")
        small = p**d <= EXHAUSTIVE_CAP
        hk = [h.coords for h in hc.hamming_ball(p, d, k)]
        ones = (1,) * d
        if small:
            arr_a = _vectors_array(hc.enumerate_family(inner))
            a1 = hc.enumerate_family(outer)
            arr_a1 = _vectors_array(a1)
            codes_a1 = np.sort(_encode(arr_a1, p))
            if not _covered(arr_a, codes_a1, p, hk):
                return fail("tile_in_thickening", "A + H_k leaves E0(1, d)")
            checks["tile_in_thickening"] = "verified-exact"
            shifts = [tuple(n % p for _ in range(d)) for n in range(1, p)]
            if not _shift_avoids(arr_a1, codes_a1, p, shifts):
                return fail("translate_disjoint", "E0(1, d) meets a 1-shift of itself")
            checks["translate_disjoint"] = "verified-exact"
        else:
            used_sampling = True
            rng = np.random.default_rng(seed)
            xs = rng.integers(0, p, size=(trials, d))
            in_a = [
                hc.GpVector(p, tuple(int(c) for c in row))
                for row in xs
                if hc.family_contains(inner, hc.GpVector(p, tuple(int(c) for c in row)))
            ]
            for v in in_a:
                for h in hk:
                    w = hc.GpVector(p, tuple((a + b) % p for a, b in zip(v.coords, h)))
                    if not hc.family_contains(outer, w):
                        return fail("tile_in_thickening", "sampled A + H_k escape")
            checks["tile_in_thickening"] = f"sampled({trials} trials)"
            bad = 0
            for row in xs:
                v = hc.GpVector(p, tuple(int(c) for c in row))
                if hc.family_contains(outer, v):
                    for n in range(1, p):
                        w = hc.GpVector(p, tuple((c + n) % p for c in v.coords))
                        if hc.family_contains(outer, w):
                            bad += 1
            if bad:
                return fail("translate_disjoint", "sampled shift collision")
            checks["translate_disjoint"] = f"sampled({trials} trials)"
        sep = 2 * spec.eta
        checks["separation"] = "verified-reduced"

    if not (spec.rho * 2 * (p - 1) <= sep):
        return fail("robustness", f"rho {spec.rho} too large for separation {sep}")
    if spec.rho <= 0:
        return fail("robustness", "rho must be positive for a usable ball")
    checks["robustness"] = (
        "verified-exact" if spec.mode == "exact" else "verified-reduced"
    )

    return TowerCertificate(
        spec, checks, mu, sep, True,
        seed if used_sampling else None, trials if used_sampling else None,
    )


def _box_key(b: Box):
    return tuple((iv.start, iv.length) for iv in b.intervals)


@dataclass(frozen=True)
class RohlinStep:
    """Outcome of one extension query: is D disjoint from D + n*alpha."""

    disjoint: bool | None
    witnessed_by: str
    s: int | None = None
    m: int | None = None
    box_confirmed: bool | None = None


def rohlin_extend(
    cert: TowerCertificate,
    A_pos: Iterable[int],
    S: Iterable[int],
    n: int,
    n_max: int = 2000,
    confirm_boxes: bool = False,
) -> RohlinStep:
    """Decide n = s + m with s in S and m in the Bohr-Hamming ball.

    A yes-membership of m certifies that the union D of tower levels over
    A_pos misses D + n*alpha for every alpha within rho of the recorded
    point, by the tower translate containment. An inconclusive membership
    yields unknown, never a refutation.

    The ball is queried at rho capped by eta/(2*n_max): queries out to
    n_max then keep a usable certainly-near band, and shrinking rho only
    shrinks the certified ball, so the tower disjointness still covers it.
    """
    if not cert.valid:
        raise ValueError("certificate is invalid")
    spec = cert.spec
    A_pos = sorted(set(int(a) for a in A_pos))
    S = sorted(set(int(s) for s in S))
    if abs(n) > n_max:
        raise ValueError(f"|n| = {abs(n)} exceeds n_max = {n_max}")
    shifted = {a + s for a in A_pos for s in S}
    if shifted & set(A_pos):
        raise ValueError("A_pos meets A_pos + S")
    if not shifted <= set(range(spec.p)):
        raise ValueError("A_pos + S leaves [p]")

    rho = min(spec.rho, spec.eta / (2 * n_max))
    ball = BHSpec(spec.d, spec.alpha_star, rho, spec.k, spec.eta)
    for s in S:
        if bh_contains(ball, n - s) == "yes":
            confirmed = None
            if confirm_boxes and spec.mode == "exact":
                confirmed = _boxes_disjoint_after(spec, A_pos, n)
            return RohlinStep(
                True,
                "tower-translate containment via a certified ball membership",
                s, n - s, confirmed,
            )
    return RohlinStep(None, "no certified decomposition of n over S")


def _boxes_disjoint_after(spec: TowerSpec, A_pos: Sequence[int], n: int) -> bool:
    parts = [
        tb.translate(spec.E, spec.alpha_star.scale(m)) for m in A_pos
    ]
    D = BoxUnion(spec.d, tuple(b for u in parts for b in u.boxes))
    moved = tb.translate(D, spec.alpha_star.scale(n))
    return not tb.intersection(D, moved).boxes
