"""Staged construction of nonrecurrent sets with recurrent translates.

Each stage k certifies three facts about a finite integer set S_k: a direct
interval witness shows S_k is delta'-nonrecurrent, a tower certificate plus
stored s + n decompositions show S_k sits inside S_{k-1} thickened by a
certified Bohr-Hamming ball, and branch-and-bound margin enclosures show
every translate S_k - m with |m| <= k meets all rank-k Bohr balls of radius
1/k. The adversarial selection loop replaces a compactness argument: while
some translate has margin at least 1/k, the offending rotation vector picks
the pool element that best reduces it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from concurrent.futures import ThreadPoolExecutor

from . import nonrecurrence as nr
from . import tower_builder as tw
from .bohr_analysis import BHSpec, MarginResult, bh_contains, recurrence_margin, torus_norm
from .nonrecurrence import Witness
from .tower_builder import TowerCertificate

Rat = Fraction | int | str

# dimension cap for the per-stage tile search; chosen so the reduced-mode
# tower stays checkable at desk scale
STAGE_D_CAP = 192
# loss levels tried in order when the density-slack epsilon is out of reach
STAGE_EPS_GRID = (
    Fraction(1, 2),
    Fraction(3, 4),
    Fraction(9, 10),
    Fraction(19, 20),
    Fraction(99, 100),
)
# sample count for reduced-mode tower verification inside a run
PIPELINE_TRIALS = 500
# interval lengths offered to the stage witness search, doubling to keep
# the number of DP solves logarithmic
WITNESS_SCHEDULE = (32, 64, 128, 256, 512)
PRIME_CAP = 499
DEFAULT_CUT_BUDGET = 64


class MarginClosureError(RuntimeError):
    """Margins could not be pushed below threshold with the available pool.

    Carries the translate and the uncovered rotation vector so callers can
    report which Bohr ball no candidate element entered.
    """

    def __init__(self, m: int, alpha, detail: str):
        self.m = m
        self.alpha = alpha
        super().__init__(
            f"margins did not close at translate m={m}; uncovered rotation "
            f"{tuple(str(c) for c in alpha.coords)} ({detail})"
        )


def _rat_json(x: Fraction) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _rat_parse(data: dict) -> Fraction:
    return Fraction(int(data["num"]), int(data["den"]))


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class PipelineConfig:
    """Targets and budgets for a staged run.

    delta is the recurrence level ruled out by the measure construction,
    delta_prime the stronger level every stage witness certifies directly.
    The ambient oracle restricts which integers may enter a stage; None
    means all of Z, and a custom oracle carries its own responsibility for
    containing enough of every Bohr set.
    """

    delta: Fraction
    delta_prime: Fraction
    K: int
    n_max: int = 2000
    tol: Fraction = Fraction(1, 10**6)
    seed: int = 0
    M_schedule: tuple[int, ...] | None = None
    rank_cap: int = 2
    ambient: Callable[[int], bool] | None = None

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "delta_prime", Fraction(self.delta_prime))
        object.__setattr__(self, "tol", Fraction(self.tol))
        if not (0 < self.delta < self.delta_prime < Fraction(1, 2)):
            raise ValueError("need 0 < delta < delta_prime < 1/2")
        if self.K < 1:
            raise ValueError("need at least one stage")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.M_schedule is not None:
            sched = tuple(int(m) for m in self.M_schedule)
            if len(sched) < self.K or any(m < 0 for m in sched):
                raise ValueError("M_schedule must cover every stage with m >= 0")
            object.__setattr__(self, "M_schedule", sched)

    def translate_range(self, k: int) -> int:
        if self.M_schedule is not None:
            return self.M_schedule[k - 1]
        return k

    def contains(self, x: int) -> bool:
        return True if self.ambient is None else bool(self.ambient(x))

    def to_json(self) -> dict:
        return {
            "delta": _rat_json(self.delta),
            "delta_prime": _rat_json(self.delta_prime),
            "K": self.K,
            "n_max": self.n_max,
            "tol": _rat_json(self.tol),
            "seed": self.seed,
            "M_schedule": list(self.M_schedule) if self.M_schedule else None,
            "rank_cap": self.rank_cap,
            "ambient": "integers" if self.ambient is None else "custom",
        }

    @staticmethod
    def from_json(data: dict) -> "PipelineConfig":
        if data.get("ambient", "integers") != "integers":
            raise ValueError("custom ambient oracles do not round-trip")
        return PipelineConfig(
            delta=_rat_parse(data["delta"]),
            delta_prime=_rat_parse(data["delta_prime"]),
            K=data["K"],
            n_max=data["n_max"],
            tol=_rat_parse(data["tol"]),
            seed=data["seed"],
            M_schedule=tuple(data["M_schedule"]) if data.get("M_schedule") else None,
            rank_cap=data.get("rank_cap", 2),
        )


@dataclass(frozen=True)
class StageRecord:
    """Everything certified about one stage set S_k.

    margins holds (m, enclosure) pairs for the translates in sweep order;
    additions holds (c, s, n) triples decomposing each element beyond the
    parent set as a base element plus a ball member. tower and the prime
    witness that feeds it are absent at stage 1.
    """

    k: int
    S: tuple[int, ...]
    witness: Witness
    margins: tuple[tuple[int, MarginResult], ...]
    tower: TowerCertificate | None = None
    tower_witness: Witness | None = None
    additions: tuple[tuple[int, int, int], ...] = ()
    chain_delta: Fraction | None = None
    epsilon_source: str | None = None
    parent: "StageRecord | None" = field(default=None, repr=False)

    @property
    def threshold(self) -> Fraction:
        return Fraction(1, self.k)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "S": list(self.S),
            "witness": self.witness.to_json(),
            "margins": [[m, r.to_json()] for m, r in self.margins],
            "tower": None if self.tower is None else self.tower.to_json(),
            "tower_witness": (
                None if self.tower_witness is None else self.tower_witness.to_json()
            ),
            "additions": [list(t) for t in self.additions],
            "chain_delta": (
                None if self.chain_delta is None else _rat_json(self.chain_delta)
            ),
            "epsilon_source": self.epsilon_source,
        }

    @staticmethod
    def from_json(data: dict, parent: "StageRecord | None" = None) -> "StageRecord":
        return StageRecord(
            k=data["k"],
            S=tuple(data["S"]),
            witness=Witness.from_json(data["witness"]),
            margins=tuple(
                (m, MarginResult.from_json(r)) for m, r in data["margins"]
            ),
            tower=(
                None if data["tower"] is None
                else TowerCertificate.from_json(data["tower"])
            ),
            tower_witness=(
                None if data["tower_witness"] is None
                else Witness.from_json(data["tower_witness"])
            ),
            additions=tuple(tuple(t) for t in data["additions"]),
            chain_delta=(
                None if data["chain_delta"] is None
                else _rat_parse(data["chain_delta"])
            ),
            epsilon_source=data["epsilon_source"],
            parent=parent,
        )


def _translate_order(M: int) -> list[int]:
    ms = [0]
    for i in range(1, M + 1):
        ms.extend((i, -i))
    return ms


def _margin_sweep(
    T: Iterable[int],
    rank: int,
    ms: Sequence[int],
    threshold: Fraction,
    tol: Fraction,
    threads: int = 1,
) -> list[tuple[int, MarginResult]]:
    """Margin enclosures for every translate, in the given order.

    Each call uses both decision thresholds so the search stops as soon as
    the enclosure settles which side of the threshold the margin is on.
    """
    T = sorted(set(T))

    def solve(m: int) -> MarginResult:
        return recurrence_margin(
            [t - m for t in T], rank, tol,
            stop_below=threshold, stop_above=threshold,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, ms))
        return list(zip(ms, results))
    return [(m, solve(m)) for m in ms]


def _closure_loop(
    T: set[int],
    pool: dict[int, tuple[int, int]],
    rank: int,
    ms: Sequence[int],
    threshold: Fraction,
    tol: Fraction,
    budget: int,
    threads: int,
) -> tuple[list[int], list[tuple[int, MarginResult]]]:
    """Add pool elements until every translate margin is under threshold.

    The cut rule: the first failing translate's witness rotation alpha is a
    Bohr ball no current element enters; the pool element c minimizing
    max_j dist((c - m) alpha_j) is the one that enters it most deeply.
    Returns the additions in order and the final all-passing sweep.
    """
    added: list[int] = []
    while True:
        records = _margin_sweep(T, rank, ms, threshold, tol, threads)
        failing = next(
            ((m, r) for m, r in records if not r.upper < threshold), None
        )
        if failing is None:
            return added, records
        m, res = failing
        if len(added) >= budget:
            raise MarginClosureError(m, res.witness_alpha, "cut budget spent")
        candidates = sorted(pool, key=lambda c: (abs(c), c))
        if not candidates:
            raise MarginClosureError(m, res.witness_alpha, "pool exhausted")
        alpha = res.witness_alpha.coords
        best = min(
            candidates,
            key=lambda c: (max(torus_norm((c - m) * a) for a in alpha), abs(c), c),
        )
        T.add(best)
        added.append(best)
        del pool[best]


def init_stage(config: PipelineConfig) -> StageRecord:
    """Stage 1: the smallest odd ambient element and its alternating witness.

    Ten in-blocks of length |s| out of twenty make the density exactly 1/2,
    which is optimal for a single step and above any delta_prime < 1/2.
    """
    bound = max(1, config.n_max)
    s1 = next(
        (s for a in range(1, bound + 1, 2) for s in (a, -a) if config.contains(s)),
        None,
    )
    if s1 is None:
        raise ValueError(f"no odd ambient element with |s| <= {bound}")
    b = abs(s1)
    N = 20 * b
    offset = 0 if s1 > 0 else b
    A = tuple(
        2 * j * b + offset + i for j in range(10) for i in range(b)
    )
    witness = Witness(N, (s1,), A)
    assert nr.verify_witness(witness) and witness.density == Fraction(1, 2)

    ms = _translate_order(config.translate_range(1))
    margins = _margin_sweep({s1}, 1, ms, Fraction(1), config.tol)
    return StageRecord(k=1, S=(s1,), witness=witness, margins=tuple(margins))


def _stage_prime(S: Sequence[int], delta_prime: Fraction) -> Witness:
    """First odd prime whose optimal interval witness beats delta_prime.

    Odd only: at p = 2 the candidate pool is a single parity class and
    rank-2 margins of one-parity sets are exactly 1/2, so stage margins
    could never close below 1/2.
    """
    best: Witness | None = None
    for p in range(3, PRIME_CAP + 1, 2):
        if not _is_prime(p):
            continue
        w = nr.max_avoiding_set(S, p)
        if w.density > delta_prime:
            return w
        if best is None or w.density > best.density:
            best = w
    detail = f"best density {best.density} at N={best.N}" if best else "none tried"
    raise ValueError(f"no odd prime witness above {delta_prime}: {detail}")


def _stage_tower(p: int, k: int, count: int, delta: Fraction):
    """Tower at the density-slack epsilon, or the smallest workable level.

    The slack epsilon keeps count*(1-eps)/p above delta as in the measure
    argument; when its tile search leaves the dimension cap, the loss grid
    is walked upward and the achieved level is recorded instead.
    """
    slack = (1 - delta * p / count) / 2
    try:
        return tw.build_tower(p, k, slack, mode="reduced", d_cap=STAGE_D_CAP), "density-slack"
    except ValueError:
        pass
    for eps in STAGE_EPS_GRID:
        if eps <= slack:
            continue
        try:
            return tw.build_tower(p, k, eps, mode="reduced", d_cap=STAGE_D_CAP), "grid-fallback"
        except ValueError:
            continue
    raise ValueError(
        f"no tile dimension <= {STAGE_D_CAP} works for p={p}, k={k} "
        f"at any loss level in the grid"
    )


def certified_ball(cert: TowerCertificate, n_max: int) -> BHSpec:
    """Membership ball of the tower, shrunk so slack |n| rho stays usable.

    Capping rho at eta/(2 n_max) keeps decisive answers available out to
    n_max; a smaller ball certifies strictly less, so every yes remains
    sound for the certificate's own radius.
    """
    spec = cert.spec
    rho = min(spec.rho, Fraction(spec.eta, 2 * max(1, n_max)))
    return BHSpec(spec.d, spec.alpha_star, rho, spec.k, spec.eta)


def _candidate_pool(
    base: Sequence[int],
    exclude: set[int],
    ball: BHSpec,
    config: PipelineConfig,
) -> dict[int, tuple[int, int]]:
    """Map c -> (s, n) over certified decompositions c = s + n.

    Scans n in the order 0, 1, -1, 2, ... and keeps the first decomposition
    of each candidate, so the stored pairs are reproducible.
    """
    pool: dict[int, tuple[int, int]] = {}
    for n in _translate_order(config.n_max):
        if bh_contains(ball, n) != "yes":
            continue
        for s in sorted(base):
            c = s + n
            if c == 0 or c in exclude or c in pool or not config.contains(c):
                continue
            pool[c] = (s, n)
    return pool


def extend_stage(
    prev: StageRecord, config: PipelineConfig, threads: int = 1
) -> StageRecord:
    """Stage k from stage k-1: prime witness, tower, pool, margin closure."""
    k = prev.k + 1
    if k > config.rank_cap:
        raise ValueError(
            f"stage rank {k} above rank_cap={config.rank_cap}; raise the cap "
            f"explicitly to pay the branch-and-bound cost"
        )
    base = prev.S

    tower_witness = _stage_prime(base, config.delta_prime)
    p = tower_witness.N
    spec, eps_source = _stage_tower(p, k, len(tower_witness.A), config.delta)
    cert = tw.verify_tower(spec, seed=config.seed, trials=PIPELINE_TRIALS)
    if not cert.valid:
        bad = [name for name, v in cert.checks.items() if v.startswith("failed")]
        raise ValueError(f"stage tower failed verification: {bad}")

    ball = certified_ball(cert, config.n_max)
    pool = _candidate_pool(base, set(base), ball, config)
    if not pool:
        raise MarginClosureError(
            0, ball.alpha_star, "pool exhausted (no certified candidates)"
        )

    T = set(base)
    ms = _translate_order(config.translate_range(k))
    added, margins = _closure_loop(
        T, dict(pool), k, ms, Fraction(1, k), config.tol,
        DEFAULT_CUT_BUDGET, threads,
    )
    additions = tuple((c, *pool[c]) for c in added)
    S_k = tuple(sorted(T))

    witness = nr.delta_certificate(S_k, config.delta_prime, WITNESS_SCHEDULE)
    chain_delta = len(tower_witness.A) * cert.mu_E
    return StageRecord(
        k=k,
        S=S_k,
        witness=witness,
        margins=tuple(margins),
        tower=cert,
        tower_witness=tower_witness,
        additions=additions,
        chain_delta=chain_delta,
        epsilon_source=eps_source,
        parent=prev,
    )


@dataclass(frozen=True)
class DiagonalPart:
    rank: int
    R: tuple[int, ...]
    margins: tuple[tuple[int, MarginResult], ...]

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "R": list(self.R),
            "margins": [[m, r.to_json()] for m, r in self.margins],
        }

    @staticmethod
    def from_json(data: dict) -> "DiagonalPart":
        return DiagonalPart(
            data["rank"],
            tuple(data["R"]),
            tuple((m, MarginResult.from_json(r)) for m, r in data["margins"]),
        )


@dataclass(frozen=True)
class DiagonalSelection:
    """Finite parts R_n whose union keeps every certified translate level."""

    parts: tuple[DiagonalPart, ...]
    union: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "parts": [p.to_json() for p in self.parts],
            "union": list(self.union),
        }

    @staticmethod
    def from_json(data: dict) -> "DiagonalSelection":
        return DiagonalSelection(
            tuple(DiagonalPart.from_json(p) for p in data["parts"]),
            tuple(data["union"]),
        )


def select_diagonal(
    stages: Sequence[StageRecord],
    budget: int = DEFAULT_CUT_BUDGET,
    tol: Rat = Fraction(1, 10**6),
    threads: int = 1,
) -> DiagonalSelection:
    """Small parts R_n of each S_n with all |m| < n margins under 1/n.

    Greedy: seed with the smallest element, then grow by the same cut rule
    as stage selection, drawing only from S_n. Strict |m| < n here, against
    |m| <= k in stage records.
    """
    tol = Fraction(tol)
    parts = []
    union: set[int] = set()
    for rec in stages:
        n = rec.k
        members = sorted(rec.S, key=lambda c: (abs(c), c))
        R = {members[0]}
        pool = {c: (c, 0) for c in members[1:]}
        ms = _translate_order(n - 1)
        try:
            added, margins = _closure_loop(
                R, pool, n, ms, Fraction(1, n), tol, budget, threads
            )
        except MarginClosureError as e:
            raise MarginClosureError(
                e.m, e.alpha, f"stage rank {n} under budget {budget}"
            ) from e
        parts.append(DiagonalPart(n, tuple(sorted(R)), tuple(margins)))
        union |= R
    return DiagonalSelection(tuple(parts), tuple(sorted(union)))


@dataclass(frozen=True)
class PipelineRun:
    config: PipelineConfig
    stages: tuple[StageRecord, ...]
    selection: DiagonalSelection | None = None

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "stages": [s.to_json() for s in self.stages],
            "selection": None if self.selection is None else self.selection.to_json(),
        }

    @staticmethod
    def from_json(data: dict) -> "PipelineRun":
        config = PipelineConfig.from_json(data["config"])
        stages: list[StageRecord] = []
        for raw in data["stages"]:
            parent = stages[-1] if stages else None
            stages.append(StageRecord.from_json(raw, parent))
        sel = data.get("selection")
        return PipelineRun(
            config,
            tuple(stages),
            None if sel is None else DiagonalSelection.from_json(sel),
        )


def run_pipeline(config: PipelineConfig, threads: int = 1) -> PipelineRun:
    stages = [init_stage(config)]
    for _ in range(config.K - 1):
        stages.append(extend_stage(stages[-1], config, threads))
    return PipelineRun(config, tuple(stages))


@dataclass(frozen=True)
class RunCheck:
    valid: bool
    failures: tuple[str, ...]
    notes: tuple[tuple[str, str], ...]


def verify_run(run: PipelineRun, threads: int = 1) -> RunCheck:
    """Re-validate every certified fact of a run from its own data.

    Witnesses are re-checked by set arithmetic, towers re-verified with
    their recorded sampling parameters, decompositions re-tested against
    the certificate's membership ball, and margins re-solved from scratch
    with the same thresholds.
    """
    config = run.config
    failures: list[str] = []
    notes: list[tuple[str, str]] = []

    def check(name: str, ok: bool, detail: str):
        notes.append((name, ("ok: " if ok else "FAIL: ") + detail))
        if not ok:
            failures.append(name)

    prev: StageRecord | None = None
    for rec in run.stages:
        tag = f"stage{rec.k}"
        expected_k = 1 if prev is None else prev.k + 1
        check(f"{tag}:rank", rec.k == expected_k, f"k={rec.k}")
        if prev is not None:
            check(
                f"{tag}:chain",
                set(prev.S) <= set(rec.S),
                f"S_{prev.k} within S_{rec.k}",
            )
        check(
            f"{tag}:witness",
            nr.verify_witness(rec.witness)
            and set(rec.witness.S) == set(rec.S)
            and rec.witness.density > config.delta_prime,
            f"N={rec.witness.N} density {rec.witness.density} > {config.delta_prime}",
        )

        if rec.tower is not None:
            cert = rec.tower
            spec = cert.spec
            re_cert = tw.verify_tower(
                spec,
                seed=cert.seed if cert.seed is not None else config.seed,
                trials=cert.trials if cert.trials is not None else PIPELINE_TRIALS,
            )
            check(
                f"{tag}:tower",
                re_cert.valid
                and re_cert.mu_E == cert.mu_E
                and re_cert.separation_min == cert.separation_min,
                f"p={spec.p} d={spec.d} mode={spec.mode}",
            )
            tw_w = rec.tower_witness
            check(
                f"{tag}:tower-witness",
                tw_w is not None
                and nr.verify_witness(tw_w)
                and tw_w.N == spec.p
                and (prev is None or set(tw_w.S) == set(prev.S))
                and tw_w.density > config.delta_prime,
                "prime witness feeds the tower" if tw_w is None else
                f"N={tw_w.N} density {tw_w.density}",
            )
            if tw_w is not None:
                check(
                    f"{tag}:chain-delta",
                    rec.chain_delta == len(tw_w.A) * cert.mu_E,
                    f"chain level {float(rec.chain_delta or 0):.6f} "
                    f"({'above' if rec.chain_delta and rec.chain_delta > config.delta else 'below'} delta)",
                )
            ball = certified_ball(cert, config.n_max)
            bad = [
                (c, s, n)
                for c, s, n in rec.additions
                if c != s + n
                or (prev is not None and s not in prev.S)
                or bh_contains(ball, n) != "yes"
            ]
            check(
                f"{tag}:decompositions",
                not bad and set(rec.S) == set(prev.S if prev else ()) | {c for c, _, _ in rec.additions},
                f"{len(rec.additions)} additions all certified" if not bad
                else f"bad triples {bad}",
            )

        thr = rec.threshold
        ms = [m for m, _ in rec.margins]
        fresh = dict(_margin_sweep(rec.S, rec.k, ms, thr, config.tol, threads))
        ok = bool(ms)
        for m, stored in rec.margins:
            again = fresh[m]
            overlap = again.lower <= stored.upper and stored.lower <= again.upper
            if not (stored.upper < thr and again.upper < thr and overlap):
                ok = False
        check(
            f"{tag}:margins",
            ok,
            f"{len(ms)} translates re-solved under {thr}",
        )
        prev = rec

    if run.selection is not None:
        for part in run.selection.parts:
            tag = f"selection-rank{part.rank}"
            rec = next((s for s in run.stages if s.k == part.rank), None)
            check(
                f"{tag}:subset",
                rec is not None and set(part.R) <= set(rec.S),
                "R within its stage set",
            )
            thr = Fraction(1, part.rank)
            ms = [m for m, _ in part.margins]
            fresh = dict(
                _margin_sweep(part.R, part.rank, ms, thr, config.tol, threads)
            )
            ok = bool(ms) and all(
                stored.upper < thr and fresh[m].upper < thr
                and fresh[m].lower <= stored.upper and stored.lower <= fresh[m].upper
                for m, stored in part.margins
            )
            check(f"{tag}:margins", ok, f"{len(ms)} translates under {thr}")
        union = set()
        for part in run.selection.parts:
            union |= set(part.R)
        check(
            "selection:union",
            union == set(run.selection.union),
            f"{len(union)} elements",
        )

    return RunCheck(not failures, tuple(failures), tuple(notes))


def emit_report(
    stages: Sequence[StageRecord],
    selection: DiagonalSelection | None = None,
    config: PipelineConfig | None = None,
) -> tuple[dict, str]:
    """JSON document plus a fixed-width table over the stage chain."""
    doc = {
        "stages": [s.to_json() for s in stages],
        "selection": None if selection is None else selection.to_json(),
    }
    if config is not None:
        doc["config"] = config.to_json()

    lines = []
    header = (
        f"{'k':>2} {'|S_k|':>5} {'witness':>12} {'density':>9} "
        f"{'tower':>16} {'eta':>12} {'rho':>14} {'worst margin':>14}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    for rec in stages:
        wit = f"N={rec.witness.N}"
        dens = str(rec.witness.density)
        if rec.tower is None:
            tower = "-"
            eta = rho = "-"
        else:
            spec = rec.tower.spec
            tower = f"p={spec.p} d={spec.d} {spec.mode}"
            eta = f"{float(spec.eta):.3e}"
            rho = f"{float(spec.rho):.3e}"
        worst = max((r.upper for _, r in rec.margins), default=Fraction(0))
        lines.append(
            f"{rec.k:>2} {len(rec.S):>5} {wit:>12} {dens:>9} "
            f"{tower:>16} {eta:>12} {rho:>14} "
            f"{float(worst):>10.6f}/{rec.threshold}"
        )
        if rec.additions:
            adds = ", ".join(f"{c}={s}+{n}" for c, s, n in rec.additions)
            lines.append(f"   additions: {adds}")
        if rec.chain_delta is not None:
            lines.append(
                f"   chain level {float(rec.chain_delta):.6f} "
                f"(epsilon from {rec.epsilon_source})"
            )
    if selection is not None:
        for part in selection.parts:
            lines.append(
                f"diagonal rank {part.rank}: R={list(part.R)} "
                f"threshold 1/{part.rank}"
            )
        lines.append(f"diagonal union: {list(selection.union)}")
    return doc, "\n".join(lines) + "\n"
