"""Command-line front end: build, serialize, verify, render.

Exit codes: 0 success, 1 a verification or search came back negative,
2 malformed usage or violated preconditions. Certificates are written as
envelope JSON (see serialize) so `verify` can re-check them offline.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal
from fractions import Fraction

from . import hamming_cells as hc
from . import nonrecurrence as nr
from . import oracle as orc
from . import pipeline as pl
from . import serialize as sz
from . import svgout
from . import tower_builder as tw
from .bohr_analysis import MarginResult, recurrence_margin


def _rat(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError:
        return Fraction(Decimal(text))


def _intset(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("need at least one element")
    return vals


def _nrange(text: str) -> range:
    lo, _, hi = text.partition(":")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like 4:64, got {text!r}")
    return range(a, b + 1)


def _emit(doc: dict, out: str | None) -> None:
    text = sz.dump(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# subcommands ----------------------------------------------------------

def _cmd_tile(args) -> int:
    r = hc.gp_tile(args.p, args.k, args.epsilon, args.d_cap)
    frac = r.fraction
    doc = {
        "op": "tile",
        "p": r.p, "k": r.k,
        "epsilon": {"num": str(r.epsilon.numerator), "den": str(r.epsilon.denominator)},
        "d": r.d,
        "count": str(r.count),
        "fraction": {"num": str(frac.numerator), "den": str(frac.denominator)},
        "fraction_float": float(frac),
        "screened": r.screened,
        "family": r.family.to_json(),
        "inner": r.inner.to_json(),
    }
    _emit(doc, args.out)
    _say(f"tile d={r.d}, count {r.count}, fraction {float(frac):.6g}")
    return 0


def _cmd_count(args) -> int:
    ds = [args.d] if args.d is not None else list(range(args.d_from, args.d_to + 1))
    rows = []
    for d in ds:
        e0 = hc.count_family(hc.CellFamily(args.p, d, args.k, "E0"))
        e = hc.count_family(hc.CellFamily(args.p, d, args.k, "E"))
        frac = Fraction(e, args.p**d)
        rows.append({
            "d": d, "e0": str(e0), "e": str(e),
            "fraction": {"num": str(frac.numerator), "den": str(frac.denominator)},
            "fraction_float": float(frac),
            "eprime_bound_float": float(min(1, hc.eprime_bound(args.p, d, args.k))),
        })
    if args.csv:
        lines = ["p,k,d,e0,e,fraction_float,eprime_bound_float"]
        for r in rows:
            lines.append(
                f"{args.p},{args.k},{r['d']},{r['e0']},{r['e']},"
                f"{r['fraction_float']:.9f},{r['eprime_bound_float']:.9f}"
            )
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit({"op": "count", "p": args.p, "k": args.k, "rows": rows}, args.out)
    return 0


def _cmd_tower(args) -> int:
    spec = tw.build_tower(args.p, args.k, args.epsilon, mode=args.mode, d_cap=args.d_cap)
    cert = tw.verify_tower(spec, seed=args.seed, trials=args.trials)
    _emit(sz.envelope("tower", cert.to_json(), seed=args.seed), args.out)
    for name, status in cert.checks.items():
        _say(f"  {name}: {status}")
    _say(f"tower p={spec.p} k={spec.k} d={spec.d} valid={cert.valid}")
    return 0 if cert.valid else 1


def _cmd_witness(args) -> int:
    if args.cyclic:
        if args.mod is None:
            raise ValueError("--cyclic needs --mod")
        w = nr.max_cyclic_avoiding(args.set, args.mod)
        _emit(sz.envelope("cyclic", w.to_json()), args.out)
        _say(f"cyclic witness |A|={len(w.A)} density {w.density}")
        return 0
    if args.delta is not None:
        if args.n_range is None:
            raise ValueError("--delta needs --n-range")
        try:
            w = nr.delta_certificate(args.set, args.delta, args.n_range)
        except ValueError as e:
            _say(f"search failed: {e}")
            return 1
        _emit(sz.envelope("witness", w.to_json()), args.out)
        _say(f"witness N={w.N} density {w.density} > {args.delta}")
        return 0
    if args.n is None:
        raise ValueError("need one of --n, --cyclic --mod, --delta --n-range")
    w = nr.max_avoiding_set(args.set, args.n)
    _emit(sz.envelope("witness", w.to_json()), args.out)
    _say(f"witness |A|={len(w.A)} density {w.density} optimal={w.optimal}")
    return 0


def _cmd_margin(args) -> int:
    result = recurrence_margin(
        args.set, args.dim, args.tol,
        stop_below=args.stop_below, stop_above=args.stop_above,
        node_budget=args.node_budget,
    )
    query = {
        "S": sorted(set(args.set)),
        "d": args.dim,
        "tol": {"num": str(args.tol.numerator), "den": str(args.tol.denominator)},
        "stop_below": None if args.stop_below is None else
            {"num": str(args.stop_below.numerator), "den": str(args.stop_below.denominator)},
        "stop_above": None if args.stop_above is None else
            {"num": str(args.stop_above.numerator), "den": str(args.stop_above.denominator)},
        "node_budget": args.node_budget,
    }
    _emit(sz.envelope("margin", {"query": query, "result": result.to_json()}), args.out)
    _say(f"lower={result.lower} upper={result.upper} ({result.stopped})")
    return 0


def _cmd_pipeline(args) -> int:
    config = pl.PipelineConfig(
        delta=args.delta, delta_prime=args.delta_prime, K=args.stages,
        n_max=args.nmax, tol=args.tol, seed=args.seed,
    )
    run = pl.run_pipeline(config, threads=args.threads)
    if args.diagonal is not None:
        sel = pl.select_diagonal(run.stages, budget=args.diagonal,
                                 tol=config.tol, threads=args.threads)
        run = pl.PipelineRun(run.config, run.stages, sel)
    _emit(sz.envelope("pipeline", run.to_json(), seed=args.seed), args.out)
    for rec in run.stages:
        _say(f"stage {rec.k}: S={list(rec.S)} witness density {rec.witness.density}")
    return 0


def _replay_margin(payload: dict) -> bool:
    q = payload["query"]
    rat = lambda r: None if r is None else Fraction(int(r["num"]), int(r["den"]))
    again = recurrence_margin(
        q["S"], q["d"], rat(q["tol"]),
        stop_below=rat(q["stop_below"]), stop_above=rat(q["stop_above"]),
        node_budget=q["node_budget"],
    )
    return again == MarginResult.from_json(payload["result"])


def _cmd_verify(args) -> int:
    with open(args.file) as fh:
        data = sz.load(fh.read())
    payload = sz.open_envelope(data)
    kind = data["kind"]

    if kind == "witness":
        ok = nr.verify_witness(nr.Witness.from_json(payload))
        _say(f"witness: {'ok' if ok else 'FAIL: avoidance or containment broken'}")
        return 0 if ok else 1
    if kind == "cyclic":
        ok = nr.verify_cyclic_witness(nr.CyclicWitness.from_json(payload))
        _say(f"cyclic witness: {'ok' if ok else 'FAIL: a rotation meets A'}")
        return 0 if ok else 1
    if kind == "union":
        ok = nr.verify_union(nr.UnionCertificate.from_json(payload))
        _say(f"union certificate: {'ok' if ok else 'FAIL: parts do not recombine'}")
        return 0 if ok else 1
    if kind == "tower":
        cert = tw.TowerCertificate.from_json(payload)
        again = tw.verify_tower(
            cert.spec,
            seed=cert.seed if cert.seed is not None else 0,
            trials=cert.trials if cert.trials is not None else tw.SAMPLE_TRIALS,
        )
        if not again.valid:
            bad = [n for n, v in again.checks.items() if not v.startswith("verified")]
            _say(f"tower: FAIL at {', '.join(bad)}")
            return 1
        if again != cert:
            _say("tower: FAIL: stored certificate disagrees with re-verification")
            return 1
        _say(f"tower: ok (p={cert.spec.p} d={cert.spec.d} {cert.spec.mode})")
        return 0
    if kind == "margin":
        ok = _replay_margin(payload)
        _say(f"margin: {'ok (re-solved identically)' if ok else 'FAIL: replay differs'}")
        return 0 if ok else 1
    # stage envelopes carry a prefix of a run and verify the same way
    run = pl.PipelineRun.from_json(payload)
    chk = pl.verify_run(run, threads=args.threads)
    for name, note in chk.notes:
        _say(f"  {name}: {note}")
    _say(f"{kind}: valid={chk.valid}")
    return 0 if chk.valid else 1


def _cmd_export_svg(args) -> int:
    with open(args.infile) as fh:
        data = sz.load(fh.read())
    payload = sz.open_envelope(data, expect_kind="tower")
    cert = tw.TowerCertificate.from_json(payload)
    svgout.export_svg(cert.spec, args.out)
    _say(f"wrote {args.out}")
    return 0


def _cmd_report(args) -> int:
    with open(args.infile) as fh:
        data = sz.load(fh.read())
    payload = sz.open_envelope(data, expect_kind="pipeline")
    run = pl.PipelineRun.from_json(payload)
    from .report import write_report

    paths = write_report(run, args.outdir)
    _emit({"op": "report", "paths": paths}, None)
    return 0


def _cmd_oracle(args) -> int:
    if args.what == "avoiding":
        if args.n is None:
            raise ValueError("oracle avoiding needs --n")
        brute = orc.exhaustive_avoiding(args.set, args.n)
        w = nr.max_avoiding_set(args.set, args.n)
        agree = brute == len(w.A) and w.optimal
        _say(f"oracle optimum {brute}, dp optimum {len(w.A)}")
        return 0 if agree else 1
    if args.what == "cells":
        tables = orc.enumerate_cells(args.p, args.d, args.k)
        agree = True
        for cell, members in sorted(tables.bias.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
            exact = hc.count_bias(hc.CellSpec(args.p, args.d, args.k, cell))
            agree &= exact == len(members)
            _say(f"  Bias({sorted(cell)}): enumerated {len(members)}, counted {exact}")
        e0 = hc.count_family(hc.CellFamily(args.p, args.d, args.k, "E0"))
        e = hc.count_family(hc.CellFamily(args.p, args.d, args.k, "E"))
        agree &= e0 == len(tables.e0) and e == len(tables.e)
        _say(f"  E0: {len(tables.e0)}/{e0}  E: {len(tables.e)}/{e}")
        return 0 if agree else 1
    if args.what == "margin":
        lo, hi = orc.grid_margin(args.set, args.dim, orc.GridSpec(args.dim, args.m))
        exact = recurrence_margin(args.set, args.dim, args.tol)
        overlap = exact.lower <= hi and lo <= exact.upper
        _say(f"grid [{lo}, {hi}] vs exact [{exact.lower}, {exact.upper}]")
        return 0 if overlap else 1
    raise ValueError(f"unknown oracle check {args.what!r}")


# parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bohrcert",
        description="certified constructions around Bohr sets, towers, and witnesses",
    )
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tile", help="least tiling dimension for a loss level")
    t.add_argument("--p", type=int, required=True)
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--epsilon", type=_rat, required=True)
    t.add_argument("--d-cap", type=int, default=hc.DEFAULT_D_CAP)
    t.add_argument("--out")
    t.set_defaults(func=_cmd_tile)

    c = sub.add_parser("count", help="bias family counts and fractions")
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--d", type=int)
    c.add_argument("--d-from", type=int, default=1)
    c.add_argument("--d-to", type=int, default=12)
    c.add_argument("--csv", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=_cmd_count)

    tw_p = sub.add_parser("tower", help="build and verify a tower certificate")
    tw_p.add_argument("--p", type=int, required=True)
    tw_p.add_argument("--k", type=int, required=True)
    tw_p.add_argument("--epsilon", type=_rat, required=True)
    tw_p.add_argument("--mode", choices=("exact", "reduced"), default="exact")
    tw_p.add_argument("--d-cap", type=int, default=hc.DEFAULT_D_CAP)
    tw_p.add_argument("--seed", type=int, default=0)
    tw_p.add_argument("--trials", type=int, default=tw.SAMPLE_TRIALS)
    tw_p.add_argument("--out")
    tw_p.set_defaults(func=_cmd_tower)

    w = sub.add_parser("witness", help="maximum avoiding sets and certificates")
    w.add_argument("--set", type=_intset, required=True)
    w.add_argument("--n", type=int)
    w.add_argument("--cyclic", action="store_true")
    w.add_argument("--mod", type=int)
    w.add_argument("--delta", type=_rat)
    w.add_argument("--n-range", type=_nrange)
    w.add_argument("--out")
    w.set_defaults(func=_cmd_witness)

    m = sub.add_parser("margin", help="recurrence margin enclosure")
    m.add_argument("--set", type=_intset, required=True)
    m.add_argument("--dim", type=int, required=True)
    m.add_argument("--tol", type=_rat, default=Fraction(1, 1024))
    m.add_argument("--stop-below", type=_rat)
    m.add_argument("--stop-above", type=_rat)
    m.add_argument("--node-budget", type=int, default=200_000)
    m.add_argument("--out")
    m.set_defaults(func=_cmd_margin)

    pp = sub.add_parser("pipeline", help="staged nonrecurrent construction")
    pp.add_argument("--delta", type=_rat, required=True)
    pp.add_argument("--delta-prime", type=_rat, required=True)
    pp.add_argument("--stages", type=int, required=True)
    pp.add_argument("--nmax", type=int, default=2000)
    pp.add_argument("--tol", type=_rat, default=Fraction(1, 10**6))
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("--threads", type=int, default=1)
    pp.add_argument("--diagonal", type=int, help="also select diagonal parts under this budget")
    pp.add_argument("--out")
    pp.set_defaults(func=_cmd_pipeline)

    v = sub.add_parser("verify", help="re-validate a certificate file")
    v.add_argument("file")
    v.add_argument("--threads", type=int, default=1)
    v.set_defaults(func=_cmd_verify)

    o = sub.add_parser("oracle", help="брute-force cross-checks")
    o.add_argument("what", choices=("avoiding", "cells", "margin"))
    o.add_argument("--set", type=_intset)
    o.add_argument("--n", type=int)
    o.add_argument("--p", type=int)
    o.add_argument("--d", type=int)
    o.add_argument("--k", type=int)
    o.add_argument("--dim", type=int)
    o.add_argument("--m", type=int, default=512)
    o.add_argument("--tol", type=_rat, default=Fraction(1, 1024))
    o.set_defaults(func=_cmd_oracle)

    e = sub.add_parser("export-svg", help="draw a low-dimensional tower")
    e.add_argument("--in", dest="infile", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=_cmd_export_svg)

    r = sub.add_parser("report", help="tables and figures for a pipeline run")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--outdir", required=True)
    r.set_defaults(func=_cmd_report)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except pl.MarginClosureError as e:
        _say(f"construction failed: {e}")
        return 1
    except (ValueError, OSError) as e:
        _say(f"error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
