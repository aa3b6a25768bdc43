"""Command-line front end: reproducible experiments with CSV/JSON artifacts.

Subcommands:

  mu           dump the limit law (k, mu_k, tail_k, E_tau_up_k)
  wn           chain-law snapshots (n, k, p_k)
  tv-rate      total-variation rate table (n, d_tv, err_bar, normalizer,
               normalized)
  h-check      defect-table property suite + CSV (l, sup_h, I_l, l_sup, bound)
  stein-check  balance-equation residual suite, JSON report
  outdegree    Poisson-approximation tables (n, lambda_n, exact_tv, bh_bound,
               normalized), exact or Monte Carlo
  simulate     seeded Monte Carlo with histogram CSV (and optional edge list)
  all          the full acceptance battery; exit 0 iff every criterion passes

Floats are written with 17 significant digits so identical configs and seeds
produce byte-identical files.  Configuration errors exit with status 2 and a
machine-readable JSON object on stderr; failed property suites exit 1.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import acceptance, chain, defect, graphsim, limitlaw, outdegree, stein
from .attachment import classify, rule_from_json, rule_to_json
from .errors import PrefattError

__all__ = ["main"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _parse_grid(text: str) -> list[int]:
    """'a:b:geometric' doubles from a to b; comma lists pass through."""
    if ":" in text:
        a, b, kind = text.split(":")
        if kind != "geometric":
            raise ValueError(f"unknown grid kind {kind!r}")
        lo, hi = int(a), int(b)
        out = []
        n = lo
        while n <= hi:
            out.append(n)
            n *= 2
        return out
    return [int(tok) for tok in text.split(",") if tok]


@dataclass
class _Ctx:
    out: Path
    seed: int
    trials: int
    epsilon: float
    threads: int


def _cmd_mu(args, ctx: _Ctx) -> int:
    rule = rule_from_json(args.rule)
    law = limitlaw.compute_mu(rule, ctx.epsilon)
    k_max = min(args.k_max, law.truncation_K)
    times = limitlaw.hitting_times(rule, k_max)
    rows = [
        (k, float(law.masses[k]), float(law.tail_at[k]), float(times.up_steps[k]))
        for k in range(k_max + 1)
    ]
    _write_csv(ctx.out / "mu.csv", ["k", "mu_k", "tail_k", "E_tau_up_k"], rows)
    _write_json(
        ctx.out / "mu.json",
        {
            "rule": rule_to_json(rule),
            "truncation_K": law.truncation_K,
            "truncation_mass": law.truncation_mass,
        },
    )
    return 0


def _cmd_wn(args, ctx: _Ctx) -> int:
    rule = rule_from_json(args.rule)
    snaps = _parse_grid(args.snapshot_at) if args.snapshot_at else [args.n_max]
    start = rule.d0 if args.start is None else args.start
    rows = []
    for law in chain.evolve(rule, args.n_max, start, yield_at=snaps):
        rows.extend((law.n, k, float(p)) for k, p in enumerate(law.pmf))
    _write_csv(ctx.out / "wn.csv", ["n", "k", "p_k"], rows)
    return 0


def _cmd_tv_rate(args, ctx: _Ctx) -> int:
    rule = rule_from_json(args.rule)
    grid = _parse_grid(args.n_grid)
    if args.regime == "log":
        regime = chain.LogOverN()
    else:
        cls = classify(rule, max(grid))
        if cls.band_gamma is None:
            raise PrefattError("power regime needs k <= f(k) <= k + gamma")
        regime = chain.PowerLaw(cls.band_gamma)
    table = chain.certify_rate(rule, grid, regime, epsilon=ctx.epsilon)
    rows = [(r.n, r.d_tv, r.err_bar, r.normalizer, r.normalized) for r in table.rows]
    _write_csv(
        ctx.out / "tv_rate.csv", ["n", "d_tv", "err_bar", "normalizer", "normalized"], rows
    )
    _write_json(
        ctx.out / "tv_rate.json",
        {
            "rule": rule_to_json(rule),
            "regime": "log" if isinstance(regime, chain.LogOverN) else "power",
            "sup_normalized": table.sup_normalized,
            "quartile_ratio": table.quartile_ratio,
        },
    )
    return 0


def _cmd_h_check(args, ctx: _Ctx) -> int:
    rule = rule_from_json(args.rule)
    cls = classify(rule, args.rows + 1)
    table = defect.build_table(rule, args.rows)
    report = defect.verify_properties(table, cls)
    turning = report.turning
    sups = table.rows.max(axis=1)
    const = (
        defect.sup_bound_constant(rule, cls.crossing_k)
        if cls.crossing_k is not None
        else math.nan
    )
    rows = []
    for ell in range(1, args.rows + 1):
        rows.append(
            (
                ell,
                float(sups[ell - 1]),
                int(turning[ell - 1]) if turning is not None else -1,
                ell * float(sups[ell - 1]),
                const,
            )
        )
    _write_csv(ctx.out / "h_check.csv", ["l", "sup_h", "I_l", "l_sup", "bound"], rows)
    payload = {
        "rule": rule_to_json(rule),
        "checks": [asdict(c) for c in report.checks],
        "sup_times_l": report.sup_times_l,
    }
    _write_json(ctx.out / "h_check.json", payload)
    return 0 if report.all_passed else 1


def _cmd_stein_check(args, ctx: _Ctx) -> int:
    rule = rule_from_json(args.rule)
    n = args.n
    law = limitlaw.compute_mu(rule, ctx.epsilon, k_min=max(args.k_max, n + 2))
    sol = stein.SteinSolution(rule, law)
    table = defect.build_table(rule, n)
    law_next = chain.chain_law(rule, n + 1, 0)
    sets = stein.random_index_sets(args.sets, args.k_max, ctx.seed)
    max_v = max_res = max_spread = 0.0
    for a in sets:
        max_v = max(max_v, float(np.abs(sol.v_array(a, args.k_max)).max()))
        max_res = max(max_res, float(np.abs(sol.residual_array(a, args.k_max)).max()))
        triple = stein.triple_sum_check(rule, a, n, solution=sol, table=table, law_next=law_next)
        max_spread = max(max_spread, triple.max_spread)
    payload = {
        "rule": rule_to_json(rule),
        "sets": args.sets,
        "k_max": args.k_max,
        "n": n,
        "max_abs_v": max_v,
        "max_residual": max_res,
        "max_triple_spread": max_spread,
    }
    _write_json(ctx.out / "stein_check.json", payload)
    ok = max_v <= 1.0 + 1e-12 and max_res <= 1e-9 and max_spread <= 1e-9
    return 0 if ok else 1


def _cmd_outdegree(args, ctx: _Ctx) -> int:
    rule = rule_from_json(args.rule)
    grid = _parse_grid(args.n_grid)
    if args.mc:
        rows = []
        for n in grid:
            edges = graphsim.last_arrival_edges(
                graphsim.RandomOutdegree(rule), n, ctx.trials, ctx.seed
            )
            p_hat = edges.mean(axis=0)
            lam = float(p_hat.sum())
            counts = np.bincount(edges.sum(axis=1), minlength=1)
            pmf = counts / ctx.trials
            pois = outdegree.poisson_pmf(lam)
            width = max(pmf.size, pois.size)
            a = np.zeros(width)
            b = np.zeros(width)
            a[: pmf.size] = pmf
            b[: pois.size] = pois
            tv = 0.5 * float(np.abs(a - b).sum())
            rows.append((n, lam, tv, math.nan, math.nan))
        _write_csv(
            ctx.out / "outdegree.csv",
            ["n", "lambda_n", "exact_tv", "bh_bound", "normalized"],
            rows,
        )
        return 0
    if max(grid) > 4096:
        raise PrefattError("exact outdegree mode caps at n = 4096; use --mc beyond")
    table = outdegree.rate_report(rule, grid)
    rows = [(r.n, r.lambda_n, r.exact_tv, r.bh_bound, r.normalized) for r in table.rows]
    _write_csv(
        ctx.out / "outdegree.csv",
        ["n", "lambda_n", "exact_tv", "bh_bound", "normalized"],
        rows,
    )
    _write_json(
        ctx.out / "outdegree.json",
        {
            "rule": rule_to_json(rule),
            "gamma": table.gamma,
            "regime": table.regime,
            "sup_normalized": table.sup_normalized,
            "quartile_ratio": table.quartile_ratio,
        },
    )
    return 0


def _make_model(args) -> graphsim.Model:
    if args.model == "independent":
        if not args.rule:
            raise PrefattError("the independent-edges model needs --rule")
        return graphsim.RandomOutdegree(rule_from_json(args.rule))
    if args.model == "single-edge":
        return graphsim.FixedOutdegree(args.delta)
    if args.model == "spatial":
        m, a1, a2, p = (tok for tok in args.spatial_params.split(","))
        return graphsim.Spatial(m=int(m), a1=float(a1), a2=float(a2), p=float(p))
    raise PrefattError(f"unknown model {args.model!r}")


def _cmd_simulate(args, ctx: _Ctx) -> int:
    model = _make_model(args)
    hist = graphsim.empirical_uniform_indegree(model, args.n, ctx.trials, ctx.seed)
    rows = [(k, int(c), float(c) / ctx.trials) for k, c in enumerate(hist.counts)]
    _write_csv(ctx.out / "histogram.csv", ["k", "count", "freq"], rows)
    if args.edges:
        state = graphsim.simulate(model, args.n, ctx.seed, keep_edges=True)
        if state.edges is not None:
            path = ctx.out / "edges.txt"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("".join(f"{s} {d}\n" for s, d in state.edges))
    return 0


def _cmd_all(args, ctx: _Ctx) -> int:
    idents = [int(tok) for tok in args.only.split(",")] if args.only else None
    if ctx.threads > 1:
        wanted = acceptance.CRITERIA if idents is None else [
            fn for fn in acceptance.CRITERIA if fn.ident in idents
        ]
        with ThreadPoolExecutor(max_workers=ctx.threads) as pool:
            results = list(pool.map(lambda fn: fn(), wanted))
        results.sort(key=lambda r: r.ident)
    else:
        results = acceptance.run_all(idents)
    for res in results:
        print(res.line())
    _write_json(
        ctx.out / "acceptance.json",
        [
            {
                "criterion": r.ident,
                "name": r.name,
                "passed": r.passed,
                "elapsed_s": r.elapsed,
                "details": r.details,
            }
            for r in results
        ],
    )
    return 0 if all(r.passed for r in results) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefatt",
        description="Exact numerics and seeded simulation for preferential-attachment degree laws.",
    )
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--epsilon", type=float, default=1e-12, help="limit-law tail mass target")
    parser.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mu", help="dump the limit law")
    p.add_argument("--rule", required=True, help="JSON descriptor (inline or file path)")
    p.add_argument("--k-max", type=int, default=10_000)
    p.set_defaults(fn=_cmd_mu)

    p = sub.add_parser("wn", help="chain-law snapshots")
    p.add_argument("--rule", required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--snapshot-at", default="", help="comma list or a:b:geometric")
    p.add_argument("--start", type=int, default=None, help="start state (default: the rule's d0)")
    p.set_defaults(fn=_cmd_wn)

    p = sub.add_parser("tv-rate", help="total-variation rate table")
    p.add_argument("--rule", required=True)
    p.add_argument("--n-grid", default="128:16384:geometric")
    p.add_argument("--regime", choices=["log", "power"], default="log")
    p.set_defaults(fn=_cmd_tv_rate)

    p = sub.add_parser("h-check", help="defect-table property suite")
    p.add_argument("--rule", required=True)
    p.add_argument("--rows", type=int, default=500)
    p.set_defaults(fn=_cmd_h_check)

    p = sub.add_parser("stein-check", help="balance-equation residual suite")
    p.add_argument("--rule", required=True)
    p.add_argument("--sets", type=int, default=200)
    p.add_argument("--k-max", type=int, default=200)
    p.add_argument("--n", type=int, default=200)
    p.set_defaults(fn=_cmd_stein_check)

    p = sub.add_parser("outdegree", help="Poisson-approximation tables")
    p.add_argument("--rule", required=True)
    p.add_argument("--n-grid", default="16:2048:geometric")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--mc", action="store_true", default=False)
    p.set_defaults(fn=_cmd_outdegree)

    p = sub.add_parser("simulate", help="seeded Monte Carlo")
    p.add_argument("--model", choices=["independent", "single-edge", "spatial"], required=True)
    p.add_argument("--rule", default="")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--spatial-params", default="2,0.3,0.4,0.8", help="m,A1,A2,p")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--edges", action="store_true", help="also dump one trajectory's edge list")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("all", help="run the acceptance battery")
    p.add_argument("--only", default="", help="comma list of criterion ids")
    p.set_defaults(fn=_cmd_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    ctx = _Ctx(
        out=Path(args.out),
        seed=args.seed,
        trials=args.trials,
        epsilon=args.epsilon,
        threads=args.threads,
    )
    try:
        return args.fn(args, ctx)
    except (PrefattError, ValueError, OSError, json.JSONDecodeError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("k", "value", "bound", "which", "ell"):
            if hasattr(exc, attr):
                payload[attr] = getattr(exc, attr)
        print(json.dumps(payload), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
