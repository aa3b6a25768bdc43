"""The toolkit's verification battery.

Each criterion pins an exact identity, a structural property, or an O(rate)
bound at a fixed tolerance; together they exercise every module against
independent oracles (exhaustive enumeration, closed forms, seeded Monte
Carlo).  The rate checks record their empirical suprema so runs double as
regression baselines.  `run_all` powers both the pytest acceptance module
and the CLI's `all` subcommand.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import chain, defect, graphsim, limitlaw, outdegree, stein
from .attachment import Affine, AttachmentRule, Constant, SublinearPower, classify

__all__ = ["BATTERY", "CriterionResult", "run_all", "CRITERIA"]

BATTERY: tuple[AttachmentRule, ...] = (
    Constant(0.5),
    Constant(0.9),
    Constant(1.0),
    Affine(0.5, 0.5),
    Affine(1.0, 0.5),
    SublinearPower(0.8, 0.5, 0.8),
)

_SEED = 20251114


def _name(rule: AttachmentRule) -> str:
    if isinstance(rule, Constant):
        return f"constant({rule.c})"
    if isinstance(rule, Affine):
        return f"affine({rule.gamma},{rule.beta})"
    if isinstance(rule, SublinearPower):
        return f"power({rule.gamma},{rule.alpha},{rule.f0})"
    return type(rule).__name__


@dataclass
class CriterionResult:
    ident: int
    name: str
    passed: bool
    elapsed: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.ident}: {self.name} ({self.elapsed:.2f}s)"


def _criterion(ident: int, name: str):
    def wrap(fn: Callable[[], tuple[bool, dict]]):
        def run() -> CriterionResult:
            start = time.perf_counter()
            passed, details = fn()
            return CriterionResult(ident, name, passed, time.perf_counter() - start, details)

        run.ident = ident
        run.criterion_name = name
        return run

    return wrap


@_criterion(1, "chain DP equals exhaustive enumeration for n <= 4")
def criterion_oracle_equivalence() -> tuple[bool, dict]:
    worst = 0.0
    for rule in BATTERY:
        for n in (1, 2, 3, 4):
            oracle = graphsim.enumerate_exact(graphsim.RandomOutdegree(rule), n)
            law = chain.chain_law(rule, n, rule.d0)
            width = max(oracle.size, law.pmf.size)
            a = np.zeros(width)
            b = np.zeros(width)
            a[: oracle.size] = oracle
            b[: law.pmf.size] = law.pmf
            worst = max(worst, float(np.abs(a - b).max()))
    return worst <= 1e-14, {"max_abs_diff": worst, "tolerance": 1e-14}


_RATE_GRID = [2**e for e in range(7, 15)]


@_criterion(2, "d_TV * n/log(n) bounded for rules crossing below the diagonal")
def criterion_log_rate() -> tuple[bool, dict]:
    details = {}
    ok = True
    for rule in (Affine(0.5, 0.5), Constant(0.9)):
        table = chain.certify_rate(rule, _RATE_GRID, chain.LogOverN())
        details[_name(rule)] = {
            "sup_normalized": table.sup_normalized,
            "quartile_ratio": table.quartile_ratio,
        }
        ok = ok and table.quartile_ratio <= 1.5
    return ok, details


@_criterion(3, "d_TV * n^(1-gamma) bounded for f(k) = k + gamma")
def criterion_power_rate() -> tuple[bool, dict]:
    details = {}
    ok = True
    for gamma in (0.3, 0.5, 0.7):
        rule = Affine(1.0, gamma)
        table = chain.certify_rate(rule, _RATE_GRID, chain.PowerLaw(gamma))
        details[_name(rule)] = {
            "sup_normalized": table.sup_normalized,
            "quartile_ratio": table.quartile_ratio,
        }
        ok = ok and table.quartile_ratio <= 1.5
    return ok, details


@_criterion(4, "defect-table structural properties at L = 500")
def criterion_defect_properties() -> tuple[bool, dict]:
    details = {}
    ok = True
    for rule in BATTERY:
        cls = classify(rule, 501)
        table = defect.build_table(rule, 500)
        report = defect.verify_properties(table, cls)
        details[_name(rule)] = {
            c.name: (c.passed if c.applicable else "n/a") for c in report.checks
        }
        ok = ok and report.all_passed
    return ok, details


@_criterion(5, "balance-equation solutions: bound, residuals, triple identity")
def criterion_stein_suite() -> tuple[bool, dict]:
    sets = stein.random_index_sets(200, 200, _SEED)
    n = 200
    max_v = 0.0
    max_res = 0.0
    max_spread = 0.0
    for rule in BATTERY:
        if rule.d0 != 0:
            continue
        law = limitlaw.compute_mu(rule, 1e-12, k_min=n + 2)
        sol = stein.SteinSolution(rule, law)
        table = defect.build_table(rule, n)
        law_next = chain.chain_law(rule, n + 1, 0)
        for a in sets:
            v = sol.v_array(a, 200)
            max_v = max(max_v, float(np.abs(v).max()))
            res = sol.residual_array(a, 200)
            max_res = max(max_res, float(np.abs(res).max()))
            triple = stein.triple_sum_check(
                rule, a, n, solution=sol, table=table, law_next=law_next
            )
            max_spread = max(max_spread, triple.max_spread)
    ok = max_v <= 1.0 + 1e-12 and max_res <= 1e-9 and max_spread <= 1e-9
    return ok, {
        "max_abs_v": max_v,
        "max_residual": max_res,
        "max_triple_spread": max_spread,
    }


@_criterion(6, "defect recursion equals its definition for l <= 200")
def criterion_defect_duality() -> tuple[bool, dict]:
    worst = 0.0
    for rule in BATTERY:
        rec = defect.build_table(rule, 200)
        dfn = defect.definition_table(rule, 200)
        worst = max(worst, float(np.abs(rec.rows - dfn.rows).max()))
    return worst <= 1e-11, {"max_abs_diff": worst, "tolerance": 1e-11}


@_criterion(7, "outdegree: Poisson bound, rate regimes, centered-mean decay")
def criterion_outdegree() -> tuple[bool, dict]:
    details = {}
    ok = True
    grid = [2**e for e in range(4, 12)]
    for gamma, beta in ((0.3, 0.7), (0.5, 0.5), (0.7, 0.3)):
        rule = Affine(gamma, beta)
        means = chain.mean_f_path(rule, 2047)
        worst_margin = math.inf
        max_lambda_gap = 0.0
        for n in range(2, 2049):
            law = outdegree.build_outdegree(rule, n, mean_f_chain=float(means[n - 2]))
            exact, bound = outdegree.poisson_tv(law)
            worst_margin = min(worst_margin, bound - exact)
            max_lambda_gap = max(max_lambda_gap, abs(law.lambda_n - float(means[n - 2])))
        table = outdegree.rate_report(rule, grid, mean_f_chain=means)
        rows, prod_chain_gap, sup_norm = outdegree.lambda_recursion_check(gamma, beta, 2048)
        lam_bar_1 = abs(rows[0].product_form)
        entry = {
            "min_bound_margin": worst_margin,
            "max_lambda_gap": max_lambda_gap,
            "rate_quartile_ratio": table.quartile_ratio,
            "rate_sup_normalized": table.sup_normalized,
            "lambda_product_vs_chain": prod_chain_gap,
            "sup_centered_normalized": sup_norm,
        }
        details[_name(rule)] = entry
        ok = ok and worst_margin >= -1e-12 and max_lambda_gap <= 1e-10
        ok = ok and table.quartile_ratio <= 1.5
        ok = ok and prod_chain_gap <= 1e-10
        ok = ok and sup_norm <= 2.0 * lam_bar_1 + 1e-12
    return ok, details


@_criterion(8, "start-d0 vs start-0 coupling gap <= 1/n")
def criterion_coupling() -> tuple[bool, dict]:
    details = {}
    ok = True
    cases: list[tuple[AttachmentRule, int]] = []
    for d0 in (1, 2, 3):
        cases.append((Constant(0.5, d0=d0), d0))
        cases.append((Constant(0.9, d0=d0), d0))
        cases.append((Constant(1.0, d0=d0), d0))
    cases.append((Affine(0.5, 0.5, d0=1), 1))
    cases.append((SublinearPower(0.8, 0.5, 0.8, d0=1), 1))
    for rule, d0 in cases:
        worst = 0.0
        for n in [2**e for e in range(4, 13)]:
            gap = chain.d0_coupling_gap(rule, d0, n)
            worst = max(worst, gap * n)
        details[f"{_name(rule)},d0={d0}"] = {"sup_n_times_gap": worst}
        ok = ok and worst <= 1.0 + 1e-12
    return ok, details


def _histogram_vs_pmf(counts: np.ndarray, pmf: np.ndarray, trials: int) -> float:
    """Worst |observed - expected| in sigma units, tail bins lumped.

    Bins with expected count below 20 are merged into the tail so the
    4-sigma normal yardstick is meaningful.
    """
    width = max(counts.size, pmf.size)
    obs = np.zeros(width)
    probs = np.zeros(width)
    obs[: counts.size] = counts
    probs[: pmf.size] = pmf
    cut = width
    while cut > 2 and probs[cut - 1 :].sum() * trials < 20.0:
        cut -= 1
    os = np.concatenate([obs[: cut - 1], [obs[cut - 1 :].sum()]])
    ps = np.concatenate([probs[: cut - 1], [probs[cut - 1 :].sum()]])
    keep = (ps * trials >= 1e-9) & (ps < 1.0)
    sig = np.sqrt(ps[keep] * (1.0 - ps[keep]) * trials)
    return float((np.abs(os[keep] - ps[keep] * trials) / sig).max())


@_criterion(9, "seeded Monte Carlo matches the chain DP; spatial marginal exact")
def criterion_monte_carlo() -> tuple[bool, dict]:
    trials = 100_000
    details = {}
    ok = True

    ex1 = graphsim.RandomOutdegree(Affine(0.5, 0.5))
    hist = graphsim.empirical_uniform_indegree(ex1, 200, trials, _SEED)
    pmf = chain.chain_law(Affine(0.5, 0.5), 200, 0).pmf
    worst = _histogram_vs_pmf(hist.counts, pmf, trials)
    details["independent-edges"] = {"worst_sigma": worst}
    ok = ok and worst <= 4.0

    ex2 = graphsim.FixedOutdegree(0.0)
    hist2 = graphsim.empirical_uniform_indegree(ex2, 200, trials, _SEED + 1)
    pmf2 = chain.chain_law(ex2.rule, 200, 1).pmf
    worst2 = _histogram_vs_pmf(hist2.counts, pmf2, trials)
    details["single-edge"] = {"worst_sigma": worst2}
    ok = ok and worst2 <= 4.0

    spatial = graphsim.Spatial(m=2, a1=0.3, a2=0.4, p=0.8)
    degs, hits = graphsim.spatial_marginal_samples(spatial, 40, trials, _SEED + 2)
    worst3 = 0.0
    for d in np.unique(degs):
        sel = degs == d
        count = int(sel.sum())
        if count < 500:
            continue
        expected = spatial.p * (spatial.a1 * d + spatial.a2) / 39
        sigma = math.sqrt(expected * (1.0 - expected) / count)
        worst3 = max(worst3, abs(float(hits[sel].mean()) - expected) / sigma)
    details["spatial-marginal"] = {"worst_sigma": worst3}
    ok = ok and worst3 <= 3.0

    rerun = graphsim.empirical_uniform_indegree(ex1, 200, trials, _SEED)
    identical = bool((rerun.counts == hist.counts).all())
    details["deterministic"] = identical
    ok = ok and identical
    return ok, details


@_criterion(10, "return-time identity mu_j (1 + f(j)) E[tau_jj] = 1")
def criterion_hitting_times() -> tuple[bool, dict]:
    worst = 0.0
    for rule in BATTERY:
        law = limitlaw.compute_mu(rule, 1e-12, k_min=201)
        times = limitlaw.hitting_times(rule, 200)
        fv = np.array([float(rule(k)) for k in range(201)])
        resid = np.abs(law.masses[:201] * (1.0 + fv) * times.return_times - 1.0)
        worst = max(worst, float(resid.max()))
    return worst <= 1e-10, {"max_residual": worst, "tolerance": 1e-10}


CRITERIA = [
    criterion_oracle_equivalence,
    criterion_log_rate,
    criterion_power_rate,
    criterion_defect_properties,
    criterion_stein_suite,
    criterion_defect_duality,
    criterion_outdegree,
    criterion_coupling,
    criterion_monte_carlo,
    criterion_hitting_times,
]


def run_all(idents: Iterable[int] | None = None) -> list[CriterionResult]:
    wanted = None if idents is None else set(idents)
    results = []
    for fn in CRITERIA:
        if wanted is not None and fn.ident not in wanted:
            continue
        results.append(fn())
    return results
