"""Exact outdegree law of the newest vertex in the independent-edges model.

When each arrival connects independently to every old vertex (edge n -> i
with probability f(indeg(i))/(n-1) at the moment vertex n arrives), the
outdegree D_n is a sum of independent Bernoulli indicators with

    p_{i,n} = E[f(indeg_{n-1}(i))] / (n-1),

so its law is Poisson-binomial and its mean lambda_n equals E[f(W_{n-1})],
the chain's mean of f at time n-1 -- an identity this module checks
numerically rather than assumes.  d_TV(D_n, Po(lambda_n)) is computed exactly
and compared against the Bernoulli-sum Poisson bound
min(1, 1/lambda) * sum p_i^2; for rules below an affine majorant
f(k) <= gamma*k + 1 the bound decays at one of three rates depending on how
gamma compares to 1/2.

Affine rules admit an exact product formula for E[f(indeg_m(i))]; general
rules evolve every vertex's degree law simultaneously in one O(n^2 * width)
dynamic program (cheaper than n separate per-vertex programs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .attachment import Affine, AttachmentRule, classify
from .chain import mean_f_path, quartile_sup_ratio
from .errors import ParamOutOfRangeError, RegimeMismatchError
from .limitlaw import _values_slice

__all__ = [
    "OutdegreeLaw",
    "vertex_degree_law",
    "mean_f_triangle",
    "bernoulli_means",
    "build_outdegree",
    "poisson_pmf",
    "poisson_tv",
    "OutdegreeRateRow",
    "OutdegreeRateTable",
    "rate_report",
    "LambdaRow",
    "lambda_recursion_check",
]

_TRIM = 1e-21  # trailing pmf entries below this are dropped (total loss < 1e-16)
_CHAIN_MATCH_TOL = 1e-10


def _require_model(rule: AttachmentRule) -> None:
    if rule.d0 != 0:
        raise ParamOutOfRangeError("the independent-edges model starts with no self-edges")


def vertex_degree_law(rule: AttachmentRule, i: int, m: int) -> np.ndarray:
    """pmf of vertex i's indegree at time m (i enters at time i with degree 0).

    Pure-birth dynamic program over arrival times t = i..m-1: a vertex of
    degree d gains an edge with probability f(d)/t.
    """
    _require_model(rule)
    if not 1 <= i <= m:
        raise ParamOutOfRangeError("need 1 <= i <= m")
    width = m - i + 1
    fv = _values_slice(rule, 0, width)
    pmf = np.zeros(width)
    pmf[0] = 1.0
    size = 1
    for t in range(i, m):
        gain = fv[:size] / t
        grown = pmf[:size] * gain
        pmf[:size] *= 1.0 - gain
        pmf[1 : size + 1] += grown
        size = min(size + 1, width)
    return pmf


def mean_f_triangle(rule: AttachmentRule, m_max: int, *, width: int = 64) -> np.ndarray:
    """E[f(indeg_m(i))] for all 1 <= i <= m <= m_max, one simultaneous DP.

    Returns a (m_max+1, m_max+1) array T with T[i, m] filled for i <= m; all
    vertices' degree laws advance together, so the whole triangle costs
    O(m_max^2 * width).  The width buffer grows on demand so that the
    truncated mass stays below 1e-14 per vertex.
    """
    _require_model(rule)
    out = np.full((m_max + 1, m_max + 1), np.nan)
    laws = np.zeros((m_max + 1, width))
    fv = _values_slice(rule, 0, width)
    f0 = float(rule(0))
    out[1, 1] = f0
    laws[1, 0] = 1.0
    for t in range(1, m_max):
        active = laws[1 : t + 1, :]
        if active[:, -1].max() > 1e-16:
            width *= 2
            laws = np.pad(laws, ((0, 0), (0, laws.shape[1])))
            fv = _values_slice(rule, 0, width)
            active = laws[1 : t + 1, :]
        gain = fv / t
        gain[-1] = 0.0  # cap cell absorbs; kept below 1e-16 by the growth rule
        grown = active * gain[np.newaxis, :]
        active *= 1.0 - gain[np.newaxis, :]
        active[:, 1:] += grown[:, :-1]
        laws[t + 1, 0] = 1.0
        means = laws[1 : t + 2, :] @ fv
        out[1 : t + 2, t + 1] = means
    return out


def _affine_mean_products(rule: Affine, m_max: int) -> np.ndarray:
    """Cumulative products C[j] = prod_{t=1}^{j} (1 + gamma/t), C[0] = 1.

    For affine f the per-vertex mean of f obeys the exact recursion
    E[f(deg_{m+1})] = E[f(deg_m)] * (1 + gamma/m), so
    E[f(indeg_m(i))] = beta * C[m-1] / C[i-1].
    """
    c = np.empty(m_max + 1)
    c[0] = 1.0
    ts = np.arange(1, m_max + 1, dtype=float)
    np.cumprod(1.0 + rule.gamma / ts, out=c[1:])
    return c


def bernoulli_means(rule: AttachmentRule, n: int, *, width: int = 64) -> np.ndarray:
    """p_{i,n} = E[f(indeg_{n-1}(i))]/(n-1) for i = 1..n-1."""
    _require_model(rule)
    if n < 2:
        raise ParamOutOfRangeError("the newest vertex's outdegree needs n >= 2")
    if isinstance(rule, Affine):
        c = _affine_mean_products(rule, n - 2)
        means = rule.beta * c[n - 2] / c[: n - 1]
        return means / (n - 1)
    tri = mean_f_triangle(rule, n - 1, width=width)
    return tri[1:n, n - 1] / (n - 1)


@dataclass(frozen=True)
class OutdegreeLaw:
    """Success probabilities, their sum, and the Poisson-binomial pmf of D_n."""

    n: int
    p: np.ndarray  # p[i-1] = p_{i,n}
    lambda_n: float
    pmf: np.ndarray


def poisson_binomial_pmf(p: np.ndarray) -> np.ndarray:
    """Sequential O(n * width) convolution of Bernoulli(p_i) masses."""
    buf = np.ones(1)
    for pi in p:
        nxt = np.empty(buf.size + 1)
        nxt[: buf.size] = buf * (1.0 - pi)
        nxt[buf.size] = 0.0
        nxt[1:] += buf * pi
        last = nxt.size
        while last > 1 and nxt[last - 1] < _TRIM:
            last -= 1
        buf = nxt[:last]
    return buf


def build_outdegree(
    rule: AttachmentRule,
    n: int,
    *,
    mean_f_chain: float | None = None,
    check_chain: bool = True,
) -> OutdegreeLaw:
    """Exact law of the outdegree of vertex n.

    lambda_n = sum_i p_{i,n} is cross-checked against the chain's
    E[f(X_{n-1})] to 1e-10 (pass `mean_f_chain` to reuse a precomputed path,
    or `check_chain=False` to skip).
    """
    p = bernoulli_means(rule, n)
    lam = math.fsum(p)
    if check_chain:
        if mean_f_chain is None:
            mean_f_chain = float(mean_f_path(rule, n - 1)[n - 2])
        if abs(lam - mean_f_chain) > _CHAIN_MATCH_TOL:
            raise AssertionError(
                f"lambda_n={lam!r} disagrees with chain mean {mean_f_chain!r} at n={n}"
            )
    pmf = poisson_binomial_pmf(p)
    pmf.flags.writeable = False
    p.flags.writeable = False
    return OutdegreeLaw(n=n, p=p, lambda_n=lam, pmf=pmf)


def poisson_pmf(lam: float, *, tail_tol: float = 1e-15) -> np.ndarray:
    """Poisson masses out to the smallest m with tail below tail_tol*max(1,lam)."""
    if lam <= 0.0:
        raise ParamOutOfRangeError("Poisson rate must be positive")
    cut = tail_tol * max(1.0, lam)
    terms = [math.exp(-lam)]
    k = 0
    remaining = 1.0 - terms[0]
    while remaining > cut or k < lam:
        k += 1
        terms.append(terms[-1] * lam / k)
        remaining -= terms[-1]
    return np.array(terms)


def poisson_tv(law: OutdegreeLaw) -> tuple[float, float]:
    """(exact d_TV to Po(lambda_n), Bernoulli-sum Poisson bound).

    The bound is min(1, 1/lambda) * sum p_i^2 and must dominate the exact
    distance; that domination is asserted, not assumed.
    """
    lam = law.lambda_n
    pois = poisson_pmf(lam)
    width = max(law.pmf.size, pois.size)
    a = np.zeros(width)
    b = np.zeros(width)
    a[: law.pmf.size] = law.pmf
    b[: pois.size] = pois
    # both tails (dropped pmf trim, dropped Poisson tail) enter the L1 sum
    exact = 0.5 * (math.fsum(np.abs(a - b)) + (1.0 - math.fsum(pois)))
    bound = min(1.0, 1.0 / lam) * math.fsum(law.p * law.p)
    if exact > bound + 1e-12:
        raise AssertionError(
            f"exact distance {exact!r} above the Poisson bound {bound!r} at n={law.n}"
        )
    return exact, bound


@dataclass(frozen=True)
class OutdegreeRateRow:
    n: int
    lambda_n: float
    exact_tv: float
    bh_bound: float
    normalizer: float
    normalized: float


@dataclass(frozen=True)
class OutdegreeRateTable:
    gamma: float
    regime: str
    rows: tuple[OutdegreeRateRow, ...]
    sup_normalized: float
    quartile_ratio: float


def _regime_normalizer(gamma: float, n: int) -> tuple[str, float]:
    if gamma < 0.5:
        return "1/(n+1)", float(n + 1)
    if gamma == 0.5:
        return "log(n)/n", n / math.log(n)
    return "n^{-2(1-gamma)}", float(n) ** (2.0 * (1.0 - gamma))


def rate_report(
    rule: AttachmentRule,
    n_grid: Sequence[int],
    *,
    mean_f_chain: np.ndarray | None = None,
) -> OutdegreeRateTable:
    """Exact distance, bound, and regime-normalized bound over a grid of n."""
    grid = sorted(set(int(n) for n in n_grid))
    if not grid or grid[0] < 2:
        raise ParamOutOfRangeError("rate grid needs integers >= 2")
    cls = classify(rule, grid[-1])
    gamma = cls.majorant_slope
    if gamma is None:
        raise RegimeMismatchError(
            "Poisson rate regimes need f(k) <= gamma*k + 1 with gamma < 1"
        )
    if mean_f_chain is None:
        mean_f_chain = mean_f_path(rule, grid[-1] - 1)
    regime_name, _ = _regime_normalizer(gamma, grid[0])
    rows = []
    for n in grid:
        law = build_outdegree(rule, n, mean_f_chain=float(mean_f_chain[n - 2]))
        exact, bound = poisson_tv(law)
        _, norm = _regime_normalizer(gamma, n)
        rows.append(
            OutdegreeRateRow(
                n=n,
                lambda_n=law.lambda_n,
                exact_tv=exact,
                bh_bound=bound,
                normalizer=norm,
                normalized=bound * norm,
            )
        )
    _, _, ratio = quartile_sup_ratio([r.normalized for r in rows])
    return OutdegreeRateTable(
        gamma=gamma,
        regime=regime_name,
        rows=tuple(rows),
        sup_normalized=max(r.normalized for r in rows),
        quartile_ratio=ratio,
    )


@dataclass(frozen=True)
class LambdaRow:
    n: int
    product_form: float
    chain_form: float
    normalized: float  # |lambda_bar_n| * n^(1-gamma)


def lambda_recursion_check(
    gamma: float, beta: float, n_max: int
) -> tuple[list[LambdaRow], float, float]:
    """Centered means lambda_bar_n = E[f(X_n)] - beta/(1-gamma), two ways.

    The chain mean obeys the exact one-step recursion
    lambda_bar_{n+1} = (1 - (1-gamma)/(n+1)) * lambda_bar_n with
    lambda_bar_1 = beta - lambda, hence the closed product form
    lambda_bar_n = (beta - lambda) * prod_{i=2}^{n} (1 - (1-gamma)/i).
    Returns (rows, max |product - chain|, sup normalized); the normalized
    column stays below 2 |lambda_bar_1| because the product telescopes
    against ((n+1)/2)^(gamma-1).
    """
    if not 0.0 < gamma < 1.0:
        raise ParamOutOfRangeError("need gamma in (0, 1)")
    if not 0.0 < beta <= 1.0:
        raise ParamOutOfRangeError("need beta in (0, 1]")
    lam = beta / (1.0 - gamma)
    rule = Affine(gamma=gamma, beta=beta)
    chain_means = mean_f_path(rule, n_max)
    rows = []
    prod = beta - lam
    max_diff = 0.0
    sup_norm = 0.0
    for n in range(1, n_max + 1):
        if n >= 2:
            prod *= 1.0 - (1.0 - gamma) / n
        chain_bar = float(chain_means[n - 1]) - lam
        norm = abs(prod) * float(n) ** (1.0 - gamma)
        rows.append(LambdaRow(n=n, product_form=prod, chain_form=chain_bar, normalized=norm))
        max_diff = max(max_diff, abs(prod - chain_bar))
        sup_norm = max(sup_norm, norm)
    return rows, max_diff, sup_norm
