"""Exact computation of the limiting indegree distribution.

For an admissible rule f the indegree of a uniformly chosen vertex converges
to the law

    mu_k = (1 / (1 + f(k))) * prod_{i<k} f(i) / (1 + f(i)),

which is also the stationary law of the continuous-time jump process that
climbs from k to k+1 at rate f(k) and resets to 0 at rate 1.  Tails obey
mu([k, inf)) = prod_{i<k} f(i)/(1+f(i)) = f(k-1) * mu_{k-1}, so everything is
computed through the tail product: each factor lies in (0, 1), which makes
the recursion monotone and cancellation-free.

Affine rules give power-law tails (exponent 1 + 1/gamma), sublinear-power
rules give stretched-exponential tails; `tail_asymptote_report` tabulates the
approach to either asymptote.  `hitting_times` exposes the jump process's
expected climb and return times, which tie back to mu through
mu_j * (1 + f(j)) * E[return to j] = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .attachment import (
    Affine,
    AffineTail,
    AttachmentRule,
    Constant,
    RepeatLast,
    SublinearPower,
    TableRule,
    require_valid,
)
from .errors import (
    ParamOutOfRangeError,
    ToleranceNotMetError,
    TruncationFailureError,
)

__all__ = [
    "LimitLaw",
    "HittingTimes",
    "MeanEstimate",
    "compute_mu",
    "mean_f_of_w",
    "hitting_times",
    "tail_asymptote_report",
    "TailAsymptoteReport",
]

HARD_CAP = 10_000_000
_CHUNK = 1 << 16
_MIN_EPSILON = 1e-280  # keep tails well clear of the subnormal range
_SLOW_TAIL_EPSILON = 1e-6


@dataclass(frozen=True)
class LimitLaw:
    """Truncated exact representation of the limiting law.

    masses[k] = mu_k for k = 0..K and tail_at[k] = mu([k, inf)) for
    k = 0..K+1, where K = truncation_K and truncation_mass = tail_at[K+1].
    """

    masses: np.ndarray
    tail_at: np.ndarray
    truncation_K: int
    truncation_mass: float


def _unit_slope_tail(rule: AttachmentRule) -> bool:
    if isinstance(rule, Affine):
        return rule.gamma == 1.0
    if isinstance(rule, TableRule) and isinstance(rule.tail, AffineTail):
        return rule.tail.gamma == 1.0
    return False


def compute_mu(
    rule: AttachmentRule,
    epsilon: float = 1e-12,
    *,
    hard_cap: int = HARD_CAP,
    k_min: int = 0,
) -> LimitLaw:
    """Compute mu out to the least K with mu([K+1, inf)) < epsilon.

    `k_min` forces the truncation point out at least that far even if the
    tail drops below epsilon earlier.  Rules whose affine part has slope 1
    have tails decaying only like 1/k, so epsilon is clamped at 1e-6 there
    (with a warning) to keep K within the hard cap.
    """
    if not 0.0 < epsilon < 1.0:
        raise ParamOutOfRangeError("epsilon must lie in (0, 1)")
    if epsilon < _MIN_EPSILON:
        raise ParamOutOfRangeError(f"epsilon below reliable range ({_MIN_EPSILON})")
    if k_min > hard_cap:
        raise ParamOutOfRangeError("k_min exceeds the hard cap")
    if _unit_slope_tail(rule) and epsilon < _SLOW_TAIL_EPSILON:
        warnings.warn(
            "rule has a slope-1 affine tail (mass decay ~ 1/k); "
            f"clamping epsilon to {_SLOW_TAIL_EPSILON}",
            stacklevel=2,
        )
        epsilon = _SLOW_TAIL_EPSILON

    # Pass 1: stream the tail product until it drops below epsilon.
    carry = 1.0
    start = 0
    cut = None  # first index j with tail_at[j] < epsilon
    while start <= hard_cap:
        count = min(_CHUNK, hard_cap - start + 1)
        fv = _values_slice(rule, start, start + count)
        ratios = fv / (1.0 + fv)
        tail = carry * np.cumprod(ratios)
        below = tail < epsilon
        if below.any():
            j = int(np.argmax(below))
            cut = start + j + 1  # tail_at index (tail[j] is tail_at[start+j+1])
            break
        carry = float(tail[-1])
        start += count
    if cut is None:
        raise TruncationFailureError(
            f"tail still >= {epsilon!r} at the hard cap K={hard_cap}"
        )

    big_k = max(cut - 1, k_min)
    if big_k > hard_cap:
        raise TruncationFailureError("k_min pushed the truncation past the hard cap")

    # Pass 2: materialize masses and tails out to K.
    fv = _values_slice(rule, 0, big_k + 1)
    if (fv <= 0.0).any() or (fv > np.maximum(np.arange(big_k + 1) + 1.0 - rule.d0, 1.0)).any():
        require_valid(rule, big_k + 1)  # pinpoints the first violation
    tail_at = np.empty(big_k + 2)
    tail_at[0] = 1.0
    np.cumprod(fv / (1.0 + fv), out=tail_at[1:])
    masses = tail_at[: big_k + 1] / (1.0 + fv)
    trunc = float(tail_at[big_k + 1])
    if trunc <= 0.0:
        raise TruncationFailureError("tail underflowed to zero before the target mass")
    masses.flags.writeable = False
    tail_at.flags.writeable = False
    return LimitLaw(
        masses=masses,
        tail_at=tail_at,
        truncation_K=big_k,
        truncation_mass=trunc,
    )


def _values_slice(rule: AttachmentRule, start: int, stop: int) -> np.ndarray:
    if start == 0:
        return rule.values(stop)
    # Shift-and-evaluate for the streaming pass; rules are cheap to evaluate.
    ks = np.arange(start, stop, dtype=float)
    if isinstance(rule, Affine):
        return rule.gamma * ks + rule.beta
    if isinstance(rule, Constant):
        return np.full(ks.size, rule.c)
    if isinstance(rule, SublinearPower):
        return rule.gamma * ks**rule.alpha
    return np.array([rule(int(k)) for k in ks], dtype=float)


def _affine_majorant(rule: AttachmentRule, j: int) -> tuple[float, float] | None:
    """(slope, intercept) with f(i) <= slope*i + intercept for all i >= j.

    The slope is < 1, so the remainder formula below converges.  Exact for
    constant and affine rules; a certified over-estimate otherwise.  None when
    no sub-unit-slope majorant exists (affine slope >= 1).
    """
    if isinstance(rule, Constant):
        return 0.0, rule.c
    if isinstance(rule, Affine):
        return (rule.gamma, rule.beta) if rule.gamma < 1.0 else None
    if isinstance(rule, SublinearPower):
        g, a = rule.gamma, rule.alpha
        slope = 0.5
        # f(k) - slope*k is decreasing past xstar, so its sup over [j, inf)
        # is attained at an integer near max(j, xstar).
        xstar = (a * g / slope) ** (1.0 / (1.0 - a))
        cands = {j, max(j, math.floor(xstar)), max(j, math.ceil(xstar))}
        intercept = max(float(rule(int(x))) - slope * x for x in cands)
        if j == 0:
            intercept = max(intercept, rule.f0)
        return slope, max(intercept, 0.0)
    if isinstance(rule, TableRule):
        n = len(rule.values_head)
        if isinstance(rule.tail, AffineTail):
            if rule.tail.gamma >= 1.0:
                return None
            slope, intercept = rule.tail.gamma, rule.tail.beta
        else:
            slope, intercept = 0.0, rule.values_head[-1]
        for k in range(j, n):
            intercept = max(intercept, rule.values_head[k] - slope * k)
        return slope, intercept
    raise TypeError(f"unknown rule type {type(rule)!r}")


def _tail_sum_bound(rule: AttachmentRule, tail_j: float, j: int) -> float:
    """Upper bound for sum_{m >= j} mu([m, inf)).

    If f(i) <= s*i + c for i >= j with s < 1, the tail sums telescope to
    tail_j * (s*(j-1) + c + 1) / (1 - s); equality holds when f is exactly
    affine from j on.
    """
    maj = _affine_majorant(rule, j)
    if maj is None:
        return math.inf
    s, c = maj
    return tail_j * (s * (j - 1) + c + 1.0) / (1.0 - s)


@dataclass(frozen=True)
class MeanEstimate:
    """A truncated sum plus a certified bound on the dropped tail."""

    value: float
    error_bound: float


def mean_f_of_w(law: LimitLaw, rule: AttachmentRule, tol: float = 1e-5) -> MeanEstimate:
    """E[f(W)] for W ~ mu, as a truncated sum with a certified tail bound.

    Uses f(k)*mu_k = mu([k+1, inf)): the dropped part is a sum of tails
    beyond the truncation point, bounded through an affine majorant of f.
    Raises ToleranceNotMetError when the bound exceeds `tol` (always the case
    for affine rules with slope 1, whose limit law has no finite mean).
    """
    big_k = law.truncation_K
    fv = _values_slice(rule, 0, big_k + 1)
    value = math.fsum(fv * law.masses)
    j = big_k + 2
    f_next = float(rule(big_k + 1))
    tail_j = law.truncation_mass * f_next / (1.0 + f_next)
    bound = _tail_sum_bound(rule, tail_j, j)
    if not bound <= tol:
        raise ToleranceNotMetError(
            f"tail bound {bound!r} exceeds tolerance {tol!r}; "
            "recompute mu with a smaller epsilon"
        )
    return MeanEstimate(value=value, error_bound=bound)


@dataclass(frozen=True)
class HittingTimes:
    """Expected climb times E[tau_{k,k+1}] and return times E[tau_{j,j}].

    The jump process leaves k at rate 1 + f(k); climbs satisfy
    E[tau_{k,k+1}] = (1 + sum_{i<k} E[tau_{i,i+1}]) / f(k) and returns are
    E[tau_{j,j}] = 1 + E[tau_{0,j}] because falling back to 0 takes mean time
    1 from every state.
    """

    up_steps: np.ndarray
    return_times: np.ndarray


def hitting_times(rule: AttachmentRule, big_k: int) -> HittingTimes:
    if big_k < 0:
        raise ParamOutOfRangeError("hitting-time horizon must be >= 0")
    fv = _values_slice(rule, 0, big_k + 1)
    up = np.empty(big_k + 1)
    ret = np.empty(big_k + 1)
    acc = 0.0  # E[tau_{0,k}] so far
    for k in range(big_k + 1):
        ret[k] = 1.0 + acc
        up[k] = (1.0 + acc) / fv[k]
        acc += up[k]
    up.flags.writeable = False
    ret.flags.writeable = False
    return HittingTimes(up_steps=up, return_times=ret)


@dataclass(frozen=True)
class TailAsymptoteReport:
    """Rows (k, mu_k, predicted, ratio) tracking the tail's asymptote.

    For affine rules `predicted` is the full power-law asymptote
    A * k**(-(1+1/gamma)) and `ratio` = mu_k / predicted -> 1.  For
    sublinear-power rules `predicted` is the stretched-exponential decay
    constant k**(1-alpha)/(gamma*(1-alpha)) and `ratio` compares -log(mu_k)
    against it, again -> 1.
    """

    kind: str
    rows: tuple[tuple[int, float, float, float], ...]
    limit_constant: float


def tail_asymptote_report(
    rule: AttachmentRule,
    law: LimitLaw | None = None,
    *,
    points: int = 12,
) -> TailAsymptoteReport:
    if isinstance(rule, Affine):
        if not 0.0 < rule.gamma:
            raise ParamOutOfRangeError("affine asymptote needs gamma > 0")
        if law is None:
            law = compute_mu(rule, 1e-12)
        g, b = rule.gamma, rule.beta
        const = math.exp(math.lgamma((b + 1.0) / g) - math.lgamma(b / g)) / g
        exponent = 1.0 + 1.0 / g
        ks = np.unique(np.geomspace(16, law.truncation_K, points).astype(int))
        rows = []
        for k in ks:
            predicted = const * float(k) ** (-exponent)
            rows.append((int(k), float(law.masses[k]), predicted, float(law.masses[k]) / predicted))
        return TailAsymptoteReport(kind="power-law", rows=tuple(rows), limit_constant=const)
    if isinstance(rule, SublinearPower):
        if law is None:
            law = compute_mu(rule, 1e-250)
        rate = 1.0 / (rule.gamma * (1.0 - rule.alpha))
        ks = np.unique(np.geomspace(16, law.truncation_K, points).astype(int))
        rows = []
        for k in ks:
            mass = float(law.masses[k])
            predicted = rate * float(k) ** (1.0 - rule.alpha)
            rows.append((int(k), mass, predicted, -math.log(mass) / predicted))
        return TailAsymptoteReport(kind="stretched-exponential", rows=tuple(rows), limit_constant=rate)
    raise ParamOutOfRangeError(
        "tail asymptotes are defined for affine and sublinear-power rules only"
    )
