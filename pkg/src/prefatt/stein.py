"""Closed-form solutions of the balance equation for the limit law.

The limit law mu is stationary for the jump process with generator

    (A g)(k) = f(k) (g(k+1) - g(k)) + g(0) - g(k),

and for any event A the equation (A g_A)(k) = 1_A(k) - mu(A) has an explicit
solution whose increments are known in closed form:

    dg_j(k) = -(mu_j / mu_k) / (f(k) (1 + f(k)))   for j >= k+1,
            =  1 / (1 + f(j))                      for j = k,
            =  0                                   for j <= k-1,

with g_A built by summing dg_j over j in A.  The weighted increment
v_A(k) = f(k) dg_A(k) collapses to

    v_A(k) = -mu(A intersect [k+1, inf)) / mu([k, inf))
             + (f(k) / (1 + f(k))) 1_A(k),

which is uniformly bounded by 1.  `stein_residual` verifies the equation
numerically, and `triple_sum_check` evaluates the same expectation
E[(A g_A)(X_{n+1})] three independent ways: directly against the chain law,
through the double sum over the defect table, and as
P(X_{n+1} in A) - mu(A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .attachment import AttachmentRule
from .chain import ChainLaw, chain_law
from .defect import DefectTable, build_table
from .errors import ParamOutOfRangeError, TailUnderflowError
from .limitlaw import LimitLaw, _values_slice

__all__ = [
    "IndexSet",
    "SteinSolution",
    "TripleSum",
    "triple_sum_check",
    "random_index_sets",
]

_TAIL_FLOOR = 1e-280


@dataclass(frozen=True)
class IndexSet:
    """A finite set of nonnegative integers, or the complement of one.

    Finite sets, their complements, and intervals (bounded or one-sided)
    cover every event the total-variation supremum can need: the supremum is
    attained on {k : pmf_k > mu_k}, which is finite here.
    """

    members: tuple[int, ...]
    complement: bool = False

    def __post_init__(self):
        ms = tuple(sorted(set(int(m) for m in self.members)))
        if ms and ms[0] < 0:
            raise ParamOutOfRangeError("index sets live on the nonnegative integers")
        object.__setattr__(self, "members", ms)

    @staticmethod
    def finite(it: Iterable[int]) -> "IndexSet":
        return IndexSet(tuple(it), complement=False)

    @staticmethod
    def complement_of(it: Iterable[int]) -> "IndexSet":
        return IndexSet(tuple(it), complement=True)

    @staticmethod
    def interval(a: int, b: int | None = None) -> "IndexSet":
        """[a, b] when b is given, else [a, inf)."""
        if b is None:
            return IndexSet(tuple(range(a)), complement=True)
        return IndexSet(tuple(range(a, b + 1)), complement=False)

    @staticmethod
    def empty() -> "IndexSet":
        return IndexSet((), complement=False)

    @staticmethod
    def everything() -> "IndexSet":
        return IndexSet((), complement=True)

    def contains(self, k: int) -> bool:
        return (k in self.members) != self.complement

    def indicator(self, count: int) -> np.ndarray:
        out = np.zeros(count, dtype=bool)
        inside = [m for m in self.members if m < count]
        out[inside] = True
        if self.complement:
            out = ~out
        return out

    def max_member(self) -> int:
        return self.members[-1] if self.members else -1


class SteinSolution:
    """Closed-form increments and residuals for one rule and its limit law."""

    def __init__(self, rule: AttachmentRule, law: LimitLaw):
        self.rule = rule
        self.law = law
        self._fv = _values_slice(rule, 0, law.truncation_K + 1)

    def _check_range(self, k: int) -> None:
        if k < 0 or k > self.law.truncation_K:
            raise TailUnderflowError(
                f"k={k} beyond the computed range (K={self.law.truncation_K}); "
                "recompute mu with a smaller epsilon or larger k_min"
            )
        if self.law.tail_at[k] < _TAIL_FLOOR:
            raise TailUnderflowError(f"tail mass at k={k} below the 64-bit floor")

    def delta_g(self, j: int, k: int) -> float:
        """Increment g_j(k+1) - g_j(k) of the single-point solution."""
        self._check_range(k)
        if j <= k - 1:
            return 0.0
        if j == k:
            return 1.0 / (1.0 + float(self._fv[j]))
        self._check_range(j)
        fk = float(self._fv[k])
        ratio = float(self.law.masses[j]) / float(self.law.masses[k])
        return -ratio / (fk * (1.0 + fk))

    def mu_of(self, a: IndexSet) -> float:
        """mu(A), exact through the complement for co-finite sets."""
        if a.max_member() > self.law.truncation_K:
            raise TailUnderflowError("set description reaches beyond the computed range")
        inside = math.fsum(self.law.masses[list(a.members)]) if a.members else 0.0
        return 1.0 - inside if a.complement else inside

    def _mu_from(self, a: IndexSet, lo: int) -> float:
        """mu(A intersect [lo, inf))."""
        part = math.fsum(self.law.masses[m] for m in a.members if m >= lo)
        if a.complement:
            return float(self.law.tail_at[lo]) - part
        return part

    def v(self, a: IndexSet, k: int) -> float:
        """v_A(k) = f(k) dg_A(k); bounded by 1 in absolute value."""
        self._check_range(k)
        if a.max_member() > self.law.truncation_K:
            raise TailUnderflowError("set description reaches beyond the computed range")
        fk = float(self._fv[k])
        out = -self._mu_from(a, k + 1) / float(self.law.tail_at[k])
        if a.contains(k):
            out += fk / (1.0 + fk)
        return out

    def v_array(self, a: IndexSet, k_max: int) -> np.ndarray:
        """v_A(k) for k = 0..k_max."""
        self._check_range(k_max)
        if a.max_member() > self.law.truncation_K:
            raise TailUnderflowError("set description reaches beyond the computed range")
        members = np.array(a.members, dtype=int)
        masses = self.law.masses
        # suffix[i] = sum of member masses with member >= members[i]
        mem_masses = masses[members] if members.size else np.empty(0)
        suffix = np.concatenate([np.cumsum(mem_masses[::-1])[::-1], [0.0]])
        idx = np.searchsorted(members, np.arange(1, k_max + 2))
        part = suffix[idx]
        if a.complement:
            inter = self.law.tail_at[1 : k_max + 2] - part
        else:
            inter = part
        fv = self._fv[: k_max + 1]
        out = -inter / self.law.tail_at[: k_max + 1]
        ind = a.indicator(k_max + 1)
        out[ind] += (fv / (1.0 + fv))[ind]
        return out

    def residual(self, a: IndexSet, k: int) -> float:
        """(A g_A)(k) - (1_A(k) - mu(A)); identically 0 in exact arithmetic."""
        return float(self.residual_array(a, k)[k])

    def residual_array(self, a: IndexSet, k_max: int) -> np.ndarray:
        v = self.v_array(a, k_max)
        fv = self._fv[: k_max + 1]
        # g_A(k) - g_A(0) accumulates dg_A(i) = v_A(i)/f(i)
        prefix = np.concatenate([[0.0], np.cumsum(v[:-1] / fv[:-1])])
        ind = a.indicator(k_max + 1).astype(float)
        return v - prefix - ind + self.mu_of(a)


def law_probability(law: ChainLaw, a: IndexSet) -> float:
    """P(X_n in A) for a chain snapshot."""
    inside = math.fsum(law.pmf[m] for m in a.members if m < law.pmf.size)
    return 1.0 - inside if a.complement else inside


class TripleSum(NamedTuple):
    """Three independent evaluations of E[(A g_A)(X_{n+1})]."""

    direct: float
    double_sum: float
    stein: float

    @property
    def max_spread(self) -> float:
        vals = (self.direct, self.double_sum, self.stein)
        return max(vals) - min(vals)


def triple_sum_check(
    rule: AttachmentRule,
    a: IndexSet,
    n: int,
    *,
    solution: SteinSolution | None = None,
    table: DefectTable | None = None,
    law_next: ChainLaw | None = None,
) -> TripleSum:
    """Evaluate E[(A g_A)(X_{n+1})] three ways for a start-0 chain.

    direct      pmf of X_{n+1} against the closed-form (A g_A)(k),
    double_sum  (1/(n+1)) (sum_{l<=n} sum_{k<l} dv_A(k) h(k,l) + v_A(0)),
    stein       P(X_{n+1} in A) - mu(A).
    """
    if rule.d0 != 0:
        raise ParamOutOfRangeError("the double-sum identity needs a start-0 chain")
    if solution is None:
        from .limitlaw import compute_mu

        solution = SteinSolution(rule, compute_mu(rule, 1e-12, k_min=n + 2))
    if table is None:
        table = build_table(rule, n)
    if table.big_l < n:
        raise ParamOutOfRangeError("defect table too small for the requested n")
    if law_next is None:
        law_next = chain_law(rule, n + 1, 0)

    v = solution.v_array(a, n + 1)
    fv = solution._fv[: n + 2]
    prefix = np.concatenate([[0.0], np.cumsum(v[:-1] / fv[:-1])])
    ag = v - prefix  # (A g_A)(k) = v_A(k) + g_A(0) - g_A(k)
    direct = math.fsum(law_next.pmf * ag[: law_next.pmf.size])

    dv = np.diff(v)  # dv[k] = v(k+1) - v(k), k = 0..n
    pieces = [v[0]]
    for ell in range(1, n + 1):
        row = table.row(ell)
        pieces.append(float(dv[:ell] @ row))
    total = math.fsum(pieces) / (n + 1)

    stein = law_probability(law_next, a) - solution.mu_of(a)
    return TripleSum(direct=direct, double_sum=total, stein=stein)


def random_index_sets(count: int, k_max: int, seed: int) -> list[IndexSet]:
    """A reproducible mix of finite sets, intervals, and complements."""
    rng = np.random.Generator(np.random.Philox(seed))
    out: list[IndexSet] = []
    for i in range(count):
        kind = i % 4
        if kind == 0:
            size = int(rng.integers(1, 13))
            out.append(IndexSet.finite(rng.integers(0, k_max + 1, size=size)))
        elif kind == 1:
            a, b = sorted(rng.integers(0, k_max + 1, size=2))
            out.append(IndexSet.interval(int(a), int(b)))
        elif kind == 2:
            size = int(rng.integers(1, 13))
            out.append(IndexSet.complement_of(rng.integers(0, k_max + 1, size=size)))
        else:
            out.append(IndexSet.interval(int(rng.integers(0, k_max + 1))))
    return out
