"""Stationarity-defect table of the uniform-vertex indegree chain.

At stationarity the limit law balances f(k)*mu_k = mu([k+1, inf)).  The
defect

    h(k, l) = f(k) P(X_l = k) - P(X_l >= k+1)

measures how far the time-l chain law is from that balance; its decay in l
is what drives the total-variation convergence rates.  The table satisfies a
closed two-term recursion in l,

    h(k, l+1) = ((l - f(k))/(l+1)) h(k, l) + (f(k)/(l+1)) h(k-1, l),

with h(0, 1) = f(0) and h(-1, l) = 0, which this module evaluates in O(L^2)
and checks against five structural properties: nonnegativity, monotone rows
in the unit band, unimodal rows with slowly moving peaks once f crosses below
the diagonal, a C/l sup bound, and a gamma-function envelope for rules inside
the band k <= f(k) <= k + gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attachment import AttachmentRule, RuleClassification
from .chain import evolve
from .errors import NotUnimodalError, ParamOutOfRangeError, PropertyViolationError
from .limitlaw import _values_slice

__all__ = [
    "DefectTable",
    "PropertyCheck",
    "PropertyReport",
    "build_table",
    "definition_table",
    "turning_points",
    "verify_properties",
    "sup_bound_constant",
]

SIGN_TOL = 1e-12


@dataclass(frozen=True)
class DefectTable:
    """Rows h(., l) for l = 1..L; row l occupies columns k = 0..l-1."""

    rule: AttachmentRule
    rows: np.ndarray  # shape (L, L), zero-padded above the diagonal
    big_l: int

    def row(self, ell: int) -> np.ndarray:
        return self.rows[ell - 1, :ell]


def build_table(rule: AttachmentRule, big_l: int) -> DefectTable:
    """Evaluate the recursion for l = 1..big_l.

    Needs f(k) <= k + 1 on [0, big_l] (the start-0 chain's admissibility),
    which every rule valid at d0 = 0 satisfies.
    """
    if big_l < 1:
        raise ParamOutOfRangeError("table needs at least one row")
    fv = _values_slice(rule, 0, big_l + 1)
    if (fv <= 0.0).any() or (fv > np.arange(big_l + 1) + 1.0).any():
        k = int(np.argmax((fv <= 0.0) | (fv > np.arange(big_l + 1) + 1.0)))
        raise ParamOutOfRangeError(f"f({k})={fv[k]!r} outside (0, {k + 1}]")
    rows = np.zeros((big_l, big_l))
    rows[0, 0] = fv[0]
    for ell in range(1, big_l):
        prev = rows[ell - 1, :ell]
        f = fv[: ell + 1]
        shifted = np.empty(ell + 1)
        shifted[0] = 0.0
        shifted[1:] = prev
        padded = np.empty(ell + 1)
        padded[:ell] = prev
        padded[ell] = 0.0
        rows[ell, : ell + 1] = ((ell - f) * padded + f * shifted) / (ell + 1)
    rows.flags.writeable = False
    return DefectTable(rule=rule, rows=rows, big_l=big_l)


def definition_table(rule: AttachmentRule, big_l: int) -> DefectTable:
    """The same table straight from the definition, via the chain DP.

    Independent of `build_table`'s recursion; the two must agree to float
    accuracy, which is the definition/recursion duality check.
    """
    fv = _values_slice(rule, 0, big_l + 1)
    rows = np.zeros((big_l, big_l))
    for law in evolve(rule, big_l, 0):
        ell = law.n
        pmf = law.pmf  # support 0..ell-1
        tail_ge = np.empty(ell + 1)
        tail_ge[ell] = 0.0
        tail_ge[:ell] = np.cumsum(pmf[::-1])[::-1]
        rows[ell - 1, :ell] = fv[:ell] * pmf - tail_ge[1 : ell + 1]
    rows.flags.writeable = False
    return DefectTable(rule=rule, rows=rows, big_l=big_l)


def turning_points(table: DefectTable, tol: float = SIGN_TOL) -> np.ndarray:
    """I(l) per row: the index where the row turns from rising to falling.

    I(l) is the first k whose forward difference drops below -tol; ties
    (|difference| <= tol) attach to the rising side.  A second rise beyond
    the turning point raises NotUnimodalError.
    """
    out = np.empty(table.big_l, dtype=int)
    for ell in range(1, table.big_l + 1):
        row = table.row(ell)
        if ell == 1:
            out[0] = 0
            continue
        diffs = np.diff(row)
        falling = diffs < -tol
        if not falling.any():
            out[ell - 1] = ell - 1
            continue
        turn = int(np.argmax(falling))
        later_rise = diffs[turn:] > tol
        if later_rise.any():
            raise NotUnimodalError(ell, turn + int(np.argmax(later_rise)))
        out[ell - 1] = turn
    out.flags.writeable = False
    return out


def sup_bound_constant(rule: AttachmentRule, crossing_k: int) -> float:
    """The explicit constant C = f(0) * max(1, max_{1<=k<=k*} prod f(i)/i)."""
    best = 1.0
    prod = 1.0
    for i in range(1, crossing_k + 1):
        prod *= float(rule(i)) / i
        best = max(best, prod)
    return float(rule(0)) * best


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    applicable: bool
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class PropertyReport:
    checks: tuple[PropertyCheck, ...]
    turning: np.ndarray | None
    sup_times_l: float | None  # empirical sup of l * max_k h(k, l)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)


def verify_properties(
    table: DefectTable,
    classification: RuleClassification,
    *,
    tol: float = SIGN_TOL,
    bound_tol: float = 1e-9,
    raise_on_failure: bool = False,
) -> PropertyReport:
    """Run the five structural checks the table is supposed to satisfy.

    (i)   h >= 0 everywhere (within -tol).
    (ii)  rows l <= K+1 nondecreasing when k <= f(k) <= k+1 up to K.
    (iii) unimodal rows with I(l+1) in {I(l), I(l)+1} once f crosses below
          the diagonal.
    (iv)  l * sup_k h(k, l) <= C with the explicit constant above.
    (v)   h(l-1, l) <= Gamma(l+gamma) / (Gamma(gamma) Gamma(l+1)) in the
          gamma band.
    """
    rule = table.rule
    big_l = table.big_l
    checks: list[PropertyCheck] = []

    def record(name: str, applicable: bool, passed: bool, detail: str = "") -> None:
        checks.append(PropertyCheck(name, applicable, passed, detail))
        if raise_on_failure and applicable and not passed:
            raise PropertyViolationError(name, -1, -1, detail)

    min_h = float(table.rows.min())
    record("nonnegative", True, min_h >= -tol, f"min h = {min_h!r}")

    band_k = classification.unit_band_k
    if band_k is not None and band_k >= 1:
        upto = min(big_l, band_k + 1)
        worst = 0.0
        ok = True
        for ell in range(2, upto + 1):
            diffs = np.diff(table.row(ell))
            if diffs.size:
                worst = min(worst, float(diffs.min()))
                ok = ok and diffs.min() >= -tol
        record("monotone-rows", True, ok, f"min forward difference = {worst!r}")
    else:
        record("monotone-rows", False, True, "no unit band at 0")

    turning: np.ndarray | None = None
    if classification.eventually_below:
        try:
            turning = turning_points(table, tol)
        except NotUnimodalError as exc:
            record("unimodal-rows", True, False, str(exc))
        else:
            steps = np.diff(turning)
            ok = bool(((steps == 0) | (steps == 1)).all())
            record("unimodal-rows", True, ok, f"turning-point steps in {set(steps.tolist())}")
    else:
        record("unimodal-rows", False, True, "f never crosses below the diagonal")

    sup_times_l = None
    if classification.eventually_below and classification.crossing_k is not None:
        const = sup_bound_constant(rule, classification.crossing_k)
        sups = table.rows.max(axis=1)
        ells = np.arange(1, big_l + 1)
        sup_times_l = float((ells * sups).max())
        record(
            "sup-bound",
            True,
            sup_times_l <= const + bound_tol,
            f"sup l*h = {sup_times_l!r} vs C = {const!r}",
        )
    else:
        record("sup-bound", False, True, "no crossing index")

    gamma = classification.band_gamma
    if gamma is not None:
        ells = np.arange(1, big_l + 1, dtype=float)
        edge = table.rows[np.arange(big_l), np.arange(big_l)]  # h(l-1, l)
        log_env = (
            math.lgamma(gamma)
            + np.array([math.lgamma(e + 1.0) - math.lgamma(e + gamma) for e in ells])
        )
        ratios = edge * np.exp(log_env)
        worst = float(ratios.max())
        record("edge-envelope", True, worst <= 1.0 + bound_tol, f"max ratio = {worst!r}")
    else:
        record("edge-envelope", False, True, "no gamma band")

    return PropertyReport(checks=tuple(checks), turning=turning, sup_times_l=sup_times_l)
