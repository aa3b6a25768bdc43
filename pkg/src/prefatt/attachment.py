"""Attachment rules and their hypothesis checks.

An attachment rule is a function f on the nonnegative integers that sets the
connection odds in a growing random graph: an arriving vertex links to an old
vertex of indegree k with probability f(k)/n.  Admissibility requires
f(k) > 0 and f(k) <= max(k + 1 - d0, 1), where d0 is the number of self-edges
the first vertex starts with.  Everything downstream (limit law, chain DP,
rate certification) consumes rules through the small surface defined here.

Rule shapes: affine (gamma*k + beta), constant, sublinear power
(gamma * k**alpha with an explicit value at 0), and tabulated values with an
affine or repeat-last continuation.  Rules are frozen dataclasses and safe to
share across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ParamOutOfRangeError, RuleViolationError

__all__ = [
    "Affine",
    "Constant",
    "SublinearPower",
    "TableRule",
    "AffineTail",
    "RepeatLast",
    "AttachmentRule",
    "RuleClassification",
    "ValidationReport",
    "validate",
    "classify",
    "rule_from_json",
    "rule_to_json",
]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParamOutOfRangeError(msg)


@dataclass(frozen=True)
class Affine:
    """f(k) = gamma*k + beta."""

    gamma: float
    beta: float
    d0: int = 0

    def __post_init__(self):
        _require(self.beta > 0.0, "affine rule needs beta > 0 so that f(0) > 0")
        _require(self.gamma >= 0.0, "affine rule needs gamma >= 0")
        _require(self.d0 >= 0, "d0 must be a nonnegative integer")

    def __call__(self, k: int) -> float:
        return self.gamma * k + self.beta

    def values(self, count: int) -> np.ndarray:
        return self.gamma * np.arange(count, dtype=float) + self.beta


@dataclass(frozen=True)
class Constant:
    """f(k) = c for every k."""

    c: float
    d0: int = 0

    def __post_init__(self):
        _require(self.c > 0.0, "constant rule needs c > 0")
        _require(self.d0 >= 0, "d0 must be a nonnegative integer")

    def __call__(self, k: int) -> float:
        return self.c

    def values(self, count: int) -> np.ndarray:
        return np.full(count, self.c, dtype=float)


@dataclass(frozen=True)
class SublinearPower:
    """f(k) = gamma * k**alpha for k >= 1, with f(0) = f0.

    The value at 0 is a separate parameter because gamma * 0**alpha would be 0
    and rules must stay strictly positive.
    """

    gamma: float
    alpha: float
    f0: float
    d0: int = 0

    def __post_init__(self):
        _require(self.gamma > 0.0, "power rule needs gamma > 0")
        _require(0.0 < self.alpha < 1.0, "power rule needs 0 < alpha < 1")
        _require(self.f0 > 0.0, "power rule needs f0 > 0")
        _require(self.d0 >= 0, "d0 must be a nonnegative integer")

    def __call__(self, k: int) -> float:
        if k == 0:
            return self.f0
        return self.gamma * k**self.alpha

    def values(self, count: int) -> np.ndarray:
        out = self.gamma * np.arange(count, dtype=float) ** self.alpha
        if count > 0:
            out[0] = self.f0
        return out


@dataclass(frozen=True)
class AffineTail:
    """Continue a table with gamma*k + beta beyond its last entry."""

    gamma: float
    beta: float


@dataclass(frozen=True)
class RepeatLast:
    """Continue a table by repeating its last entry."""


@dataclass(frozen=True)
class TableRule:
    """Explicitly tabulated values for k < len(values), then a continuation."""

    values_head: tuple[float, ...]
    tail: Union[AffineTail, RepeatLast] = field(default_factory=RepeatLast)
    d0: int = 0

    def __post_init__(self):
        _require(len(self.values_head) >= 1, "table rule needs at least one value")
        _require(all(v > 0.0 for v in self.values_head), "table values must be > 0")
        if isinstance(self.tail, AffineTail):
            _require(self.tail.gamma >= 0.0, "table tail needs gamma >= 0")
        _require(self.d0 >= 0, "d0 must be a nonnegative integer")
        object.__setattr__(self, "values_head", tuple(float(v) for v in self.values_head))

    def __call__(self, k: int) -> float:
        if k < len(self.values_head):
            return self.values_head[k]
        if isinstance(self.tail, AffineTail):
            return self.tail.gamma * k + self.tail.beta
        return self.values_head[-1]

    def values(self, count: int) -> np.ndarray:
        head = np.asarray(self.values_head[:count], dtype=float)
        if count <= head.size:
            return head
        ks = np.arange(head.size, count, dtype=float)
        if isinstance(self.tail, AffineTail):
            ext = self.tail.gamma * ks + self.tail.beta
        else:
            ext = np.full(ks.size, self.values_head[-1])
        return np.concatenate([head, ext])


AttachmentRule = Union[Affine, Constant, SublinearPower, TableRule]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking positivity and the admissibility envelope."""

    ok: bool
    horizon: int
    first_violation: int | None = None
    message: str | None = None


def _envelope(ks: np.ndarray, d0: int) -> np.ndarray:
    return np.maximum(ks + 1.0 - d0, 1.0)


def validate(rule: AttachmentRule, horizon: int) -> ValidationReport:
    """Check f(k) > 0 and f(k) <= max(k + 1 - d0, 1) for k = 0..horizon.

    The comparison is exact: the boundary case f(k) = k + 1 (d0 = 0) passes.
    """
    _require(horizon >= 1, "validation horizon must be >= 1")
    ks = np.arange(horizon + 1)
    fv = rule.values(horizon + 1)
    bad = (fv <= 0.0) | (fv > _envelope(ks, rule.d0))
    if not bad.any():
        return ValidationReport(ok=True, horizon=horizon)
    k = int(np.argmax(bad))
    bound = float(max(k + 1 - rule.d0, 1))
    return ValidationReport(
        ok=False,
        horizon=horizon,
        first_violation=k,
        message=f"f({k})={fv[k]!r} outside (0, {bound!r}]",
    )


def require_valid(rule: AttachmentRule, horizon: int) -> None:
    """Raise RuleViolationError unless the rule is admissible up to horizon."""
    report = validate(rule, horizon)
    if not report.ok:
        k = report.first_violation
        raise RuleViolationError(k, float(rule(k)), float(max(k + 1 - rule.d0, 1)))


@dataclass(frozen=True)
class RuleClassification:
    """Which rate regimes a rule's shape admits.

    crossing_k        first k with f(k) <= k, provided f(k) > k strictly below
                      it and f stays <= k from there on (ties f(k) = k count
                      as <=).  None when the sign pattern of f(k) - k is not
                      "+...+ then <= forever" over the certified range.
    eventually_below  True iff crossing_k is set; gates the log(n)/n
                      total-variation rate for the indegree law.
    band_gamma        least gamma in (0,1) with k <= f(k) <= k + gamma
                      everywhere; gates the n^(gamma-1) rate.  None otherwise.
    majorant_slope    least gamma >= 0 with f(k) <= gamma*k + 1 everywhere,
                      reported only when < 1; gates the Poisson outdegree
                      rates.  None otherwise.
    unit_band_k       largest K with k <= f(k) <= k + 1 for all k <= K,
                      scanned on the horizon only (no extrapolation).
    whole_domain      True when the rule's closed form settles the sign
                      pattern beyond the scanned horizon, so crossing_k,
                      band_gamma and majorant_slope are verdicts for all of
                      the nonnegative integers rather than just the horizon.
    """

    horizon: int
    crossing_k: int | None
    eventually_below: bool
    band_gamma: float | None
    majorant_slope: float | None
    unit_band_k: int | None
    whole_domain: bool


def _scan_crossing(diffs: np.ndarray) -> int | None:
    """First index of the (+...+, then <= 0 forever) pattern, else None."""
    nonpos = diffs <= 0.0
    if not nonpos.any():
        return None
    k = int(np.argmax(nonpos))
    if nonpos[k:].all():
        return k if k >= 1 else None  # f(0) > 0 makes k = 0 impossible
    return None


def _settle_index(rule: AttachmentRule) -> int | None:
    """Index beyond which the sign of f(k) - k can no longer change.

    None means the scan horizon cannot certify whole-domain verdicts.
    """
    if isinstance(rule, Constant):
        return int(math.ceil(rule.c))
    if isinstance(rule, Affine):
        if rule.gamma < 1.0:
            return int(math.ceil(rule.beta / (1.0 - rule.gamma)))
        return 0  # slope >= 1 with beta > 0: f(k) - k never decreases through 0
    if isinstance(rule, SublinearPower):
        return max(1, int(math.ceil(rule.gamma ** (1.0 / (1.0 - rule.alpha)))))
    if isinstance(rule, TableRule):
        n = len(rule.values_head)
        if isinstance(rule.tail, RepeatLast):
            return n + int(math.ceil(rule.values_head[-1]))
        if rule.tail.gamma < 1.0:
            return n + int(math.ceil(rule.tail.beta / (1.0 - rule.tail.gamma)))
        return n
    raise TypeError(f"unknown rule type {type(rule)!r}")


def _majorant_slope(rule: AttachmentRule, fv: np.ndarray) -> float | None:
    """Least gamma with f(k) <= gamma*k + 1 for all k, or None if >= 1.

    For closed-form rules this is a whole-domain value; for tables the scanned
    head is combined with the exact continuation.
    """
    if fv[0] > 1.0:
        return None
    if isinstance(rule, Constant):
        return 0.0 if rule.c <= 1.0 else None
    if isinstance(rule, Affine):
        if rule.beta <= 1.0 and rule.gamma < 1.0:
            return rule.gamma
        return None
    if isinstance(rule, SublinearPower):
        # (f(k)-1)/k peaks near x* where the derivative of g*x**(a-1) - 1/x
        # vanishes; the integer max sits at floor/ceil of x*.
        g, a = rule.gamma, rule.alpha
        xs = {1.0}
        xstar = (g * (1.0 - a)) ** (-1.0 / a)
        xs.update({math.floor(xstar), math.ceil(xstar)})
        slope = max((g * x**a - 1.0) / x for x in xs if x >= 1)
        slope = max(slope, 0.0)
        return slope if slope < 1.0 else None
    if isinstance(rule, TableRule):
        n = len(rule.values_head)
        ks = np.arange(1, n)
        head = float(np.max((fv[1:n] - 1.0) / ks)) if n > 1 else 0.0
        if isinstance(rule.tail, AffineTail):
            if rule.tail.beta <= 1.0:
                ext = rule.tail.gamma
            else:
                # worst index is the first extension point
                ext = (rule.tail.gamma * n + rule.tail.beta - 1.0) / n
        else:
            ext = max((rule.values_head[-1] - 1.0) / n, 0.0)
        slope = max(head, ext, 0.0)
        return slope if slope < 1.0 else None
    raise TypeError(f"unknown rule type {type(rule)!r}")


def _band_gamma(rule: AttachmentRule, diffs: np.ndarray, whole: bool) -> float | None:
    if float(diffs.min()) < 0.0:
        return None
    if isinstance(rule, Affine):
        if rule.gamma == 1.0 and 0.0 < rule.beta < 1.0:
            return rule.beta
        return None
    if isinstance(rule, TableRule) and isinstance(rule.tail, AffineTail):
        if rule.tail.gamma != 1.0 or rule.tail.beta >= 1.0:
            return None
        gamma = float(diffs.max())
        return gamma if 0.0 < gamma < 1.0 else None
    if not whole:
        gamma = float(diffs.max())
        return gamma if 0.0 < gamma < 1.0 else None
    return None  # constant / sublinear / affine slope != 1: f - k is unbounded below


def classify(rule: AttachmentRule, horizon: int) -> RuleClassification:
    """Scan f(k) - k on [0, horizon] and settle regime flags.

    Closed-form rule shapes extend the scan to a whole-domain verdict; the
    scan itself uses exact comparisons (no tolerance).
    """
    require_valid(rule, horizon)
    ks = np.arange(horizon + 1, dtype=float)
    fv = rule.values(horizon + 1)
    diffs = fv - ks

    settle = _settle_index(rule)
    whole = settle is not None and settle <= horizon

    crossing = _scan_crossing(diffs)
    band = _band_gamma(rule, diffs, whole)
    slope = _majorant_slope(rule, fv)

    in_band = (fv >= ks) & (fv <= ks + 1.0)
    if not in_band[0]:
        unit_band = None
    elif in_band.all():
        unit_band = horizon
    else:
        unit_band = int(np.argmax(~in_band)) - 1
        unit_band = unit_band if unit_band >= 0 else None

    return RuleClassification(
        horizon=horizon,
        crossing_k=crossing,
        eventually_below=crossing is not None,
        band_gamma=band,
        majorant_slope=slope,
        unit_band_k=unit_band,
        whole_domain=whole,
    )


# --- JSON descriptors (stable field names for reproducible configs) ---------

def rule_to_json(rule: AttachmentRule) -> dict:
    if isinstance(rule, Affine):
        return {"kind": "affine", "gamma": rule.gamma, "beta": rule.beta, "d0": rule.d0}
    if isinstance(rule, Constant):
        return {"kind": "constant", "c": rule.c, "d0": rule.d0}
    if isinstance(rule, SublinearPower):
        return {
            "kind": "power",
            "gamma": rule.gamma,
            "alpha": rule.alpha,
            "f0": rule.f0,
            "d0": rule.d0,
        }
    if isinstance(rule, TableRule):
        if isinstance(rule.tail, AffineTail):
            tail = {"kind": "affine-extension", "gamma": rule.tail.gamma, "beta": rule.tail.beta}
        else:
            tail = {"kind": "repeat-last"}
        return {"kind": "table", "values": list(rule.values_head), "tail": tail, "d0": rule.d0}
    raise TypeError(f"unknown rule type {type(rule)!r}")


def rule_from_json(source: Union[str, Path, dict]) -> AttachmentRule:
    """Build a rule from a JSON descriptor, inline string, or file path."""
    if isinstance(source, dict):
        obj = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            obj = json.loads(text)
        else:
            obj = json.loads(Path(text).read_text())
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParamOutOfRangeError("rule descriptor must be an object with a 'kind' field")
    kind = obj["kind"]
    d0 = int(obj.get("d0", 0))
    try:
        if kind == "affine":
            return Affine(gamma=float(obj["gamma"]), beta=float(obj["beta"]), d0=d0)
        if kind == "constant":
            return Constant(c=float(obj["c"]), d0=d0)
        if kind == "power":
            return SublinearPower(
                gamma=float(obj["gamma"]),
                alpha=float(obj["alpha"]),
                f0=float(obj["f0"]),
                d0=d0,
            )
        if kind == "table":
            tail_obj = obj.get("tail", {"kind": "repeat-last"})
            if tail_obj.get("kind") == "affine-extension":
                tail: Union[AffineTail, RepeatLast] = AffineTail(
                    gamma=float(tail_obj["gamma"]), beta=float(tail_obj["beta"])
                )
            elif tail_obj.get("kind") == "repeat-last":
                tail = RepeatLast()
            else:
                raise ParamOutOfRangeError(f"unknown table tail kind {tail_obj!r}")
            return TableRule(values_head=tuple(obj["values"]), tail=tail, d0=d0)
    except KeyError as exc:
        raise ParamOutOfRangeError(f"rule descriptor missing field {exc.args[0]!r}") from exc
    raise ParamOutOfRangeError(f"unknown rule kind {kind!r}")
