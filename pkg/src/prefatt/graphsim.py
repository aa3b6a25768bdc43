"""Seeded simulators for three growth models, plus an exhaustive oracle.

Models:

  RandomOutdegree   each arrival n+1 links to every old vertex j
                    independently with probability f(indeg(j))/n; the first
                    vertex starts with d0 self-edges.
  FixedOutdegree    each arrival links to exactly one old vertex, chosen with
                    probability (deg(j) + delta)/(n(2 + delta)) by total
                    degree; the first vertex carries one self-loop.  This is
                    the rule f(k) = (k + 1 + delta)/(2 + delta) with d0 = 1.
  Spatial           vertices land uniformly on the unit m-torus; an arrival
                    inside the ball of volume (A1*indeg(j) + A2)/n around j
                    links to j with probability p, so the marginal link
                    probability is exactly p*(A1*indeg(j) + A2)/n.

Randomness is counter-based (Philox) with streams keyed by
(seed, purpose, trial-block, step): trials are vectorized in fixed-size
blocks, blocks and histogram merges are order-independent, and repeated runs
are byte-identical.  `enumerate_exact` walks every outcome of a small graph
(n <= 5) with its exact probability and anchors the chain DP in tests.

Spatial geometry caveat: the required ball volume is capped at 1, and a
Euclidean-formula radius only realizes the right torus measure up to radius
1/2.  Beyond that cap membership is realized by an independent coin of the
right probability, so the marginal stays exact while locality degrades; the
volume never exceeds the cap when A1 + A2 is below the radius-1/2 ball
volume of the chosen dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Union

import numpy as np

from .attachment import Affine, AttachmentRule, require_valid
from .errors import ParamOutOfRangeError
from .limitlaw import _values_slice

__all__ = [
    "RandomOutdegree",
    "FixedOutdegree",
    "Spatial",
    "Model",
    "GraphState",
    "Histogram",
    "simulate",
    "empirical_uniform_indegree",
    "last_arrival_edges",
    "spatial_marginal_samples",
    "enumerate_exact",
]

_BLOCK = 16384  # trials per vectorized block; fixed so streams are stable


@dataclass(frozen=True)
class RandomOutdegree:
    rule: AttachmentRule


@dataclass(frozen=True)
class FixedOutdegree:
    delta: float

    def __post_init__(self):
        if self.delta <= -1.0:
            raise ParamOutOfRangeError("fixed-outdegree model needs delta > -1")

    @property
    def rule(self) -> Affine:
        """Equivalent indegree rule: f(k) = (k + 1 + delta)/(2 + delta), d0 = 1."""
        return Affine(
            gamma=1.0 / (2.0 + self.delta),
            beta=(1.0 + self.delta) / (2.0 + self.delta),
            d0=1,
        )


@dataclass(frozen=True)
class Spatial:
    m: int
    a1: float
    a2: float
    p: float

    def __post_init__(self):
        if self.m < 1:
            raise ParamOutOfRangeError("torus dimension must be >= 1")
        if self.a1 < 0.0 or self.a2 < 0.0:
            raise ParamOutOfRangeError("influence coefficients must be >= 0")
        if not 0.0 <= self.p <= 1.0:
            raise ParamOutOfRangeError("link probability p must lie in [0, 1]")
        if self.p * self.a1 > 1.0 or self.p * self.a2 > 1.0:
            raise ParamOutOfRangeError("need p*A1 <= 1 and p*A2 <= 1")

    @property
    def rule(self) -> Affine:
        """Marginal-equivalent rule f(k) = p*A1*k + p*A2 (d0 = 0)."""
        return Affine(gamma=self.p * self.a1, beta=self.p * self.a2, d0=0)


Model = Union[RandomOutdegree, FixedOutdegree, Spatial]


@dataclass(frozen=True)
class GraphState:
    """Final state of one simulated trajectory."""

    n: int
    indegrees: np.ndarray
    outdegree_of_last: int
    positions: np.ndarray | None = None
    edges: tuple[tuple[int, int], ...] | None = None


@dataclass(frozen=True)
class Histogram:
    """Per-value counts of one recorded statistic per trial."""

    counts: np.ndarray
    trials: int

    @property
    def freqs(self) -> np.ndarray:
        return self.counts / self.trials


def _stream(seed: int, purpose: int, block: int, step: int) -> np.random.Generator:
    key = np.random.SeedSequence(entropy=int(seed), spawn_key=(purpose, block, step))
    return np.random.Generator(np.random.Philox(key))


def _block_sizes(trials: int) -> list[tuple[int, int]]:
    sizes = []
    block, left = 0, trials
    while left > 0:
        take = min(_BLOCK, left)
        sizes.append((block, take))
        block += 1
        left -= take
    return sizes


def _torus_dist2(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    delta = np.abs(points - center)
    delta = np.minimum(delta, 1.0 - delta)
    return (delta * delta).sum(axis=-1)


def _half_ball_volume(m: int) -> float:
    return math.pi ** (m / 2.0) * 0.5**m / math.gamma(m / 2.0 + 1.0)


def _grow_random_outdegree(
    rule: AttachmentRule,
    n: int,
    trials: int,
    seed: int,
    block: int,
    *,
    keep_edges: bool = False,
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]] | None]:
    require_valid(rule, n + rule.d0)
    fv = _values_slice(rule, 0, rule.d0 + n)
    deg = np.zeros((trials, n), dtype=np.int32)
    deg[:, 0] = rule.d0
    edges: list[tuple[int, int]] | None = None
    if keep_edges:
        edges = [(1, 1)] * rule.d0
    last_out = np.zeros(trials, dtype=np.int64)
    for t in range(1, n):
        # float32 draws and thresholds: the 2**-24 probability quantization is
        # orders of magnitude below Monte Carlo noise, the generation is not
        u = _stream(seed, 0, block, t).random((trials, t), dtype=np.float32)
        thresholds = (fv / t).astype(np.float32)
        hit = u < np.take(thresholds, deg[:, :t])
        deg[:, :t] += hit
        last_out = hit.sum(axis=1)
        if keep_edges and trials == 1:
            edges.extend((t + 1, int(dst) + 1) for dst in np.nonzero(hit[0])[0])
    return deg, last_out, edges


def _grow_fixed_outdegree(
    model: FixedOutdegree,
    n: int,
    trials: int,
    seed: int,
    block: int,
    *,
    keep_edges: bool = False,
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]] | None]:
    delta = model.delta
    deg_total = np.zeros((trials, n), dtype=np.float64)
    deg_in = np.zeros((trials, n), dtype=np.int64)
    deg_total[:, 0] = 2.0  # the self-loop counts once in and once out
    deg_in[:, 0] = 1
    edges: list[tuple[int, int]] | None = [(1, 1)] if keep_edges else None
    rows = np.arange(trials)
    for t in range(1, n):
        u = _stream(seed, 0, block, t).random(trials)
        cum = np.cumsum(deg_total[:, :t] + delta, axis=1)
        # total weight is exactly t*(2+delta): t edges so far, each counted twice
        target = (cum < (u * t * (2.0 + delta))[:, None]).sum(axis=1)
        target = np.minimum(target, t - 1)
        deg_in[rows, target] += 1
        deg_total[rows, target] += 1.0
        deg_total[:, t] = 1.0  # the arrival's out-edge
        if keep_edges and trials == 1:
            edges.append((t + 1, int(target[0]) + 1))
    return deg_in, np.ones(trials, dtype=np.int64), edges


def _grow_spatial(
    model: Spatial, n: int, trials: int, seed: int, block: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = model.m
    cap = _half_ball_volume(m)
    unit = math.gamma(m / 2.0 + 1.0) / math.pi ** (m / 2.0)
    pos = np.empty((trials, n, m))
    pos[:, 0, :] = _stream(seed, 0, block, 0).random((trials, m))
    deg = np.zeros((trials, n), dtype=np.int64)
    last_out = np.zeros(trials, dtype=np.int64)
    for t in range(1, n):
        gen = _stream(seed, 0, block, t)
        newpos = gen.random((trials, m))
        coins = gen.random((trials, t))
        fallback = gen.random((trials, t))
        volumes = np.minimum((model.a1 * deg[:, :t] + model.a2) / t, 1.0)
        geometric = volumes <= cap
        radius2 = (volumes * unit) ** (2.0 / m)
        d2 = _torus_dist2(pos[:, :t, :], newpos[:, None, :])
        member = np.where(geometric, d2 <= radius2, fallback < volumes)
        hit = member & (coins < model.p)
        pos[:, t, :] = newpos
        deg[:, :t] += hit
        last_out = hit.sum(axis=1)
    return deg, last_out, pos


def simulate(model: Model, n: int, seed: int, *, keep_edges: bool = False) -> GraphState:
    """One trajectory (the first trial of the seed's first block)."""
    if n < 1:
        raise ParamOutOfRangeError("need n >= 1")
    if isinstance(model, RandomOutdegree):
        deg, out, edges = _grow_random_outdegree(
            model.rule, n, 1, seed, 0, keep_edges=keep_edges
        )
        return GraphState(
            n=n,
            indegrees=deg[0],
            outdegree_of_last=int(out[0]) if n > 1 else 0,
            edges=tuple(edges) if edges is not None else None,
        )
    if isinstance(model, FixedOutdegree):
        deg, out, edges = _grow_fixed_outdegree(model, n, 1, seed, 0, keep_edges=keep_edges)
        return GraphState(
            n=n,
            indegrees=deg[0],
            outdegree_of_last=int(out[0]) if n > 1 else 1,
            edges=tuple(edges) if edges is not None else None,
        )
    if isinstance(model, Spatial):
        deg, out, pos = _grow_spatial(model, n, 1, seed, 0)
        return GraphState(
            n=n,
            indegrees=deg[0],
            outdegree_of_last=int(out[0]) if n > 1 else 0,
            positions=pos[0],
        )
    raise ParamOutOfRangeError(f"unknown model {model!r}")


def _grow(model: Model, n: int, trials: int, seed: int, block: int) -> np.ndarray:
    if isinstance(model, RandomOutdegree):
        return _grow_random_outdegree(model.rule, n, trials, seed, block)[0]
    if isinstance(model, FixedOutdegree):
        return _grow_fixed_outdegree(model, n, trials, seed, block)[0]
    if isinstance(model, Spatial):
        return _grow_spatial(model, n, trials, seed, block)[0]
    raise ParamOutOfRangeError(f"unknown model {model!r}")


def empirical_uniform_indegree(model: Model, n: int, trials: int, seed: int) -> Histogram:
    """Sample a graph per trial, then one uniform vertex's indegree."""
    if trials < 1:
        raise ParamOutOfRangeError("need trials >= 1")
    d0 = model.rule.d0 if not isinstance(model, Spatial) else 0
    counts = np.zeros(d0 + n, dtype=np.int64)
    for block, take in _block_sizes(trials):
        deg = _grow(model, n, take, seed, block)
        picks = _stream(seed, 1, block, 0).integers(0, n, size=take)
        values = deg[np.arange(take), picks]
        counts += np.bincount(values, minlength=counts.size)
    counts.flags.writeable = False
    return Histogram(counts=counts, trials=trials)


def last_arrival_edges(model: Model, n: int, trials: int, seed: int) -> np.ndarray:
    """Edge indicators of the final arrival: boolean (trials, n-1)."""
    if n < 2:
        raise ParamOutOfRangeError("need n >= 2")
    if not isinstance(model, RandomOutdegree):
        raise ParamOutOfRangeError("edge indicators are tracked for the independent model")
    rule = model.rule
    require_valid(rule, n + rule.d0)
    fv = _values_slice(rule, 0, rule.d0 + n)
    out = np.empty((trials, n - 1), dtype=bool)
    done = 0
    for block, take in _block_sizes(trials):
        deg = np.zeros((take, n - 1), dtype=np.int32)
        deg[:, 0] = rule.d0
        hit = np.zeros((take, n - 1), dtype=bool)
        for t in range(1, n):
            u = _stream(seed, 0, block, t).random((take, t), dtype=np.float32)
            thresholds = (fv / t).astype(np.float32)
            hit_t = u < np.take(thresholds, deg[:, :t])
            if t == n - 1:
                hit = hit_t
            else:
                deg[:, :t] += hit_t
        out[done : done + take] = hit
        done += take
    return out


def spatial_marginal_samples(
    model: Spatial, n: int, trials: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """(indegree before the last arrival, connected?) for every old vertex.

    Flattened over trials and vertices; groups with equal indegree d should
    connect with frequency p*(A1*d + A2)/(n-1).
    """
    if n < 2:
        raise ParamOutOfRangeError("need n >= 2")
    degs = []
    hits = []
    cap = _half_ball_volume(model.m)
    unit = math.gamma(model.m / 2.0 + 1.0) / math.pi ** (model.m / 2.0)
    for block, take in _block_sizes(trials):
        deg, _, pos = _grow_spatial(model, n - 1, take, seed, block)
        gen = _stream(seed, 0, block, n - 1)  # continue the step-stream convention
        newpos = gen.random((take, model.m))
        coins = gen.random((take, n - 1))
        fallback = gen.random((take, n - 1))
        volumes = np.minimum((model.a1 * deg + model.a2) / (n - 1), 1.0)
        geometric = volumes <= cap
        radius2 = (volumes * unit) ** (2.0 / model.m)
        d2 = _torus_dist2(pos, newpos[:, None, :])
        member = np.where(geometric, d2 <= radius2, fallback < volumes)
        hit = member & (coins < model.p)
        degs.append(deg.ravel())
        hits.append(hit.ravel())
    return np.concatenate(degs), np.concatenate(hits)


def enumerate_exact(model: Model, n: int) -> np.ndarray:
    """Exact law of a uniform vertex's indegree by exhaustive enumeration.

    Walks every edge outcome of the first n arrivals with its probability as
    a product of step terms.  Kept independent of the chain DP on purpose:
    the two must agree exactly.  n <= 5 (the independent model has
    2**(n(n-1)/2) outcomes).
    """
    if n < 1 or n > 5:
        raise ParamOutOfRangeError("exhaustive enumeration supports 1 <= n <= 5")
    if isinstance(model, RandomOutdegree):
        rule = model.rule
        require_valid(rule, n + rule.d0)
        law = np.zeros(rule.d0 + n)

        def walk(t: int, degs: tuple[int, ...], prob: float) -> None:
            if t == n:
                for d in degs:
                    law[d] += prob / n
                return
            probs = [float(rule(d)) / t for d in degs]
            for hits in product((0, 1), repeat=t):
                p = prob
                for h, q in zip(hits, probs):
                    p *= q if h else 1.0 - q
                if p == 0.0:
                    continue
                walk(t + 1, tuple(d + h for d, h in zip(degs, hits)) + (0,), p)

        walk(1, (rule.d0,), 1.0)
        assert abs(law.sum() - 1.0) < 1e-13
        return law
    if isinstance(model, FixedOutdegree):
        delta = model.delta
        law = np.zeros(1 + n)

        def walk2(t: int, deg_in: tuple[int, ...], deg_tot: tuple[int, ...], prob: float) -> None:
            if t == n:
                for d in deg_in:
                    law[d] += prob / n
                return
            denom = t * (2.0 + delta)
            for j in range(t):
                p = prob * (deg_tot[j] + delta) / denom
                di = tuple(d + (1 if i == j else 0) for i, d in enumerate(deg_in)) + (0,)
                dt = tuple(d + (1 if i == j else 0) for i, d in enumerate(deg_tot)) + (1,)
                walk2(t + 1, di, dt, p)

        walk2(1, (1,), (2,), 1.0)
        assert abs(law.sum() - 1.0) < 1e-13
        return law
    raise ParamOutOfRangeError("exact enumeration covers the two non-spatial models")
