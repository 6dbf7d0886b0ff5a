"""Weighted random-graph sampling and exact moments of the combined pattern weight.

Each edge of the complete host carries one uniform; the edge is retained when
the uniform falls below p and its weight is then quantile(uniform / p), whose
conditional law is exactly the weight model.  Presence and weight coming from
a single uniform is what lets the chaos module reproduce the statistic
pathwise from the same stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import rng
from .errors import DegenerateConfigError, ResourceLimitError
from .patterns import PatternGraph, complete_graph_edges, copies_in_complete, enumerate_copies, log_max_variance_term
from .weights import WeightModel

PAIR_CENSUS_CAP = 100_000_000
MAX_HOST_N = 200

Edge = tuple[int, int]


@lru_cache(maxsize=None)
def _edge_index(n: int) -> dict[Edge, int]:
    return {e: i for i, e in enumerate(complete_graph_edges(n))}


@lru_cache(maxsize=None)
def _copies_in_kn(pattern: PatternGraph, n: int) -> tuple[tuple[int, ...], ...]:
    """Copies of the pattern in the complete host, as tuples of edge indices."""
    index = _edge_index(n)
    copies = enumerate_copies(pattern, complete_graph_edges(n))
    return tuple(tuple(index[e] for e in copy) for copy in copies)


@dataclass(frozen=True)
class HostSample:
    """One realization of the weighted random graph, determined by its uniforms."""

    n: int
    p: float
    model: WeightModel
    seed: int
    replicate: int
    uniforms: np.ndarray  # one value in [0, 1) per edge of the complete host

    @property
    def present(self) -> np.ndarray:
        return self.uniforms < self.p

    def edge_weights(self) -> np.ndarray:
        """Weight per edge index; zero on absent edges."""
        out = np.zeros_like(self.uniforms)
        mask = self.present
        out[mask] = self.model.quantile_array(self.uniforms[mask] / self.p)
        return out

    def present_edges(self) -> list[Edge]:
        edges = complete_graph_edges(self.n)
        return [edges[i] for i in np.flatnonzero(self.present)]


@dataclass(frozen=True)
class StatisticSample:
    raw_w: float
    normalized: float
    replicate: int


@dataclass(frozen=True)
class SampleBatch:
    """Replicated draws of the combined weight, raw and normalized."""

    pattern: PatternGraph
    n: int
    p: float
    model: WeightModel
    seed: int
    exact_mean: float
    exact_variance: float
    raw: np.ndarray
    normalized: np.ndarray

    @property
    def reps(self) -> int:
        return self.raw.size

    def samples(self) -> Iterator[StatisticSample]:
        for i in range(self.reps):
            yield StatisticSample(float(self.raw[i]), float(self.normalized[i]), i)


def sample_host(n: int, p: float, model: WeightModel, seed: int, replicate: int) -> HostSample:
    """Deterministic host draw: uniforms are the (replicate)-th row of the seed's stream."""
    if not (2 <= n <= MAX_HOST_N):
        raise ValueError(f"host size must lie in [2, {MAX_HOST_N}], got {n}")
    if not (0.0 < p < 1.0):
        raise ValueError(f"retention probability must lie in (0, 1), got {p}")
    n_edges = n * (n - 1) // 2
    uniforms = rng.uniform_matrix(seed, 1, n_edges, first_row=replicate)[0]
    uniforms.setflags(write=False)
    return HostSample(n=n, p=p, model=model, seed=seed, replicate=replicate, uniforms=uniforms)


def _weight_by_copy_search(pattern: PatternGraph, host: HostSample) -> float:
    """Enumerate copies inside the present edge set and add their edge weights."""
    present = host.present_edges()
    if len(present) < pattern.num_edges:
        return 0.0
    weights = host.edge_weights()
    index = _edge_index(host.n)
    total = 0.0
    for copy in enumerate_copies(pattern, present):
        total += sum(weights[index[e]] for e in copy)
    return total


def _weight_by_edge_counts(pattern: PatternGraph, host: HostSample) -> float:
    """Edge-centric rewrite: weight(e) times the number of present copies through e."""
    copies = np.array(_copies_in_kn(pattern, host.n), dtype=np.int64)
    if copies.size == 0:
        return 0.0
    present = host.present
    present_copies = present[copies].all(axis=1)
    counts = np.bincount(copies[present_copies].ravel(), minlength=present.size)
    return float(np.dot(host.edge_weights(), counts))


def combined_weight(pattern: PatternGraph, host: HostSample) -> float:
    """Total weight of present copies; cross-checked by two independent algorithms."""
    by_copy = _weight_by_copy_search(pattern, host)
    by_edge = _weight_by_edge_counts(pattern, host)
    if abs(by_copy - by_edge) > 1e-9 * (1.0 + abs(by_copy)):
        raise AssertionError(
            f"combined-weight algorithms disagree: {by_copy!r} vs {by_edge!r}"
        )
    return by_copy


def exact_mean(pattern: PatternGraph, n: int, p: float, model: WeightModel) -> float:
    """copies * e_G * p^{e_G} * E[X]."""
    if n < pattern.num_vertices:
        raise ValueError(f"need n >= {pattern.num_vertices}")
    e_g = pattern.num_edges
    return copies_in_complete(pattern, n) * e_g * p**e_g * model.mean


def intersection_pair_census(pattern: PatternGraph, n: int) -> dict[int, int]:
    """Ordered pairs of copies in the complete host, counted by shared edge count >= 1.

    Includes the diagonal (every copy paired with itself, sharing all e_G
    edges).  Pairs sharing no edge are not reported; they do not contribute
    to the variance.
    """
    return dict(_pair_census_cached(pattern, n))


@lru_cache(maxsize=None)
def _pair_census_cached(pattern: PatternGraph, n: int) -> tuple[tuple[int, int], ...]:
    copies = _copies_in_kn(pattern, n)
    n_copies = len(copies)
    if n_copies * n_copies > PAIR_CENSUS_CAP:
        raise ResourceLimitError(
            f"pair census needs {n_copies}^2 pairs, over the cap {PAIR_CENSUS_CAP}"
        )
    if n_copies == 0:
        return ()
    n_edges = n * (n - 1) // 2
    words = (n_edges + 63) // 64
    masks = np.zeros((n_copies, words), dtype=np.uint64)
    for i, copy in enumerate(copies):
        for e in copy:
            masks[i, e // 64] |= np.uint64(1) << np.uint64(e % 64)

    census: dict[int, int] = {}
    chunk = max(1, min(n_copies, 4_000_000 // max(1, n_copies * words)))
    for lo in range(0, n_copies, chunk):
        hi = min(lo + chunk, n_copies)
        shared = np.bitwise_count(masks[lo:hi, None, :] & masks[None, :, :]).sum(axis=2)
        values, counts = np.unique(shared[shared > 0], return_counts=True)
        for h, c in zip(values.tolist(), counts.tolist()):
            census[h] = census.get(h, 0) + int(c)
    return tuple(sorted(census.items()))


def exact_variance(pattern: PatternGraph, n: int, p: float, model: WeightModel) -> float:
    """Sum over the pair census of the closed-form covariance of two copies.

    Two copies sharing h >= 1 edges have covariance
    p^{2 e_G - h} (h Var[X] + e_G^2 (1 - p^h) E[X]^2); disjoint pairs are
    independent.
    """
    m = model.moments()
    e_g = pattern.num_edges
    total = 0.0
    for h, count in intersection_pair_census(pattern, n).items():
        total += count * p ** (2 * e_g - h) * (h * m.variance + e_g**2 * (1.0 - p**h) * m.mean**2)
    return total


def asymptotic_variance(pattern: PatternGraph, n: int, p: float, model: WeightModel) -> float:
    """Constant-free representative: (Var[X] + (1-p) E[X]^2) * max variance term."""
    m = model.moments()
    return (m.variance + (1.0 - p) * m.mean**2) * math.exp(log_max_variance_term(pattern, n, p))


def _accumulate_weights(pattern: PatternGraph, n: int, p: float, model: WeightModel,
                        seed: int, out: np.ndarray, lo: int, hi: int) -> None:
    """Fill out[lo:hi] with combined weights for replicates lo..hi."""
    n_edges = n * (n - 1) // 2
    copies = np.array(_copies_in_kn(pattern, n), dtype=np.int64)
    u = rng.uniform_matrix(seed, hi - lo, n_edges, first_row=lo)
    present = u < p
    weights = np.zeros_like(u)
    weights[present] = model.quantile_array(u[present] / p)
    all_present = np.ones((hi - lo, copies.shape[0]), dtype=bool)
    weight_sums = np.zeros((hi - lo, copies.shape[0]))
    for j in range(copies.shape[1]):
        col = copies[:, j]
        all_present &= present[:, col]
        weight_sums += weights[:, col]
    out[lo:hi] = (all_present * weight_sums).sum(axis=1)


def normalized_samples(pattern: PatternGraph, n: int, p: float, model: WeightModel,
                       reps: int, seed: int) -> SampleBatch:
    """Independent replicates of the combined weight, centered and scaled exactly."""
    mean = exact_mean(pattern, n, p, model)
    var = exact_variance(pattern, n, p, model)
    if var <= 1e-12 * mean * mean:
        raise DegenerateConfigError(
            "configuration has numerically zero variance; cannot normalize"
        )
    if reps < 0:
        raise ValueError("reps must be nonnegative")
    raw = np.empty(reps, dtype=float)
    n_copies = len(_copies_in_kn(pattern, n))
    chunk = max(64, min(20_000, 4_000_000 // max(1, n_copies)))
    rng.map_chunks(
        lambda lo, hi: _accumulate_weights(pattern, n, p, model, seed, raw, lo, hi),
        rng.chunk_ranges(reps, chunk),
    )
    normalized = (raw - mean) / math.sqrt(var)
    raw.setflags(write=False)
    normalized.setflags(write=False)
    return SampleBatch(pattern=pattern, n=n, p=p, model=model, seed=seed,
                       exact_mean=mean, exact_variance=var, raw=raw, normalized=normalized)
