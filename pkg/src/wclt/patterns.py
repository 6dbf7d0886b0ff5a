"""Small pattern graphs: parsing, subgraph statistics, and copy enumeration.

A pattern is a fixed small graph.  The statistics exposed here (extremal
subgraph terms, density ratio, balance test) drive the convergence-rate
formulas, while automorphism/copy counting supports exact moments of the
combined pattern weight in a random host graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations

from .errors import PatternError, ResourceLimitError

MAX_AUTOMORPHISM_VERTICES = 10
MAX_PROFILE_EDGES = 20
MAX_HOST_VERTICES = 64

Edge = tuple[int, int]


def _normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class PatternGraph:
    """A fixed small graph given by vertex count and an unordered edge list."""

    num_vertices: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        if self.num_vertices < 1:
            raise PatternError("pattern needs at least one vertex")
        seen: set[Edge] = set()
        normalized = []
        for u, v in self.edges:
            if u == v:
                raise PatternError(f"self-loop at vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise PatternError(f"edge ({u}, {v}) out of range for {self.num_vertices} vertices")
            e = _normalize_edge(u, v)
            if e in seen:
                raise PatternError(f"duplicate edge ({e[0]}, {e[1]})")
            seen.add(e)
            normalized.append(e)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def covered_vertices(self) -> frozenset[int]:
        return frozenset(v for e in self.edges for v in e)

    @property
    def has_isolated_vertices(self) -> bool:
        return len(self.covered_vertices) < self.num_vertices

    def degrees(self) -> list[int]:
        deg = [0] * self.num_vertices
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def is_connected(self) -> bool:
        """Connectivity over all vertices (an isolated vertex disconnects)."""
        if self.num_vertices == 1:
            return True
        adj: dict[int, set[int]] = {v: set() for v in range(self.num_vertices)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {0}
        stack = [0]
        while stack:
            w = stack.pop()
            for x in adj[w]:
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        return len(seen) == self.num_vertices


@dataclass(frozen=True)
class SubgraphProfile:
    """One (vertex count, edge count) class of edge-subset subgraphs."""

    v_h: int
    e_h: int
    multiplicity: int


def parse_pattern(text: str) -> PatternGraph:
    """Parse the edge-list pattern format: first line v_G, then one edge per line."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise PatternError("empty pattern file")
    try:
        num_vertices = int(lines[0])
    except ValueError:
        raise PatternError(f"line 1: expected vertex count, got {lines[0]!r}") from None
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise PatternError(f"line {lineno}: expected 'i j', got {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise PatternError(f"line {lineno}: expected integers, got {ln!r}") from None
        if u == v:
            raise PatternError(f"line {lineno}: self-loop at vertex {u}")
        if not (0 <= u < num_vertices and 0 <= v < num_vertices):
            raise PatternError(f"line {lineno}: vertex index out of range")
        edge = _normalize_edge(u, v)
        if edge in edges:
            raise PatternError(f"line {lineno}: duplicate edge")
        edges.append(edge)
    return PatternGraph(num_vertices, tuple(edges))


def named_pattern(name: str) -> PatternGraph:
    """Built-in patterns: triangle, cycle:r, complete:r, path:r, star:r."""
    name = name.strip().lower()
    if name == "triangle":
        return PatternGraph(3, ((0, 1), (1, 2), (0, 2)))
    if ":" in name:
        kind, _, arg = name.partition(":")
        try:
            r = int(arg)
        except ValueError:
            raise PatternError(f"bad pattern parameter in {name!r}") from None
        if kind == "cycle":
            if r < 3:
                raise PatternError("cycle:r needs r >= 3")
            return PatternGraph(r, tuple((i, (i + 1) % r) for i in range(r)))
        if kind == "complete":
            if r < 2:
                raise PatternError("complete:r needs r >= 2")
            return PatternGraph(r, tuple(combinations(range(r), 2)))
        if kind == "path":
            if r < 2:
                raise PatternError("path:r needs r >= 2 vertices")
            return PatternGraph(r, tuple((i, i + 1) for i in range(r - 1)))
        if kind == "star":
            if r < 1:
                raise PatternError("star:r needs r >= 1 leaves")
            return PatternGraph(r + 1, tuple((0, i) for i in range(1, r + 1)))
    raise PatternError(f"unknown pattern {name!r}")


def edge_subgraph_profiles(pattern: PatternGraph) -> list[SubgraphProfile]:
    """Profiles of all subgraphs spanned by nonempty edge subsets.

    A subgraph is identified with an edge subset; its vertex count is the
    number of incident vertices, so no profile carries isolated vertices.
    Multiplicities over all profiles sum to 2^e - 1.
    """
    e = pattern.num_edges
    if e < 1:
        raise PatternError("pattern needs at least one edge")
    if e > MAX_PROFILE_EDGES:
        raise ResourceLimitError(f"profile enumeration capped at {MAX_PROFILE_EDGES} edges")
    counts: dict[tuple[int, int], int] = {}
    edges = pattern.edges
    for size in range(1, e + 1):
        for subset in combinations(edges, size):
            verts = set()
            for u, v in subset:
                verts.add(u)
                verts.add(v)
            key = (len(verts), size)
            counts[key] = counts.get(key, 0) + 1
    return [SubgraphProfile(v_h, e_h, mult) for (v_h, e_h), mult in sorted(counts.items())]


def beta(pattern: PatternGraph) -> Fraction:
    """Maximal edge/vertex density over edge-subset subgraphs, as an exact rational."""
    return max(Fraction(prof.e_h, prof.v_h) for prof in edge_subgraph_profiles(pattern))


def _check_np(pattern: PatternGraph, n: int, p: float) -> None:
    if n < pattern.num_vertices:
        raise ValueError(f"need n >= {pattern.num_vertices}, got {n}")
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p}")


def log_min_subgraph_term(pattern: PatternGraph, n: int, p: float) -> float:
    """log of min over subgraph profiles of n^{v_H} p^{e_H}."""
    _check_np(pattern, n, p)
    ln_n, ln_p = math.log(n), math.log(p)
    return min(prof.v_h * ln_n + prof.e_h * ln_p for prof in edge_subgraph_profiles(pattern))


def min_subgraph_term(pattern: PatternGraph, n: int, p: float) -> float:
    return math.exp(log_min_subgraph_term(pattern, n, p))


def log_max_variance_term(pattern: PatternGraph, n: int, p: float) -> float:
    """log of max over profiles of n^{2 v_G - v_H} p^{2 e_G - e_H}."""
    _check_np(pattern, n, p)
    ln_n, ln_p = math.log(n), math.log(p)
    v_g, e_g = pattern.num_vertices, pattern.num_edges
    return max(
        (2 * v_g - prof.v_h) * ln_n + (2 * e_g - prof.e_h) * ln_p
        for prof in edge_subgraph_profiles(pattern)
    )


def max_variance_term(pattern: PatternGraph, n: int, p: float) -> float:
    return math.exp(log_max_variance_term(pattern, n, p))


def is_balanced(pattern: PatternGraph) -> bool:
    """Balance test: (e_H - 1)/(v_H - 2) over v_H >= 3 profiles is maximized at the whole pattern.

    Balanced patterns are exactly those for which the extremal subgraph
    minimum collapses to min(n^2 p, n^{v_G} p^{e_G}).
    """
    if pattern.num_vertices < 3:
        raise PatternError("balance test needs graphs with at least three vertices")
    if pattern.num_edges < 1:
        raise PatternError("balance test needs at least one edge")
    ratios = [
        Fraction(prof.e_h - 1, prof.v_h - 2)
        for prof in edge_subgraph_profiles(pattern)
        if prof.v_h >= 3
    ]
    if not ratios:
        return False
    return max(ratios) == Fraction(pattern.num_edges - 1, pattern.num_vertices - 2)


def automorphism_count(pattern: PatternGraph) -> int:
    """Number of vertex permutations preserving the edge set, by brute force."""
    v = pattern.num_vertices
    if v > MAX_AUTOMORPHISM_VERTICES:
        raise ResourceLimitError(f"automorphism search capped at {MAX_AUTOMORPHISM_VERTICES} vertices")
    edge_set = set(pattern.edges)
    count = 0
    for perm in permutations(range(v)):
        if all(_normalize_edge(perm[u], perm[v_]) in edge_set for u, v_ in pattern.edges):
            count += 1
    return count


def copies_in_complete(pattern: PatternGraph, n: int) -> int:
    """Number of copies (edge subsets isomorphic to the pattern) in a complete host."""
    if pattern.has_isolated_vertices:
        raise PatternError("copy counting requires a pattern without isolated vertices")
    v = pattern.num_vertices
    if n < v:
        return 0
    falling = 1
    for i in range(v):
        falling *= n - i
    return falling // automorphism_count(pattern)


def complete_graph_edges(n: int) -> list[Edge]:
    """Edges of the complete graph on n labeled vertices, in the fixed numbering order."""
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def enumerate_copies(pattern: PatternGraph, host_edges) -> list[tuple[Edge, ...]]:
    """All edge subsets of the host isomorphic to the pattern, each listed once.

    Copies are non-induced: the host may contain extra edges among the copy's
    vertices.  Output is deterministic (sorted edge tuples, sorted list).
    """
    if pattern.has_isolated_vertices:
        raise PatternError("copy enumeration requires a pattern without isolated vertices")
    hedges = {_normalize_edge(u, v) for u, v in host_edges}
    host_vertices = sorted({w for e in hedges for w in e})
    if host_vertices and host_vertices[-1] + 1 > MAX_HOST_VERTICES:
        raise ResourceLimitError(f"host capped at {MAX_HOST_VERTICES} vertices")
    adj: dict[int, set[int]] = {w: set() for w in host_vertices}
    for u, v in hedges:
        adj[u].add(v)
        adj[v].add(u)

    pdeg = pattern.degrees()
    pattern_adj: dict[int, set[int]] = {w: set() for w in range(pattern.num_vertices)}
    for u, v in pattern.edges:
        pattern_adj[u].add(v)
        pattern_adj[v].add(u)

    # Placement order: greedy, always extending the already-placed set when possible.
    order: list[int] = []
    placed: set[int] = set()
    verts = sorted(range(pattern.num_vertices), key=lambda w: -pdeg[w])
    while len(order) < pattern.num_vertices:
        best = None
        for w in verts:
            if w in placed:
                continue
            attached = len(pattern_adj[w] & placed)
            key = (attached, pdeg[w], -w)
            if best is None or key > best[0]:
                best = (key, w)
        order.append(best[1])
        placed.add(best[1])

    copies: set[tuple[Edge, ...]] = set()
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> None:
        if i == len(order):
            copy = tuple(sorted(_normalize_edge(mapping[u], mapping[v]) for u, v in pattern.edges))
            copies.add(copy)
            return
        w = order[i]
        anchors = [x for x in pattern_adj[w] if x in mapping]
        if anchors:
            cands = set(adj[mapping[anchors[0]]])
            for x in anchors[1:]:
                cands &= adj[mapping[x]]
            cands -= used
        else:
            cands = set(host_vertices) - used
        for h in sorted(cands):
            if len(adj[h]) < pdeg[w]:
                continue
            mapping[w] = h
            used.add(h)
            extend(i + 1)
            del mapping[w]
            used.remove(h)

    if hedges and pattern.num_edges <= len(hedges):
        extend(0)
    return sorted(copies)
