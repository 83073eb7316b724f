"""Forbidden-submatching encoding of (F, q)-coloring.

A coloring is a matching of the bipartite instance J whose A-side is the host edge set
and whose B-side holds the (edge, color) pairs allowed by the lists.  Submatchings are
scored by an integer-scaled potential

    rho_hat(M) = (p - k) * (|M| - |C(M)|) - (|V(M)| - k) * (r - q + 1),

and the configuration hypergraph H consists of the inclusion-minimal matchings of size
at least two that sit inside one copy of F and have ``rho_hat >= 0``.  Every copy seeing
at most ``q - 1`` colors has ``rho_hat >= 0``, so an H-avoiding total matching is a valid
coloring.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from ._kernels import tracker_blockers, tracker_conflicts, tracker_first_free, tracker_shift
from .coloring import ListAssignment, PartialColoring, UNCOLORED
from .hypergraph import (CopySet, HostGraph, ParameterError, PatternGraph, RamseyParams,
                         combinations_array, inverse_index)

Pair = Tuple[int, int]  # (host edge id, color)


class SizeLimitError(RuntimeError):
    """An enumeration exceeded its configured ceiling."""


@dataclass
class BipartiteInstance:
    """J = (A, B): A-vertices are host edge ids, B-vertices the pairs ``(edge id, color)``.

    The J-edge ``{e, (e, c)}`` is identified with the pair itself.
    """

    host: HostGraph
    pairs: np.ndarray  # (|B|, 2)

    @property
    def num_a(self) -> int:
        return self.host.num_edges

    @property
    def num_b(self) -> int:
        return self.pairs.shape[0]

    def a_degrees(self) -> np.ndarray:
        return np.bincount(self.pairs[:, 0], minlength=self.host.num_edges)

    def b_degrees(self) -> np.ndarray:
        # Each B-vertex (e, c) lies only in the J-edge {e, (e, c)}.
        _, counts = np.unique(self.pairs, axis=0, return_counts=True)
        return counts


def build_instance(host: HostGraph, lists: ListAssignment) -> BipartiteInstance:
    if lists.host is not host:
        raise ParameterError("list assignment belongs to a different host")
    table = lists.lists
    eids = np.repeat(np.arange(host.num_edges, dtype=np.int64), table.shape[1])
    return BipartiteInstance(host, np.stack([eids, table.ravel()], axis=1))


@dataclass(frozen=True)
class BudgetParameters:
    T: int
    D: Fraction
    beta: Fraction
    C: float


def budget(n: int, params: RamseyParams, C: float) -> BudgetParameters:
    """List size ceil(C (n^(p-k) / ln n)^(1/s)) with D = T/2 kept exact."""
    if n < 3:
        raise ParameterError("budget needs n >= 3 so that ln n > 1")
    if C <= 0:
        raise ParameterError("C must be positive")
    T = math.ceil(C * (n ** (params.p - params.k) / math.log(n)) ** (1 / params.s))
    return BudgetParameters(T=T, D=Fraction(T, 2), beta=params.beta, C=C)


def potential_from_counts(m: int, v: int, l: int, params: RamseyParams) -> int:
    return (params.p - params.k) * (m - l) - (v - params.k) * params.s


def _as_pairs(host: HostGraph, M) -> List[Pair]:
    items = M.items() if hasattr(M, "items") else M
    pairs = [(host.edge_id(e), int(c)) for e, c in items]
    if len({e for e, _ in pairs}) != len(pairs):
        raise ParameterError("not a matching: a host edge appears twice")
    return pairs


def _counts(host: HostGraph, pairs: Sequence[Pair]) -> Tuple[int, int, int]:
    vertices: Set[int] = set()
    for e, _ in pairs:
        vertices.update(host.edges[e])
    return len(pairs), len(vertices), len({c for _, c in pairs})


def scaled_potential(host: HostGraph, M, params: RamseyParams) -> int:
    """``rho_hat(M)`` for a matching given as ``(edge, color)`` pairs or an edge->color map.

    An empty matching is treated as spanning exactly k vertices (potential 0).
    """
    pairs = _as_pairs(host, M)
    if not pairs:
        return 0
    return potential_from_counts(*_counts(host, pairs), params)


@dataclass(frozen=True)
class IndexSet:
    triples: FrozenSet[Tuple[int, int, int]]

    def __len__(self) -> int:
        return len(self.triples)

    def __contains__(self, triple) -> bool:
        return tuple(triple) in self.triples

    def __iter__(self):
        return iter(sorted(self.triples))

    @property
    def min_m_minus_l(self) -> Optional[int]:
        return min((m - l for m, _, l in self.triples), default=None)


def index_triples(params: RamseyParams) -> IndexSet:
    """Feasible (size, spanned vertices, colors) triples of forbidden configurations."""
    k, p, r, s = params.k, params.p, params.r, params.s
    out = set()
    for m in range(2, r + 1):
        for v in range(k + 1, p + 1):
            for l in range(1, r + 1):
                if (p - k) * m >= (p - k) * l + (v - k) * s:
                    out.add((m, v, l))
    assert all(m > l for m, _, l in out)
    return IndexSet(frozenset(out))


def witness_copy(index: CopySet, edge_ids: Iterable[int]) -> Optional[int]:
    """Lowest copy id whose edge set contains all of ``edge_ids``."""
    ids = list(edge_ids)
    if not ids:
        return 0 if len(index) else None
    common = set(index.containing(ids[0]).tolist())
    for e in ids[1:]:
        common.intersection_update(index.containing(e).tolist())
        if not common:
            return None
    return min(common) if common else None


def _subset_potentials(host: HostGraph, pairs: Sequence[Pair], params: RamseyParams):
    """Yield ``(mask, rho_hat)`` over all subsets of size >= 2."""
    m = len(pairs)
    for size in range(2, m + 1):
        for combo in combinations(range(m), size):
            sub = [pairs[i] for i in combo]
            yield combo, potential_from_counts(*_counts(host, sub), params)


def is_forbidden(M, index: CopySet, params: RamseyParams) -> bool:
    """Whether the matching ``M`` is an edge of the configuration hypergraph H."""
    host = index.host
    pairs = _as_pairs(host, M)
    if len(pairs) < 2:
        return False
    if witness_copy(index, (e for e, _ in pairs)) is None:
        return False
    if potential_from_counts(*_counts(host, pairs), params) < 0:
        return False
    full = len(pairs)
    return all(rho <= -1 for combo, rho in _subset_potentials(host, pairs, params)
               if len(combo) < full)


def spans_forbidden(phi: PartialColoring, index: CopySet, params: RamseyParams,
                    copy_ids: Optional[Iterable[int]] = None) -> bool:
    """Whether the colored part of ``phi`` contains an edge of H (inside the given copies).

    Any matching with ``rho_hat >= 0`` and size >= 2 inside a copy contains a minimal one,
    so the scan only looks for nonnegative-potential subsets.
    """
    host = index.host
    rows = range(len(index)) if copy_ids is None else copy_ids
    for ci in rows:
        colored = [(int(e), int(phi.colors[e])) for e in index.edges[ci]
                   if phi.colors[e] != UNCOLORED]
        if len(colored) < 2:
            continue
        if any(rho >= 0 for _, rho in _subset_potentials(host, colored, params)):
            return True
    return False


def conflicts_with(current: PartialColoring, candidate: Tuple[Sequence[int], int],
                   index: CopySet, params: RamseyParams) -> bool:
    """Whether adding ``candidate = (edge, color)`` to an H-avoiding ``current`` spans H.

    Brute force: for every copy through the edge, score each subset of its colored edges
    together with the candidate.
    """
    host = index.host
    edge, color = candidate
    eid = host.edge_id(edge)
    if current.colors[eid] != UNCOLORED:
        raise ParameterError(f"edge {tuple(edge)} is already colored")
    cand = (eid, int(color))
    for ci in index.containing(eid).tolist():
        others = [(int(f), int(current.colors[f])) for f in index.edges[ci]
                  if f != eid and current.colors[f] != UNCOLORED]
        for size in range(1, len(others) + 1):
            for sub in combinations(others, size):
                M = list(sub) + [cand]
                if potential_from_counts(*_counts(host, M), params) >= 0:
                    return True
    return False


@dataclass(frozen=True)
class ForbiddenConfig:
    members: Tuple[Pair, ...]
    witness_copy: int
    triple: Tuple[int, int, int]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class ConfigurationHypergraph:
    host: HostGraph
    configs: List[ForbiddenConfig]

    def __len__(self) -> int:
        return len(self.configs)

    def by_triple(self) -> Dict[Tuple[int, int, int], List[ForbiddenConfig]]:
        groups: Dict[Tuple[int, int, int], List[ForbiddenConfig]] = defaultdict(list)
        for cfg in self.configs:
            groups[cfg.triple].append(cfg)
        return dict(groups)

    def of_size(self, m: int) -> List[ForbiddenConfig]:
        return [c for c in self.configs if c.size == m]

    def dump(self, path) -> None:
        """One config per line: ``m v l | e:color ... | copy-id``, lexicographic order."""
        host = self.host

        def key(cfg: ForbiddenConfig):
            return tuple((host.edges[e], c) for e, c in cfg.members)

        lines = []
        for cfg in sorted(self.configs, key=key):
            m, v, l = cfg.triple
            body = " ".join(",".join(map(str, host.edges[e])) + f":{c}" for e, c in cfg.members)
            lines.append(f"{m} {v} {l} | {body} | {cfg.witness_copy}")
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def _restricted_growth(m: int, max_blocks: int) -> List[Tuple[int, ...]]:
    out: List[Tuple[int, ...]] = []

    def grow(prefix: List[int], top: int) -> None:
        if len(prefix) == m:
            out.append(tuple(prefix))
            return
        for b in range(min(top + 2, max_blocks)):
            prefix.append(b)
            grow(prefix, max(top, b))
            prefix.pop()

    grow([0], 0)
    return out


def _partition_tables(m: int, max_blocks: int):
    """Set partitions of m items with per-mask block counts, shape (#partitions, 2^m)."""
    parts = _restricted_growth(m, max_blocks)
    nmask = 1 << m
    blocks = np.zeros((len(parts), nmask), dtype=np.int64)
    for pi, rgs in enumerate(parts):
        for mask in range(1, nmask):
            blocks[pi, mask] = len({rgs[i] for i in range(m) if mask >> i & 1})
    return parts, blocks


def enumerate_H(host: HostGraph, palette: Sequence[int], index: CopySet, params: RamseyParams,
                size_cap: Optional[int] = None, max_configs: int = 2_000_000) -> ConfigurationHypergraph:
    """Materialize every forbidden configuration with at most ``size_cap`` members.

    Colors range over ``palette`` for every edge.  Intended for small hosts only; raises
    ``SizeLimitError`` once more than ``max_configs`` configurations are produced.
    """
    palette = sorted(set(int(c) for c in palette))
    cap = params.r if size_cap is None else min(size_cap, params.r)
    k, pk, s = params.k, params.p - params.k, params.s

    first_copy: Dict[Tuple[int, ...], int] = {}
    for ci in range(len(index)):
        row = sorted(int(e) for e in index.edges[ci])
        for m in range(2, cap + 1):
            for sub in combinations(row, m):
                first_copy.setdefault(sub, ci)

    tables = {m: _partition_tables(m, len(palette)) for m in range(2, cap + 1)} if palette else {}
    popcount = {m: np.array([bin(x).count("1") for x in range(1 << m)]) for m in range(2, cap + 1)}
    configs: List[ForbiddenConfig] = []
    for sub in sorted(first_copy):
        m = len(sub)
        if m not in tables:
            continue
        parts, blocks = tables[m]
        vcount = np.zeros(1 << m, dtype=np.int64)
        for mask in range(1, 1 << m):
            vs: Set[int] = set()
            for i in range(m):
                if mask >> i & 1:
                    vs.update(host.edges[sub[i]])
            vcount[mask] = len(vs)
        rho = pk * (popcount[m][None, :] - blocks) - s * (vcount[None, :] - k)
        full = (1 << m) - 1
        proper = np.array([0 < x < full and popcount[m][x] >= 2 for x in range(1 << m)])
        ok = (rho[:, full] >= 0) & (rho[:, proper] <= -1).all(axis=1)
        for pi in np.flatnonzero(ok):
            rgs = parts[pi]
            l = int(blocks[pi, full])
            triple = (m, int(vcount[full]), l)
            for colors in permutations(palette, l):
                members = tuple((sub[i], colors[rgs[i]]) for i in range(m))
                configs.append(ForbiddenConfig(members, first_copy[sub], triple))
            if len(configs) > max_configs:
                raise SizeLimitError(f"more than {max_configs} forbidden configurations")
    return ConfigurationHypergraph(host, configs)


@dataclass
class RegionGroup:
    """Edge sets of equal size and vertex count that a forbidden matching can occupy."""

    edges: np.ndarray
    width: int
    need: int
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    def rows(self, eid: int) -> np.ndarray:
        return self.indices[self.indptr[eid]:self.indptr[eid + 1]]


def build_regions(host: HostGraph, pattern: PatternGraph, params: RamseyParams,
                  index: Optional[CopySet] = None) -> List[RegionGroup]:
    """Regions are the edge sets induced inside a copy by a subset of its vertices.

    Among matchings with a fixed vertex span, taking every colored edge of the span
    maximizes ``|M| - |C(M)|``, so testing regions is equivalent to testing all subsets.
    """
    k, pk, s = params.k, params.p - params.k, params.s
    raw: Dict[Tuple[int, int], np.ndarray] = {}
    if host.n < pattern.p:
        return []
    if pattern.is_complete and host.complete:
        for w in range(k + 1, pattern.p + 1):
            subsets = list(combinations(range(w), k))
            if w == pattern.p and index is not None:
                raw[(len(subsets), w)] = index.edges
                continue
            W = combinations_array(host.n, w)
            raw[(len(subsets), w)] = np.stack([host.edge_ids(W[:, list(sub)]) for sub in subsets], axis=1)
    else:
        if index is None:
            from .hypergraph import enumerate_copies
            index = enumerate_copies(host, pattern)
        local: List[Tuple[Tuple[int, ...], int]] = []
        for size in range(k + 1, pattern.p + 1):
            for U in combinations(range(pattern.p), size):
                pos = tuple(i for i, e in enumerate(pattern.edges) if set(e) <= set(U))
                if len(pos) >= 2:
                    span = len(set().union(*(pattern.edges[i] for i in pos)))
                    local.append((pos, span))
        seen: Dict[Tuple[int, ...], int] = {}
        for row in index.edges.tolist():
            for pos, span in local:
                key = tuple(sorted(row[i] for i in pos))
                seen.setdefault(key, span)
        buckets: Dict[Tuple[int, int], List[Tuple[int, ...]]] = defaultdict(list)
        for key, span in seen.items():
            buckets[(len(key), span)].append(key)
        raw = {kw: np.array(rows, dtype=np.int64) for kw, rows in buckets.items()}

    groups = []
    for (size, w), edges in sorted(raw.items()):
        need = -(-s * (w - k) // pk)
        if need > size - 1 or edges.shape[0] == 0:
            continue
        indptr, indices = inverse_index(edges, host.num_edges)
        groups.append(RegionGroup(edges, w, need, indptr, indices))
    return groups


class ConflictTracker:
    """Incremental form of ``conflicts_with`` for a growing matching.

    For every region it keeps the excess ``#colored edges - #distinct colors``; adding
    ``(e, c)`` raises the excess of a region through ``e`` exactly when ``c`` already occurs
    there, and a region fires when ``(p - k) * excess >= s * (width - k)``.
    """

    def __init__(self, host: HostGraph, pattern: PatternGraph, params: RamseyParams,
                 index: Optional[CopySet] = None, groups: Optional[List[RegionGroup]] = None):
        self.host = host
        self.params = params
        self.groups = groups if groups is not None else build_regions(host, pattern, params, index)
        self.colors = np.full(host.num_edges, UNCOLORED, dtype=np.int64)
        # All groups stacked into one padded table; ``excess`` holds per-group views of it.
        width = max((g.edges.shape[1] for g in self.groups), default=1)
        total = sum(g.edges.shape[0] for g in self.groups)
        self._edges = np.full((total, width), -1, dtype=np.int64)
        self._need = np.empty(total, dtype=np.int32)
        self._excess = np.zeros(total, dtype=np.int32)
        self.excess: List[np.ndarray] = []
        start = 0
        for g in self.groups:
            stop = start + g.edges.shape[0]
            self._edges[start:stop, :g.edges.shape[1]] = g.edges
            self._need[start:stop] = g.need
            self.excess.append(self._excess[start:stop])
            start = stop
        rows, cols = np.nonzero(self._edges >= 0)
        flat = self._edges[rows, cols]
        order = np.argsort(flat, kind="stable")
        self._indices = rows[order].astype(np.int64)
        self._indptr = np.zeros(host.num_edges + 1, dtype=np.int64)
        np.cumsum(np.bincount(flat, minlength=host.num_edges), out=self._indptr[1:])

    def reset(self) -> None:
        self.colors.fill(UNCOLORED)
        self._excess.fill(0)

    def _firing(self, gi: int, eid: int, color: int) -> np.ndarray:
        g = self.groups[gi]
        rows = g.rows(eid)
        tight = rows[self.excess[gi][rows] >= g.need - 1]
        if tight.size == 0:
            return tight
        present = (self.colors[g.edges[tight]] == color).any(axis=1)
        return tight[present]

    def conflicts(self, eid: int, color: int) -> bool:
        return bool(tracker_conflicts(eid, color, self._indptr, self._indices, self._edges,
                                      self._need, self._excess, self.colors))

    def first_free(self, eid: int, candidates: np.ndarray) -> int:
        """First color of ``candidates`` that does not conflict at ``eid``, or -1."""
        return int(tracker_first_free(eid, candidates.astype(np.int64, copy=False), self._indptr,
                                      self._indices, self._edges, self._need, self._excess,
                                      self.colors))

    def blockers(self, eid: int, color: int) -> Set[int]:
        """Colored edges whose removal makes ``(eid, color)`` conflict-free."""
        return set(tracker_blockers(eid, color, self._indptr, self._indices, self._edges,
                                    self._need, self._excess, self.colors).tolist())

    def assign(self, eid: int, color: int) -> None:
        if self.colors[eid] != UNCOLORED:
            raise ParameterError("edge already colored")
        tracker_shift(eid, color, 1, self._indptr, self._indices, self._edges, self._excess,
                      self.colors)
        self.colors[eid] = color

    def unassign(self, eid: int) -> None:
        color = int(self.colors[eid])
        if color == UNCOLORED:
            raise ParameterError("edge is not colored")
        self.colors[eid] = UNCOLORED
        tracker_shift(eid, color, -1, self._indptr, self._indices, self._edges, self._excess,
                      self.colors)

    def coloring(self) -> PartialColoring:
        return PartialColoring(self.host, self.colors.copy())
