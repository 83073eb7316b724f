"""Uniform host hypergraphs, patterns, and enumeration of pattern copies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import chain, combinations
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

Edge = Tuple[int, ...]


class ParameterError(ValueError):
    """Raised when an operation receives arguments outside its contract."""


def _normalize(edge: Iterable[int]) -> Edge:
    return tuple(sorted(int(v) for v in edge))


def _binomial_table(n: int, k: int) -> np.ndarray:
    table = np.zeros((n + 1, k + 1), dtype=np.int64)
    for v in range(n + 1):
        for j in range(k + 1):
            table[v, j] = math.comb(v, j)
    return table


@dataclass(eq=False)
class HostGraph:
    """A k-uniform hypergraph on vertices ``0..n-1``.

    Edges are sorted vertex tuples; an edge's position in ``edges`` is its id.
    """

    n: int
    k: int
    edges: Tuple[Edge, ...]
    complete: bool = False
    edge_index: Dict[Edge, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ParameterError(f"uniformity must be at least 2, got {self.k}")
        self.edges = tuple(_normalize(e) for e in self.edges)
        self.edge_index = {}
        for i, e in enumerate(self.edges):
            if len(set(e)) != self.k or len(e) != self.k:
                raise ParameterError(f"edge {e} does not have {self.k} distinct vertices")
            if e[0] < 0 or e[-1] >= self.n:
                raise ParameterError(f"edge {e} has a vertex outside 0..{self.n - 1}")
            if e in self.edge_index:
                raise ParameterError(f"duplicate edge {e}")
            self.edge_index[e] = i
        self._rank_lookup: Optional[np.ndarray] = None
        self._binom: Optional[np.ndarray] = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_id(self, edge: Iterable[int]) -> int:
        key = _normalize(edge)
        try:
            return self.edge_index[key]
        except KeyError:
            raise ParameterError(f"{key} is not an edge of the host") from None

    def edge_ids(self, vertex_sets: np.ndarray) -> np.ndarray:
        """Vectorized edge lookup for an ``(N, k)`` array of sorted vertex rows.

        Only available for complete hosts; entries must be strictly increasing per row.
        """
        if not self.complete:
            return np.array([self.edge_index[tuple(int(x) for x in row)] for row in vertex_sets],
                            dtype=np.int64)
        if self._rank_lookup is None:
            self._binom = _binomial_table(self.n, self.k)
            arr = np.asarray(self.edges, dtype=np.int64).reshape(-1, self.k)
            colex = self._colex(arr)
            lookup = np.empty(len(self.edges), dtype=np.int64)
            lookup[colex] = np.arange(len(self.edges))
            self._rank_lookup = lookup
        return self._rank_lookup[self._colex(np.asarray(vertex_sets, dtype=np.int64))]

    def _colex(self, rows: np.ndarray) -> np.ndarray:
        assert self._binom is not None
        rank = np.zeros(rows.shape[0], dtype=np.int64)
        for j in range(self.k):
            rank += self._binom[rows[:, j], j + 1]
        return rank


def complete_host(n: int, k: int) -> HostGraph:
    """The complete k-uniform hypergraph on ``n`` vertices, edges in lex order."""
    if k < 2 or n < k:
        raise ParameterError(f"complete host needs n >= k >= 2, got n={n}, k={k}")
    return HostGraph(n=n, k=k, edges=tuple(combinations(range(n), k)), complete=True)


@dataclass(eq=False)
class PatternGraph:
    """The forbidden pattern F as a k-uniform hypergraph on ``0..p-1``."""

    p: int
    k: int
    edges: Tuple[Edge, ...]
    name: str = ""

    def __post_init__(self) -> None:
        self.edges = tuple(sorted({_normalize(e) for e in self.edges}))
        if self.p <= self.k:
            raise ParameterError(f"pattern needs more than k={self.k} vertices, got {self.p}")
        for e in self.edges:
            if len(e) != self.k or len(set(e)) != self.k or e[0] < 0 or e[-1] >= self.p:
                raise ParameterError(f"pattern edge {e} is not a {self.k}-subset of 0..{self.p - 1}")
        covered = set(chain.from_iterable(self.edges))
        if len(covered) != self.p:
            missing = sorted(set(range(self.p)) - covered)
            raise ParameterError(f"pattern has isolated vertices {missing}")
        if not self.name:
            self.name = f"F(p={self.p},k={self.k},r={self.r})"

    @property
    def r(self) -> int:
        return len(self.edges)

    @property
    def is_complete(self) -> bool:
        return self.r == math.comb(self.p, self.k)

    def fingerprint(self) -> str:
        """Stable short identifier of the labelled edge set."""
        import hashlib

        text = f"{self.p}:{self.k}:" + ";".join(",".join(map(str, e)) for e in self.edges)
        return hashlib.sha1(text.encode()).hexdigest()[:12]


def complete_pattern(p: int, k: int = 2) -> PatternGraph:
    return PatternGraph(p=p, k=k, edges=tuple(combinations(range(p), k)),
                        name=f"K{p}" if k == 2 else f"K{p}^({k})")


def parse_pattern(spec: str, k: int = 2) -> PatternGraph:
    """``"K4"`` gives a complete pattern; anything else is read as an edge-list file."""
    if spec[:1] in "Kk" and spec[1:].isdigit():
        return complete_pattern(int(spec[1:]), k)
    n, kk, edges = read_edge_list(spec)
    return PatternGraph(p=n, k=kk, edges=tuple(edges), name=Path(spec).stem)


@dataclass(frozen=True)
class RamseyParams:
    """Integer data of an (F, q) problem: uniformity, pattern size, target colors."""

    k: int
    p: int
    r: int
    q: int

    def __post_init__(self) -> None:
        if not 1 <= self.q <= self.r:
            raise ParameterError(f"q must satisfy 1 <= q <= r={self.r}, got {self.q}")
        if self.p <= self.k:
            raise ParameterError("p must exceed k")

    @classmethod
    def from_pattern(cls, pattern: PatternGraph, q: int) -> "RamseyParams":
        return cls(k=pattern.k, p=pattern.p, r=pattern.r, q=q)

    @property
    def s(self) -> int:
        """Denominator r - q + 1 of the growth exponent."""
        return self.r - self.q + 1

    @property
    def beta(self) -> Fraction:
        return Fraction(1, 2 * (self.p - self.k))

    @property
    def non_integral(self) -> bool:
        return (self.p - self.k) % self.s != 0

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.p - self.k, self.s)


@dataclass(frozen=True)
class Copy:
    vertex_image: Tuple[int, ...]
    edge_set: Tuple[int, ...]


@dataclass(eq=False)
class CopySet:
    """All copies of a pattern in a host, with an edge -> copies inverse index.

    ``edges[i]`` lists the host edge ids of copy ``i`` in the pattern's edge order,
    ``vertices[i]`` the image of pattern vertex ``0..p-1``.
    """

    host: HostGraph
    pattern: PatternGraph
    edges: np.ndarray
    vertices: np.ndarray
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        r = self.pattern.r
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, r)
        self.vertices = np.asarray(self.vertices, dtype=np.int64).reshape(-1, self.pattern.p)
        self.indptr, self.indices = inverse_index(self.edges, self.host.num_edges)
        self._partners: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.edges.shape[0]

    def __getitem__(self, i: int) -> Copy:
        return Copy(tuple(int(v) for v in self.vertices[i]), tuple(int(e) for e in self.edges[i]))

    def __iter__(self) -> Iterator[Copy]:
        return (self[i] for i in range(len(self)))

    def containing(self, edge_id: int) -> np.ndarray:
        return self.indices[self.indptr[edge_id]:self.indptr[edge_id + 1]]

    def partner_table(self) -> np.ndarray:
        """For each incidence entry ``t`` (edge e in copy ``indices[t]``), the copy's other edges.

        Laid out in the CSR order of ``indices`` so a scan over one edge's copies is contiguous.
        """
        if self._partners is None:
            r = self.pattern.r
            order = np.argsort(self.edges.ravel(), kind="stable")
            rows, cols = order // r, order % r
            full = self.edges[rows].astype(np.int32)
            keep = np.ones(full.shape, dtype=bool)
            keep[np.arange(full.shape[0]), cols] = False
            self._partners = np.ascontiguousarray(full[keep].reshape(-1, r - 1))
        return self._partners


def inverse_index(rows: np.ndarray, num_edges: int) -> Tuple[np.ndarray, np.ndarray]:
    """CSR incidence from host edges to the rows that contain them (rows ascending)."""
    width = rows.shape[1] if rows.ndim == 2 else 1
    flat = rows.ravel()
    order = np.argsort(flat, kind="stable")
    indices = (order // max(width, 1)).astype(np.int64)
    counts = np.bincount(flat, minlength=num_edges)
    indptr = np.zeros(num_edges + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


def combinations_array(n: int, size: int) -> np.ndarray:
    count = math.comb(n, size)
    flat = np.fromiter(chain.from_iterable(combinations(range(n), size)), dtype=np.int64,
                       count=count * size)
    return flat.reshape(count, size)


def enumerate_copies(host: HostGraph, pattern: PatternGraph) -> CopySet:
    """Every subgraph of ``host`` isomorphic to ``pattern``, one entry per edge set."""
    if host.k != pattern.k:
        raise ParameterError(f"host is {host.k}-uniform but pattern is {pattern.k}-uniform")
    if pattern.p > host.n:
        return CopySet(host, pattern, np.zeros((0, pattern.r)), np.zeros((0, pattern.p)))
    if pattern.is_complete:
        return _complete_copies(host, pattern)
    return _backtrack_copies(host, pattern)


def _complete_copies(host: HostGraph, pattern: PatternGraph) -> CopySet:
    # Requiring increasing vertex images factors out all p! automorphisms.
    p = pattern.p
    if host.complete:
        vsets = combinations_array(host.n, p)
    else:
        vsets = np.array(_cliques(host, p), dtype=np.int64).reshape(-1, p)
    cols = [host.edge_ids(vsets[:, list(e)]) for e in pattern.edges]
    edges = np.stack(cols, axis=1) if cols else np.zeros((len(vsets), 0), dtype=np.int64)
    return CopySet(host, pattern, edges, vsets)


def _cliques(host: HostGraph, p: int) -> List[Tuple[int, ...]]:
    k = host.k
    out: List[Tuple[int, ...]] = []

    def extend(chosen: List[int]) -> None:
        if len(chosen) == p:
            out.append(tuple(chosen))
            return
        start = chosen[-1] + 1 if chosen else 0
        for v in range(start, host.n - (p - len(chosen)) + 1):
            if all(tuple(sorted(sub + (v,))) in host.edge_index
                   for sub in combinations(chosen, k - 1)):
                chosen.append(v)
                extend(chosen)
                chosen.pop()

    extend([])
    return out


def _backtrack_copies(host: HostGraph, pattern: PatternGraph) -> CopySet:
    p = pattern.p
    degree = [0] * p
    for e in pattern.edges:
        for v in e:
            degree[v] += 1
    order = sorted(range(p), key=lambda v: (-degree[v], v))
    position = {v: i for i, v in enumerate(order)}
    # Pattern edges checked at the step where their last vertex gets an image.
    closing: List[List[int]] = [[] for _ in range(p)]
    for idx, e in enumerate(pattern.edges):
        closing[max(position[v] for v in e)].append(idx)

    neighbours: List[set] = [set() for _ in range(host.n)]
    for e in host.edges:
        for v in e:
            neighbours[v].update(e)
    for v in range(host.n):
        neighbours[v].discard(v)

    pattern_nbrs = [set() for _ in range(p)]
    for e in pattern.edges:
        for v in e:
            pattern_nbrs[v].update(x for x in e if x != v)

    image = [-1] * p
    used = [False] * host.n
    seen: Dict[Tuple[int, ...], int] = {}
    edge_rows: List[Tuple[int, ...]] = []
    vertex_rows: List[Tuple[int, ...]] = []
    edge_ids = [0] * pattern.r

    def assign(step: int) -> None:
        if step == p:
            key = tuple(sorted(edge_ids))
            if key not in seen:
                seen[key] = len(edge_rows)
                edge_rows.append(tuple(edge_ids))
                vertex_rows.append(tuple(image))
            return
        u = order[step]
        mapped = [image[w] for w in pattern_nbrs[u] if image[w] >= 0]
        if mapped:
            pool = set(neighbours[mapped[0]])
            for w in mapped[1:]:
                pool &= neighbours[w]
            candidates = sorted(pool)
        else:
            candidates = range(host.n)
        for v in candidates:
            if used[v]:
                continue
            image[u] = v
            ok = True
            for idx in closing[step]:
                key = _normalize(image[x] for x in pattern.edges[idx])
                eid = host.edge_index.get(key)
                if eid is None:
                    ok = False
                    break
                edge_ids[idx] = eid
            if ok:
                used[v] = True
                assign(step + 1)
                used[v] = False
            image[u] = -1

    assign(0)
    return CopySet(host, pattern, np.array(edge_rows, dtype=np.int64).reshape(-1, pattern.r),
                   np.array(vertex_rows, dtype=np.int64).reshape(-1, p))


def copies_containing(index: CopySet, edge: Sequence[int]) -> List[int]:
    """Ids of the copies whose edge set contains the host edge ``edge``."""
    eid = index.host.edge_id(edge)
    return [int(i) for i in index.containing(eid)]


def read_edge_list(path) -> Tuple[int, int, List[Edge]]:
    """Parse the ``n k`` header plus one edge per line format."""
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParameterError(f"{path}: empty edge list")
    header = lines[0].split()
    if len(header) != 2:
        raise ParameterError(f"{path}: header must be 'n k'")
    n, k = int(header[0]), int(header[1])
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != k:
            raise ParameterError(f"{path}:{lineno}: expected {k} vertices")
        edges.append(_normalize(int(x) for x in parts))
    return n, k, edges


def write_edge_list(path, n: int, k: int, edges: Iterable[Sequence[int]]) -> None:
    body = [f"{n} {k}"] + [" ".join(map(str, e)) for e in edges]
    Path(path).write_text("\n".join(body) + "\n")


def load_host(path) -> HostGraph:
    n, k, edges = read_edge_list(path)
    return HostGraph(n=n, k=k, edges=tuple(edges),
                     complete=len(edges) == math.comb(n, k))
