"""Exact minimum color counts at tiny scale, plus CNF export for external solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .coloring import ListAssignment, PartialColoring
from .encoder import SizeLimitError
from .hypergraph import CopySet, HostGraph, ParameterError, PatternGraph, complete_host, enumerate_copies

DEFAULT_GUARD = 21


@dataclass
class ExactResult:
    value: int
    witness: PartialColoring
    nodes_explored: int


class _Search:
    """Depth-first edge coloring with per-copy distinct-color bookkeeping.

    A copy is abandoned as soon as its distinct colors plus its uncolored edges drop below q.
    """

    def __init__(self, host: HostGraph, index: CopySet, q: int):
        self.host = host
        self.q = q
        self.m = host.num_edges
        self.copies_of = [index.containing(e).tolist() for e in range(self.m)]
        self.n_copies = len(index)
        self.remaining = np.full(self.n_copies, index.edges.shape[1] if self.n_copies else 0)
        self.distinct = np.zeros(self.n_copies, dtype=np.int64)
        self.count: List[dict] = [dict() for _ in range(self.n_copies)]
        self.colors = np.full(self.m, -1, dtype=np.int64)
        self.nodes = 0

    def place(self, e: int, c: int) -> bool:
        ok = True
        for K in self.copies_of[e]:
            cnt = self.count[K]
            if cnt.get(c, 0) == 0:
                self.distinct[K] += 1
            cnt[c] = cnt.get(c, 0) + 1
            self.remaining[K] -= 1
            if self.distinct[K] + self.remaining[K] < self.q:
                ok = False
        self.colors[e] = c
        return ok

    def lift(self, e: int, c: int) -> None:
        for K in self.copies_of[e]:
            cnt = self.count[K]
            cnt[c] -= 1
            if cnt[c] == 0:
                self.distinct[K] -= 1
            self.remaining[K] += 1
        self.colors[e] = -1


def _guarded_host(n: int, k: int, pattern: PatternGraph, guard: int) -> Tuple[HostGraph, CopySet]:
    if pattern.k != k:
        raise ParameterError(f"pattern is {pattern.k}-uniform, host is {k}-uniform")
    if math.comb(n, k) > guard:
        raise SizeLimitError(f"C({n},{k}) = {math.comb(n, k)} edges exceeds the guard {guard}")
    host = complete_host(n, k)
    return host, enumerate_copies(host, pattern)


def exact_min_colors(n: int, k: int, pattern: PatternGraph, q: int,
                     upper_hint: Optional[int] = None, guard: int = DEFAULT_GUARD) -> ExactResult:
    """Minimum number of colors in an (F, q)-coloring of the complete k-uniform host on n vertices.

    Branch and bound over colorings in canonical order (the first edge of color i comes
    before the first edge of color i+1), so each color-class partition is visited once.
    ``upper_hint`` caps the first search; a wrong hint is detected and the search widened.
    """
    if not 1 <= q <= pattern.r:
        raise ParameterError(f"q must lie in 1..{pattern.r}")
    host, index = _guarded_host(n, k, pattern, guard)
    m = host.num_edges
    # Rainbow colorings give every copy r >= q colors, so m colors always suffice.
    limits = [m] if upper_hint is None else [min(m, upper_hint), m]
    nodes = 0
    for limit in limits:
        search = _Search(host, index, q)
        best = [limit + 1, None]

        def dfs(e: int, used: int) -> None:
            search.nodes += 1
            if used >= best[0]:
                return
            if e == m:
                best[0] = used
                best[1] = search.colors.copy()
                return
            for c in range(min(used + 1, best[0] - 1)):
                if search.place(e, c):
                    dfs(e + 1, max(used, c + 1))
                search.lift(e, c)
                if used >= best[0]:
                    return

        dfs(0, 0)
        nodes += search.nodes
        if best[1] is not None:
            return ExactResult(int(best[0]), PartialColoring(host, best[1]), nodes)
    raise AssertionError("rainbow coloring must be found")


def exact_min_colors_list(n: int, k: int, pattern: PatternGraph, q: int, lists: ListAssignment,
                          guard: int = DEFAULT_GUARD) -> Optional[PartialColoring]:
    """A list coloring of the complete host that is an (F, q)-coloring, or ``None`` if none exists."""
    host, index = _guarded_host(n, k, pattern, guard)
    if lists.host.n != n or lists.host.k != k or lists.host.num_edges != host.num_edges:
        raise ParameterError("lists do not belong to the complete host")
    table = [sorted(int(c) for c in row) for row in lists.lists]
    search = _Search(host, index, q)
    m = host.num_edges

    def dfs(e: int) -> bool:
        search.nodes += 1
        if e == m:
            return True
        for c in table[e]:
            if search.place(e, c) and dfs(e + 1):
                return True
            search.lift(e, c)
        return False

    if dfs(0):
        return PartialColoring(host, search.colors.copy())
    return None


@dataclass
class CnfDocument:
    num_vars: int
    clauses: List[List[int]]
    comments: List[str] = field(default_factory=list)

    def to_dimacs(self) -> str:
        lines = [f"c {c}" for c in self.comments]
        lines.append(f"p cnf {self.num_vars} {len(self.clauses)}")
        lines.extend(" ".join(map(str, cl)) + " 0" for cl in self.clauses)
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_dimacs())


def _at_most(lits: Sequence[int], bound: int, next_var: int, clauses: List[List[int]]) -> int:
    """Sequential-counter encoding of sum(lits) <= bound; returns the next free variable.

    Register ``s[i][j]`` (variable ``next_var + i * bound + j``) means at least j+1 of the
    first i+1 literals are true.
    """
    n = len(lits)
    if bound >= n:
        return next_var
    if bound == 0:
        clauses.extend([-x] for x in lits)
        return next_var

    def s(i: int, j: int) -> int:
        return next_var + i * bound + j

    clauses.append([-lits[0], s(0, 0)])
    for j in range(1, bound):
        clauses.append([-s(0, j)])
    for i in range(1, n - 1):
        clauses.append([-lits[i], s(i, 0)])
        clauses.append([-s(i - 1, 0), s(i, 0)])
        for j in range(1, bound):
            clauses.append([-lits[i], -s(i - 1, j - 1), s(i, j)])
            clauses.append([-s(i - 1, j), s(i, j)])
        clauses.append([-lits[i], -s(i - 1, bound - 1)])
    clauses.append([-lits[n - 1], -s(n - 2, bound - 1)])
    return next_var + (n - 1) * bound


def export_cnf(n: int, k: int, pattern: PatternGraph, q: int, t: int,
               lists: Optional[ListAssignment] = None,
               symmetry: Optional[bool] = None) -> CnfDocument:
    """CNF that is satisfiable iff an (F, q)-coloring with colors ``0..t-1`` (within lists) exists.

    ``symmetry`` (default: on without lists) adds value-precedence clauses: color c > 0 may
    appear on edge e only if c - 1 appears on an earlier edge.  Relabeling colors by first
    occurrence shows this keeps satisfiability for a shared palette; lists break that
    symmetry, so it is refused with lists.
    """
    if t < 1:
        raise ParameterError("palette size must be at least 1")
    host = complete_host(n, k)
    index = enumerate_copies(host, pattern)
    m, N = host.num_edges, len(index)
    if lists is not None and lists.lists.shape[0] != m:
        raise ParameterError("lists do not belong to the complete host")
    if symmetry is None:
        symmetry = lists is None
    if symmetry and lists is not None:
        raise ParameterError("color symmetry breaking is unsound with lists")

    def x(e: int, c: int) -> int:
        return 1 + e * t + c

    def y(K: int, c: int) -> int:
        return 1 + m * t + K * t + c

    clauses: List[List[int]] = []
    for e in range(m):
        clauses.append([x(e, c) for c in range(t)])
        for a in range(t):
            for b in range(a + 1, t):
                clauses.append([-x(e, a), -x(e, b)])
        if lists is not None:
            allowed = set(int(c) for c in lists.lists[e])
            clauses.extend([-x(e, c)] for c in range(t) if c not in allowed)
        if symmetry:
            for c in range(1, t):
                clauses.append([-x(e, c)] + [x(f, c - 1) for f in range(e)])
    next_var = 1 + m * t + N * t
    for K in range(N):
        edges = index.edges[K].tolist()
        for c in range(t):
            clauses.append([-y(K, c)] + [x(e, c) for e in edges])
            clauses.extend([y(K, c), -x(e, c)] for e in edges)
        if q > t:
            clauses.append([])
            continue
        # At least q of the y's true, i.e. at most t - q of them false.
        next_var = _at_most([-y(K, c) for c in range(t)], t - q, next_var, clauses)
    num_vars = next_var - 1
    aux = num_vars - m * t - N * t
    comments = [
        f"(F,q)-coloring of K_{n}^({k}), F with p={pattern.p} r={pattern.r}, q={q}, colors 0..{t - 1}",
        f"edges {m}, copies {N}, edge vars {m * t}, usage vars {N * t}, counter vars {aux}",
        f"x(e,c) = 1 + e*{t} + c for edge id e in lex order of vertex tuples",
        f"y(K,c) = {1 + m * t} + K*{t} + c for copy id K; y(K,c) <-> OR of x(e,c) over e in K",
        f"counter registers from {1 + m * t + N * t}, (t-1)*(t-q) per copy, copies in order",
    ]
    if lists is not None:
        comments.append("list restrictions as unit clauses -x(e,c) for c not in L(e)")
    if symmetry:
        comments.append("value precedence: -x(e,c) or x(f,c-1) for some f < e, for c >= 1")
    return CnfDocument(num_vars, clauses, comments)
