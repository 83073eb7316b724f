"""Edge colorings, list assignments and the (F, q)-coloring verifier.

The verifier is the ground truth that every constructive method is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .hypergraph import Copy, CopySet, Edge, HostGraph, ParameterError, PatternGraph

UNCOLORED = -1


class PartialColoring:
    """A partial map from host edges to nonnegative integer colors.

    Stored as an int array indexed by edge id; ``UNCOLORED`` marks missing entries.
    """

    def __init__(self, host: HostGraph, colors: Optional[np.ndarray] = None):
        self.host = host
        if colors is None:
            colors = np.full(host.num_edges, UNCOLORED, dtype=np.int64)
        colors = np.asarray(colors, dtype=np.int64)
        if colors.shape != (host.num_edges,):
            raise ParameterError("color array length must equal the number of host edges")
        if (colors < UNCOLORED).any():
            raise ParameterError("colors must be nonnegative integers")
        self.colors = colors

    @classmethod
    def from_mapping(cls, host: HostGraph, mapping: Mapping[Sequence[int], int]) -> "PartialColoring":
        phi = cls(host)
        for edge, c in mapping.items():
            if c < 0:
                raise ParameterError(f"color {c} is negative")
            phi.colors[host.edge_id(edge)] = int(c)
        return phi

    def __getitem__(self, edge: Sequence[int]) -> int:
        c = int(self.colors[self.host.edge_id(edge)])
        if c == UNCOLORED:
            raise KeyError(tuple(edge))
        return c

    def __setitem__(self, edge: Sequence[int], color: int) -> None:
        self.colors[self.host.edge_id(edge)] = int(color)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, PartialColoring) and other.host is self.host
                and np.array_equal(other.colors, self.colors))

    def __repr__(self) -> str:
        done = int((self.colors != UNCOLORED).sum())
        return f"PartialColoring({done}/{self.host.num_edges} edges colored)"

    @property
    def is_total(self) -> bool:
        return bool((self.colors != UNCOLORED).all())

    def copy(self) -> "PartialColoring":
        return PartialColoring(self.host, self.colors.copy())

    def as_dict(self) -> Dict[Edge, int]:
        return {self.host.edges[i]: int(c) for i, c in enumerate(self.colors) if c != UNCOLORED}

    def color_classes(self) -> Dict[int, List[int]]:
        classes: Dict[int, List[int]] = {}
        for i, c in enumerate(self.colors.tolist()):
            if c != UNCOLORED:
                classes.setdefault(c, []).append(i)
        return classes


@dataclass
class ListAssignment:
    """Equal-size color lists, row ``i`` of ``lists`` belonging to host edge ``i``."""

    host: HostGraph
    lists: np.ndarray

    def __post_init__(self) -> None:
        self.lists = np.asarray(self.lists, dtype=np.int64)
        if self.lists.ndim != 2 or self.lists.shape[0] != self.host.num_edges:
            raise ParameterError("every host edge needs exactly one list")
        if self.lists.shape[1] < 1:
            raise ParameterError("lists must be nonempty")
        ordered = np.sort(self.lists, axis=1)
        if (np.diff(ordered, axis=1) == 0).any():
            raise ParameterError("a list contains a repeated color")
        if (self.lists < 0).any():
            raise ParameterError("colors must be nonnegative")

    @property
    def T(self) -> int:
        return self.lists.shape[1]

    def __getitem__(self, edge: Sequence[int]) -> FrozenSet[int]:
        return frozenset(int(c) for c in self.lists[self.host.edge_id(edge)])

    def palette(self) -> List[int]:
        return sorted(set(int(c) for c in np.unique(self.lists)))

    def respects(self, phi: PartialColoring) -> bool:
        colored = phi.colors != UNCOLORED
        hit = (self.lists == phi.colors[:, None]).any(axis=1)
        return bool(hit[colored].all())

    @classmethod
    def from_mapping(cls, host: HostGraph, mapping: Mapping[Sequence[int], Iterable[int]]) -> "ListAssignment":
        rows: List[Optional[List[int]]] = [None] * host.num_edges
        for edge, colors in mapping.items():
            rows[host.edge_id(edge)] = sorted(int(c) for c in colors)
        if any(r is None for r in rows):
            raise ParameterError("every host edge needs a list")
        sizes = {len(r) for r in rows}  # type: ignore[arg-type]
        if len(sizes) != 1:
            raise ParameterError(f"lists must share one size, got sizes {sorted(sizes)}")
        return cls(host, np.array(rows, dtype=np.int64))


def make_lists(host: HostGraph, T: int, mode: str = "shared", seed: int = 0,
               pool_size: Optional[int] = None) -> ListAssignment:
    """Build a size-``T`` list assignment.

    ``mode`` is ``"shared"`` (every edge gets ``0..T-1``), ``"disjoint"`` (edge ``i`` gets
    ``iT..iT+T-1``) or ``"random"`` (``T`` distinct colors drawn per edge from
    ``0..pool_size-1``).
    """
    if T < 1:
        raise ParameterError(f"list size must be positive, got {T}")
    m = host.num_edges
    if mode == "shared":
        lists = np.tile(np.arange(T, dtype=np.int64), (m, 1))
    elif mode == "disjoint":
        lists = np.arange(m * T, dtype=np.int64).reshape(m, T)
    elif mode == "random":
        if pool_size is None or pool_size < T:
            raise ParameterError(f"pool size {pool_size} is smaller than list size {T}")
        rng = np.random.default_rng(seed)
        keys = rng.random((m, pool_size))
        lists = np.sort(np.argsort(keys, axis=1)[:, :T], axis=1).astype(np.int64)
    else:
        raise ParameterError(f"unknown list mode {mode!r}")
    return ListAssignment(host, lists)


def distinct_per_row(values: np.ndarray) -> np.ndarray:
    """Number of distinct entries in each row of a 2-D int array."""
    width = values.shape[1]
    if width == 0:
        return np.zeros(values.shape[0], dtype=np.int64)
    if width > 12:
        ordered = np.sort(values, axis=1)
        return 1 + (np.diff(ordered, axis=1) != 0).sum(axis=1)
    cols = [values[:, j] for j in range(width)]
    count = np.ones(values.shape[0], dtype=np.int64)
    for j in range(1, width):
        fresh = cols[j] != cols[0]
        for i in range(1, j):
            fresh &= cols[j] != cols[i]
        count += fresh
    return count


@dataclass
class ViolationReport:
    violations: List[Tuple[int, int]]

    @property
    def valid(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)


def copy_color_counts(phi: PartialColoring, index: CopySet, chunk: int = 1 << 18) -> np.ndarray:
    counts = np.empty(len(index), dtype=np.int64)
    for lo in range(0, len(index), chunk):
        hi = min(lo + chunk, len(index))
        counts[lo:hi] = distinct_per_row(phi.colors[index.edges[lo:hi]])
    return counts


def verify_coloring(host: HostGraph, pattern: PatternGraph, q: int, phi: PartialColoring,
                    index: CopySet) -> ViolationReport:
    """Report every copy of the pattern that sees at most ``q - 1`` colors under ``phi``."""
    if index.host is not host or index.pattern is not pattern:
        raise ParameterError("copy index was built for a different host or pattern")
    if phi.host is not host:
        raise ParameterError("coloring belongs to a different host")
    if not phi.is_total:
        raise ParameterError("verification needs a total coloring")
    counts = copy_color_counts(phi, index)
    bad = np.flatnonzero(counts <= q - 1)
    return ViolationReport([(int(i), int(counts[i])) for i in bad])


def colors_on_copy(phi: PartialColoring, copy: Copy) -> Set[int]:
    colors = phi.colors[list(copy.edge_set)]
    if (colors == UNCOLORED).any():
        raise ParameterError("copy has an uncolored edge")
    return set(int(c) for c in colors)


def colors_used(phi: PartialColoring) -> int:
    """Number of distinct colors in the image of a total coloring."""
    return int(np.unique(phi.colors[phi.colors != UNCOLORED]).size)


def write_witness(path, phi: PartialColoring) -> None:
    """One line per colored edge: its vertices followed by the color."""
    lines = [" ".join(map(str, e)) + f" {int(c)}"
             for e, c in zip(phi.host.edges, phi.colors.tolist()) if c != UNCOLORED]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_witness(host: HostGraph, path) -> PartialColoring:
    phi = PartialColoring(host)
    for lineno, ln in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = ln.split()
        if not parts:
            continue
        if len(parts) != host.k + 1:
            raise ParameterError(f"{path}:{lineno}: expected {host.k} vertices and a color")
        *vs, c = (int(x) for x in parts)
        phi[vs] = c
    return phi
