"""Randomized greedy construction of an H-avoiding perfect matching of J.

Edges are colored one at a time from their lists, and a color is accepted only if the
partial coloring stays H-avoiding.  When an edge has no admissible color left, a bounded
number of kicks uncolor the edges blocking one of its colors and put them back in the
queue.  Exhausting the kicks of an edge starts a fresh pass.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .coloring import ListAssignment, PartialColoring, UNCOLORED, colors_used
from .encoder import ConflictTracker, spans_forbidden
from .hypergraph import CopySet, Edge, HostGraph, ParameterError, PatternGraph, RamseyParams
from .lll import moser_tardos_color

ORDERS = ("random-edge-permutation", "random-pair-stream")

__all__ = ["GreedyConfig", "GreedyFailure", "GreedyResult", "greedy_color", "colors_used"]


@dataclass
class GreedyConfig:
    """Knobs of the greedy engine.

    ``max_restarts`` is the total number of passes; ``max_retries_per_edge`` bounds the kicks
    an edge may trigger within one pass.
    """

    order: str = "random-edge-permutation"
    max_retries_per_edge: int = 8
    max_restarts: int = 5
    seed: int = 0
    repair: bool = False
    debug: bool = False

    def __post_init__(self) -> None:
        if self.order not in ORDERS:
            raise ParameterError(f"order must be one of {ORDERS}, got {self.order!r}")
        if self.max_retries_per_edge < 1 or self.max_restarts < 1:
            raise ParameterError("retry and restart limits must be positive")


@dataclass
class GreedyFailure:
    edge: Edge
    colors: List[int]
    conflicting_copies: Dict[int, List[int]]


@dataclass
class GreedyResult:
    coloring: PartialColoring
    success: bool
    passes: int
    kicks: int
    failure: Optional[GreedyFailure] = None
    repaired: bool = False
    stats: Dict[str, int] = field(default_factory=dict)


class _LoopInvariantError(AssertionError):
    pass


def _diagnose(tracker: ConflictTracker, index: CopySet, eid: int, colors: List[int],
              limit: int = 10) -> GreedyFailure:
    # Map every firing region back to the copies that contain it.
    found: Dict[int, List[int]] = {}
    for c in colors:
        ids: set = set()
        for gi, g in enumerate(tracker.groups):
            for row in tracker._firing(gi, eid, c).tolist():
                common = set(index.containing(eid).tolist())
                for f in g.edges[row].tolist():
                    common &= set(index.containing(f).tolist())
                ids.update(common)
                if len(ids) >= limit:
                    break
        found[c] = sorted(ids)[:limit]
    return GreedyFailure(tracker.host.edges[eid], colors, found)


def _kick(tracker: ConflictTracker, rng: np.random.Generator, eid: int,
          row: np.ndarray) -> List[int]:
    """Color ``eid`` with the list color that has the fewest blockers; return the evicted edges."""
    best: Optional[Tuple[int, float, int, List[int]]] = None
    for c in row.tolist():
        blk = sorted(tracker.blockers(eid, c))
        key = (len(blk), rng.random())
        if best is None or key < best[:2]:
            best = (key[0], key[1], c, blk)
    assert best is not None
    _, _, c, evicted = best
    for f in evicted:
        tracker.unassign(f)
    if tracker.conflicts(eid, c):
        raise _LoopInvariantError("removing the blockers did not clear the conflict")
    tracker.assign(eid, c)
    return evicted


def _try_color(tracker: ConflictTracker, rng: np.random.Generator, eid: int,
               row: np.ndarray) -> bool:
    c = tracker.first_free(eid, rng.permutation(row))
    if c < 0:
        return False
    tracker.assign(eid, c)
    return True


def greedy_color(host: HostGraph, pattern: PatternGraph, q: int, lists: ListAssignment,
                 index: CopySet, params: RamseyParams, cfg: Optional[GreedyConfig] = None,
                 tracker: Optional[ConflictTracker] = None) -> GreedyResult:
    """Build a total list coloring that spans no forbidden configuration, or report failure.

    A passed ``tracker`` (built for the same host, pattern and params) is reused to avoid
    rebuilding the region tables between calls.
    """
    cfg = cfg or GreedyConfig()
    if lists.host is not host or index.host is not host:
        raise ParameterError("lists and copy index must belong to the host")
    if params.q != q or params.p != pattern.p or params.r != pattern.r:
        raise ParameterError("params do not match the pattern and q")
    rng = np.random.default_rng(cfg.seed)
    if tracker is None:
        tracker = ConflictTracker(host, pattern, params, index)
    table = lists.lists
    m = host.num_edges
    total_kicks = 0
    stuck = -1

    for attempt in range(1, cfg.max_restarts + 1):
        tracker.reset()
        retries = np.zeros(m, dtype=np.int64)
        if cfg.order == "random-edge-permutation":
            queue = deque(rng.permutation(m).tolist())
        else:
            # Offer all (edge, color) pairs in random order; whatever is left uncolored is
            # queued for the kick phase.
            flat = rng.permutation(m * table.shape[1])
            for pos in flat.tolist():
                eid, j = divmod(pos, table.shape[1])
                if tracker.colors[eid] == UNCOLORED and not tracker.conflicts(eid, int(table[eid, j])):
                    tracker.assign(eid, int(table[eid, j]))
                    if cfg.debug:
                        _check_invariant(tracker, index, params)
            queue = deque(np.flatnonzero(tracker.colors == UNCOLORED).tolist())

        stuck = -1
        while queue:
            eid = queue.popleft()
            if tracker.colors[eid] != UNCOLORED:
                continue
            if _try_color(tracker, rng, eid, table[eid]):
                if cfg.debug:
                    _check_invariant(tracker, index, params)
                continue
            if retries[eid] >= cfg.max_retries_per_edge:
                stuck = eid
                break
            retries[eid] += 1
            total_kicks += 1
            evicted = _kick(tracker, rng, eid, table[eid])
            if cfg.debug:
                _check_invariant(tracker, index, params)
            queue.extend(evicted)
        if stuck < 0:
            phi = tracker.coloring()
            return GreedyResult(phi, True, attempt, total_kicks,
                                stats={"colors_used": colors_used(phi)})

    failure = _diagnose(tracker, index, stuck, sorted(int(c) for c in table[stuck]))
    partial = tracker.coloring()
    if cfg.repair:
        fixed = moser_tardos_color(host, pattern, q, lists, index, seed=cfg.seed, initial=partial)
        if fixed.success:
            return GreedyResult(fixed.coloring, True, cfg.max_restarts, total_kicks, failure,
                                repaired=True, stats={"resamples": fixed.resamples})
    return GreedyResult(partial, False, cfg.max_restarts, total_kicks, failure)


def _check_invariant(tracker: ConflictTracker, index: CopySet, params: RamseyParams) -> None:
    if spans_forbidden(tracker.coloring(), index, params):
        raise _LoopInvariantError("partial coloring spans a forbidden configuration")
