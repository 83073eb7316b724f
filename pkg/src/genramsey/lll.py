"""Local Lemma parameters and Moser-Tardos resampling colorings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import mpmath
import numpy as np

from ._kernels import (adjacency_bitsets, binomial_table, block_counts, draw_positions,
                       resample_loop, resample_loop_graph)
from .coloring import ListAssignment, PartialColoring, UNCOLORED, copy_color_counts
from .hypergraph import CopySet, HostGraph, ParameterError, PatternGraph, RamseyParams


@dataclass(frozen=True)
class LllParameters:
    t: int
    p_bad: float
    log_p_bad: float
    d: int
    ok: bool


def lll_parameters(n: int, params: RamseyParams, t: int) -> LllParameters:
    """Bad-event bound, dependency bound and the symmetric condition e*p*(d+1) <= 1.

    p = C(r t, q-1) ((q-1)/t)^r is evaluated exactly as a rational and d = r C(n, p-k).
    """
    q, r = params.q, params.r
    if q < 2 or t < q - 1:
        raise ParameterError(f"need t >= q - 1 >= 1, got t={t}, q={q}")
    p_bad = Fraction(math.comb(r * t, q - 1)) * Fraction(q - 1, t) ** r
    d = r * math.comb(n, params.p - params.k)
    with mpmath.workdps(50):
        log_p = mpmath.log(p_bad.numerator) - mpmath.log(p_bad.denominator)
        ok = log_p + 1 + mpmath.log(d + 1) <= 0
        log_p_float = float(log_p)
    return LllParameters(t=t, p_bad=float(p_bad), log_p_bad=log_p_float, d=d, ok=bool(ok))


def _ceil_scaled_root(n: int, num: int, den: int, C: float) -> int:
    """Smallest integer t with t >= C * n**(num/den), decided in exact arithmetic."""
    c = Fraction(C)
    target = c ** den * Fraction(n) ** num
    t = max(0, math.ceil(float(C) * n ** (num / den)) - 2)
    while Fraction(t) ** den < target:
        t += 1
    return t


def lll_budget(n: int, params: RamseyParams, C: float) -> int:
    """Palette size ceil(C n^((p-k)/s)) used by the Local Lemma argument."""
    if C <= 0:
        raise ParameterError("C must be positive")
    return _ceil_scaled_root(n, params.p - params.k, params.s, C)


@dataclass
class ResampleResult:
    coloring: PartialColoring
    success: bool
    resamples: int
    remaining_violations: int
    reason: str = ""


def moser_tardos_color(host: HostGraph, pattern: PatternGraph, q: int, lists: ListAssignment,
                       index: CopySet, seed: int = 0, max_resamples: Optional[int] = None,
                       initial: Optional[PartialColoring] = None,
                       specialized: bool = True) -> ResampleResult:
    """Color from the lists, then resample the lowest-index violated copy until none remain.

    Uncolored edges of ``initial`` (if given) are filled uniformly from their lists first.
    Running out of ``max_resamples`` (default ``1000 * |E|``) returns an unsuccessful
    result carrying the last state.  For K3 or K4 in a complete graph a faster kernel with
    the identical trajectory is used unless ``specialized`` is False.
    """
    if lists.host is not host or index.host is not host:
        raise ParameterError("lists and copy index must belong to the host")
    if max_resamples is None:
        max_resamples = 1000 * host.num_edges
    rng = np.random.default_rng(seed)
    table = lists.lists
    T = table.shape[1]
    m = host.num_edges
    draw = table[np.arange(m), rng.integers(0, T, size=m)]
    if initial is not None:
        colors = initial.colors.copy()
        missing = colors == UNCOLORED
        colors[missing] = draw[missing]
    else:
        colors = draw

    copy_edges = index.edges
    # Counts never exceed r; a narrow dtype keeps the randomly updated array in cache.
    narrow = np.int8 if index.edges.shape[1] < 128 else np.int32
    distinct = copy_color_counts(PartialColoring(host, colors), index).astype(narrow)
    block = block_counts(distinct < q)
    graph_clique = (specialized and host.complete and pattern.is_complete and pattern.k == 2
                    and pattern.p in (3, 4))
    n_colors = int(table.max()) + 1 if table.size else 0
    # Bitsets cost n_colors * n * ceil(n / 64) words; very wide palettes use the generic loop.
    if graph_clique and n_colors * host.n * ((host.n + 63) // 64) <= 1 << 25:
        binom = binomial_table(host.n, pattern.p)
        edge_verts = np.asarray(host.edges, dtype=np.int64)
        adj, upper = adjacency_bitsets(edge_verts, colors, host.n, n_colors)

        def step(left, draws):
            return resample_loop_graph(colors, table, copy_edges, edge_verts, adj, upper, host.n,
                                       pattern.p, distinct, block, q, left, draws, binom)
    else:
        partners = index.partner_table()

        def step(left, draws):
            return resample_loop(colors, table, copy_edges, index.indptr, index.indices,
                                 partners, distinct, block, q, left, draws)

    # The compiled loop consumes pre-drawn list positions so the numpy seed fixes the run.
    resamples = 0
    chunk = copy_edges.shape[1] * 4096
    while resamples < max_resamples:
        draws = draw_positions(rng, chunk, T)
        done_now, _, finished = step(max_resamples - resamples, draws)
        resamples += done_now
        if finished:
            break
    n_violated = int((distinct < q).sum())

    phi = PartialColoring(host, colors)
    if n_violated:
        return ResampleResult(phi, False, resamples, n_violated, reason="resample-cap")
    return ResampleResult(phi, True, resamples, 0)


def calibrate_constant(succeeds: Callable[[float], bool], start: float = 1.0,
                       max_steps: int = 12) -> Tuple[float, List[Tuple[float, bool]]]:
    """Smallest ``start * 2**j`` for which ``succeeds`` holds, by doubling/halving.

    ``succeeds(C)`` is expected to run a batch of seeded trials and apply a quorum.
    Returns the constant and the probe history.
    """
    history: List[Tuple[float, bool]] = []
    C = start
    ok = succeeds(C)
    history.append((C, ok))
    if ok:
        for _ in range(max_steps):
            lower = C / 2
            ok_lower = succeeds(lower)
            history.append((lower, ok_lower))
            if not ok_lower:
                break
            C = lower
        return C, history
    for _ in range(max_steps):
        C *= 2
        ok = succeeds(C)
        history.append((C, ok))
        if ok:
            return C, history
    raise RuntimeError(f"no constant up to {C} met the success quorum")
