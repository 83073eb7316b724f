"""Measured degree statistics of the configuration hypergraph H and of J.

All counts come from the materialized H.  Thresholds are evaluated in floating point
from the exact rational D; ``ln`` is the natural logarithm.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .encoder import (BipartiteInstance, BudgetParameters, ConfigurationHypergraph, Pair,
                      enumerate_H)
from .hypergraph import CopySet, HostGraph, ParameterError, RamseyParams


@dataclass
class AuditReport:
    i_degree: Dict[int, int]
    st_codegree: Dict[Tuple[int, int], int]
    jh2_codegree: int
    common2_degree: int
    thresholds: Dict[str, float]
    passed: Dict[str, bool]
    min_m_minus_l: Optional[int]
    min_alpha: Optional[float]
    alpha: float
    num_configs: int
    D: str
    size_cap: int

    def flat(self) -> Dict[str, object]:
        """Flat key/value view used for text and JSON output."""
        out: Dict[str, object] = {"alpha": self.alpha, "D": self.D, "num_configs": self.num_configs,
                                  "size_cap": self.size_cap, "jh2_codegree": self.jh2_codegree,
                                  "common2_degree": self.common2_degree,
                                  "min_m_minus_l": self.min_m_minus_l, "min_alpha": self.min_alpha}
        for i, v in sorted(self.i_degree.items()):
            out[f"delta_{i}"] = v
        for (s, t), v in sorted(self.st_codegree.items()):
            out[f"delta_{s}_{t}"] = v
        for key, v in sorted(self.thresholds.items()):
            out[f"threshold.{key}"] = v
        for key, v in sorted(self.passed.items()):
            out[f"pass.{key}"] = v
        return out

    def to_json(self) -> str:
        return json.dumps(self.flat(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.flat().items())


def vertex_degrees(H: ConfigurationHypergraph) -> Dict[int, Counter]:
    """For each size ``i``, how many size-``i`` configs contain each pair."""
    deg: Dict[int, Counter] = defaultdict(Counter)
    for cfg in H.configs:
        for x in cfg.members:
            deg[cfg.size][x] += 1
    return deg


def st_codegrees(H: ConfigurationHypergraph, r: int) -> Dict[Tuple[int, int], int]:
    """Max over t-sets S of the number of size-s configs containing S, for 2 <= t < s <= r."""
    out: Dict[Tuple[int, int], int] = {}
    by_size: Dict[int, list] = defaultdict(list)
    for cfg in H.configs:
        by_size[cfg.size].append(cfg.members)
    for s in range(3, r + 1):
        for t in range(2, s):
            counts: Counter = Counter()
            for members in by_size.get(s, ()):
                counts.update(combinations(sorted(members), t))
            out[(s, t)] = max(counts.values(), default=0)
    return out


def _pair_graph(H: ConfigurationHypergraph) -> Dict[Pair, set]:
    adj: Dict[Pair, set] = defaultdict(set)
    for cfg in H.configs:
        if cfg.size == 2:
            x, y = cfg.members
            adj[x].add(y)
            adj[y].add(x)
    return adj


def jh2_codegree(H: ConfigurationHypergraph) -> int:
    """Max over a J-edge x = (e, c) and a J-vertex v outside x of size-2 configs {x, y}, y at v.

    For v = (e', c') in B only y = v qualifies, so the maximum is attained at A-vertices
    e' != e, where it counts the colors c' with {x, (e', c')} in H.
    """
    best = 0
    for x, nbrs in _pair_graph(H).items():
        per_edge = Counter(e for e, _ in nbrs if e != x[0])
        if per_edge:
            best = max(best, max(per_edge.values()))
    return best


def common2_degree(H: ConfigurationHypergraph) -> int:
    """Max over distinct u, v of the number of w with uw and vw both size-2 configs."""
    counts: Counter = Counter()
    for w, nbrs in _pair_graph(H).items():
        counts.update(combinations(sorted(nbrs), 2))
    return max(counts.values(), default=0)


def _as_float(x) -> float:
    return float(x)


def audit(host: HostGraph, palette: Sequence[int], index: CopySet, params: RamseyParams,
          budget: BudgetParameters, alpha: float = 1.0, size_cap: Optional[int] = None,
          max_configs: int = 2_000_000,
          H: Optional[ConfigurationHypergraph] = None) -> AuditReport:
    """Measure H on ``host`` with every edge allowed every color in ``palette``.

    Statistics involving sizes above ``size_cap`` are left out.  Raises ``SizeLimitError``
    through ``enumerate_H`` when H is too large.
    """
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    cap = params.r if size_cap is None else min(size_cap, params.r)
    if H is None:
        H = enumerate_H(host, palette, index, params, size_cap=cap, max_configs=max_configs)
    D = _as_float(budget.D)
    beta = _as_float(budget.beta)
    logD = math.log(D) if D > 0 else float("-inf")

    deg = vertex_degrees(H)
    i_degree = {i: max(deg[i].values(), default=0) for i in range(2, cap + 1)}
    st = st_codegrees(H, cap)
    jh2 = jh2_codegree(H)
    common = common2_degree(H)

    thresholds: Dict[str, float] = {}
    passed: Dict[str, bool] = {}
    alphas: List[float] = []
    for i, value in i_degree.items():
        scale = D ** (i - 1) * logD if D > 1 else 0.0
        thresholds[f"delta_{i}"] = alpha * scale
        # Compared as a ratio so that alpha = min_alpha passes despite rounding.
        ratio = value / scale if scale > 0 else (math.inf if value else 0.0)
        passed[f"delta_{i}"] = ratio <= alpha
        if value:
            alphas.append(ratio)
    for (s, t), value in st.items():
        bound = D ** (s - t - beta)
        thresholds[f"delta_{s}_{t}"] = bound
        passed[f"delta_{s}_{t}"] = value <= bound
    small = D ** (1 - beta)
    for key, value in (("claim_delta_2", i_degree.get(2, 0)), ("jh2_codegree", jh2),
                       ("common2_degree", common)):
        thresholds[key] = small
        passed[key] = value <= small

    realized = {cfg.triple for cfg in H.configs}
    min_ml = min((m - l for m, _, l in realized), default=None)
    return AuditReport(i_degree=i_degree, st_codegree=st, jh2_codegree=jh2,
                       common2_degree=common, thresholds=thresholds, passed=passed,
                       min_m_minus_l=min_ml, min_alpha=max(alphas, default=0.0), alpha=alpha,
                       num_configs=len(H), D=str(budget.D), size_cap=cap)


@dataclass
class JDegreeReport:
    a_degrees_equal_T: bool
    a_degree_hypothesis: bool
    b_degrees_one: bool
    codegrees_at_most_one: bool
    two_bounded: bool

    @property
    def ok(self) -> bool:
        return all(asdict(self).values())


def j_degree_check(J: BipartiteInstance, budget: BudgetParameters) -> JDegreeReport:
    """Degree and codegree conditions of J = (A, B) with A-degree T = 2D.

    The A-degree hypothesis ``T >= (1 + D^-alpha) D`` holds for every alpha > 0 iff D >= 1.
    """
    a_deg = J.a_degrees()
    b_deg = J.b_degrees()
    # J-edges are {e, (e, c)}; two vertices share an edge at most once unless a pair repeats.
    distinct_pairs = b_deg.size == J.num_b
    return JDegreeReport(a_degrees_equal_T=bool((a_deg == budget.T).all()),
                         a_degree_hypothesis=bool(budget.D >= 1),
                         b_degrees_one=bool((b_deg == 1).all()),
                         codegrees_at_most_one=distinct_pairs,
                         two_bounded=J.pairs.shape[1] == 2)
