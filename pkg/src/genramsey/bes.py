"""Lower bounds for Brown-Erdos-Sos numbers from generalized Ramsey colorings.

An (K_j^(k), C(j,k) - i + 2)-coloring of K_n^(k) has no j vertices spanning i edges of one
color, so every color class is a valid extremal configuration and some class has at
least C(n,k) / (number of colors) edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Dict

from .coloring import PartialColoring
from .hypergraph import ParameterError


def bes_lower_bound(n: int, k: int, j: int, i: int, r_value: int) -> int:
    """``ceil(C(n,k) / r_value)``, with ``r_value`` a color count achieving the coloring.

    ``j`` and ``i`` are carried for validation only; the bound depends on them through
    ``r_value``.
    """
    if r_value < 1:
        raise ParameterError(f"r_value must be at least 1, got {r_value}")
    if not (2 <= k < j <= n) or not 1 <= i <= math.comb(j, k):
        raise ParameterError(f"need 2 <= k < j <= n and 1 <= i <= C(j,k), got n={n} k={k} j={j} i={i}")
    total = math.comb(n, k)
    return -(-total // r_value)


def verify_color_class_span(phi: PartialColoring, j: int, i: int) -> bool:
    """True iff no j vertices span i or more edges of a single color."""
    if not phi.is_total:
        raise ParameterError("needs a total coloring")
    host = phi.host
    colors = phi.colors
    eid = host.edge_index
    for S in combinations(range(host.n), j):
        tally: Dict[int, int] = {}
        for e in combinations(S, host.k):
            f = eid.get(e)
            if f is None:
                continue
            c = int(colors[f])
            tally[c] = tally.get(c, 0) + 1
            if tally[c] >= i:
                return False
    return True


@dataclass(frozen=True)
class Regime:
    growth: str  # "sublinear", "linear-threshold" or "superlinear"; "" when not k = 2
    integral: bool
    linear_threshold: bool

    @property
    def non_integral(self) -> bool:
        return not self.integral

    def flags(self) -> Dict[str, bool]:
        return {"sublinear": self.growth == "sublinear", "linear-threshold": self.linear_threshold,
                "superlinear": self.growth == "superlinear", "integral": self.integral,
                "non-integral": not self.integral}


def classify_regime(k: int, p: int, q: int) -> Regime:
    """Divisibility of p - k by C(p,k) - q + 1, and the growth class of the exponent.

    For graphs the color count is linear in n exactly at q = C(p,2) - p + 3, where the
    exponent (p - 2) / (C(p,2) - q + 1) equals 1; smaller q is sublinear, larger superlinear.
    """
    r = math.comb(p, k)
    if not (2 <= k < p) or not 1 <= q <= r:
        raise ParameterError(f"need 2 <= k < p and 1 <= q <= C(p,k), got k={k} p={p} q={q}")
    s = r - q + 1
    integral = (p - k) % s == 0
    if k == 2:
        threshold = q == r - p + 3
        if threshold:
            growth = "linear-threshold"
        elif p - k < s:
            growth = "sublinear"
        else:
            growth = "superlinear"
    else:
        threshold, growth = False, ""
    return Regime(growth=growth, integral=integral, linear_threshold=threshold)


def bes_substitution(k: int, j: int, i: int) -> tuple:
    """The (p, q) pair whose colorings feed the bound for F^(k)(n; j, i)."""
    return j, math.comb(j, k) - i + 2


def bes_divisibility_agrees(k: int, j: int, i: int) -> bool:
    """Whether the classifier's integrality matches ``(k i - j) % (i - 1) == 0``."""
    p, q = bes_substitution(k, j, i)
    if not 1 <= q <= math.comb(p, k):
        raise ParameterError("substituted q is out of range")
    return classify_regime(k, p, q).integral == ((k * i - j) % (i - 1) == 0)
