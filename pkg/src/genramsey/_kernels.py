"""Compiled inner loops for resampling and for the greedy conflict tracker."""

import numpy as np
from numba import njit

BLOCK_SHIFT = 6


@njit(cache=True)
def resample_loop(colors, table, copy_edges, indptr, incidence, partners, distinct, block, q,
                  budget, draws):
    """Resample the lowest-index violated copy until none is left or a limit is hit.

    ``distinct[i]`` is the number of colors on copy ``i`` and ``block[b]`` the number of
    violated copies among rows ``64b..64b+63``; both are kept current.  ``partners[t]``
    lists the other edges of copy ``incidence[t]``.  ``draws`` holds uniform list positions,
    one consumed per edge of a resampled copy.  Returns ``(resamples, draws_used, done)``.
    """
    n_blocks = block.shape[0]
    r = copy_edges.shape[1]
    width = partners.shape[1]
    used = 0
    resamples = 0
    b = 0
    while resamples < budget:
        while b < n_blocks and block[b] == 0:
            b += 1
        if b == n_blocks:
            return resamples, used, True
        if used + r > draws.shape[0]:
            return resamples, used, False
        bad = b << BLOCK_SHIFT
        while distinct[bad] >= q:
            bad += 1
        resamples += 1
        for j in range(r):
            e = copy_edges[bad, j]
            old = colors[e]
            new = table[e, draws[used]]
            used += 1
            if new == old:
                continue
            colors[e] = new
            for t in range(indptr[e], indptr[e + 1]):
                # Whether the old and new color survive among the other edges decides the change.
                has_old = False
                has_new = False
                for a in range(width):
                    c = colors[partners[t, a]]
                    has_old |= c == old
                    has_new |= c == new
                if has_old != has_new:
                    delta = 1 if has_old else -1
                    row = incidence[t]
                    d0 = distinct[row]
                    d = d0 + delta
                    distinct[row] = d
                    if d0 >= q and d < q:
                        block[row >> BLOCK_SHIFT] += 1
                        if (row >> BLOCK_SHIFT) < b:
                            b = row >> BLOCK_SHIFT
                    elif d0 < q and d >= q:
                        block[row >> BLOCK_SHIFT] -= 1
    return resamples, used, False


def block_counts(violated: np.ndarray) -> np.ndarray:
    size = 1 << BLOCK_SHIFT
    n_blocks = (violated.shape[0] + size - 1) // size
    padded = np.zeros(n_blocks * size, dtype=np.int32)
    padded[:violated.shape[0]] = violated
    return padded.reshape(n_blocks, size).sum(axis=1).astype(np.int64)


def draw_positions(rng: np.random.Generator, size: int, T: int) -> np.ndarray:
    return rng.integers(0, T, size=size, dtype=np.int64)



_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_DEBRUIJN_INDEX = np.array([0, 1, 48, 2, 57, 49, 28, 3, 61, 58, 50, 42, 38, 29, 17, 4, 62, 55, 59,
                            36, 53, 51, 43, 22, 45, 39, 33, 30, 24, 18, 12, 5, 63, 47, 56, 27, 60,
                            41, 37, 16, 54, 35, 52, 21, 44, 32, 23, 11, 46, 26, 40, 15, 34, 20, 31,
                            10, 25, 14, 19, 9, 13, 8, 7, 6], dtype=np.int64)


@njit(cache=True, inline="always")
def _lowest_bit(word):
    low = word & (~word + np.uint64(1))
    return _DEBRUIJN_INDEX[(low * _DEBRUIJN) >> np.uint64(58)]


@njit(cache=True)
def resample_loop_graph(colors, table, copy_edges, edge_verts, adj, upper, n, p, distinct, block,
                        q, budget, draws, binom):
    """``resample_loop`` for K3 or K4 in a complete graph, same trajectory.

    ``adj[c, x]`` is the bitset of neighbours y with edge xy colored c.  For a recolored edge
    uv the old color survives in copy {u, v} + S iff it sits on an edge from u or v into S
    or inside S, so a few word operations per vertex x find every y whose copy {u, v, x, y}
    changes its color count.  ``upper[x]`` masks y > x.  Copies are located by lex rank.
    """
    n_blocks = block.shape[0]
    r = copy_edges.shape[1]
    W = adj.shape[2]
    one = np.uint64(1)
    full = ~np.uint64(0)
    used = 0
    resamples = 0
    b = 0
    top = binom[n, p] - 1
    ho_set = np.zeros(W, dtype=np.uint64)
    hn_set = np.zeros(W, dtype=np.uint64)
    outside = np.zeros(W, dtype=np.uint64)
    while resamples < budget:
        while b < n_blocks and block[b] == 0:
            b += 1
        if b == n_blocks:
            return resamples, used, True
        if used + r > draws.shape[0]:
            return resamples, used, False
        bad = b << BLOCK_SHIFT
        while distinct[bad] >= q:
            bad += 1
        resamples += 1
        for j in range(r):
            e = copy_edges[bad, j]
            old = colors[e]
            new = table[e, draws[used]]
            used += 1
            if new == old:
                continue
            colors[e] = new
            u = edge_verts[e, 0]
            v = edge_verts[e, 1]
            adj[old, u, v >> 6] &= ~(one << np.uint64(v & 63))
            adj[old, v, u >> 6] &= ~(one << np.uint64(u & 63))
            adj[new, u, v >> 6] |= one << np.uint64(v & 63)
            adj[new, v, u >> 6] |= one << np.uint64(u & 63)
            for w in range(W):
                ho_set[w] = adj[old, u, w] | adj[old, v, w]
                hn_set[w] = adj[new, u, w] | adj[new, v, w]
                outside[w] = full
            outside[u >> 6] &= ~(one << np.uint64(u & 63))
            outside[v >> 6] &= ~(one << np.uint64(v & 63))
            if p == 3:
                for w in range(W):
                    diff = (ho_set[w] ^ hn_set[w]) & outside[w] & upper[0, w]
                    while diff:
                        t = _lowest_bit(diff)
                        x = (w << 6) + t
                        delta = 1 if (ho_set[w] >> np.uint64(t)) & one else -1
                        b = _apply(u, v, x, -1, delta, n, p, binom, top, distinct, block, q, b)
                        diff &= diff - one
                continue
            for x in range(n):
                if x == u or x == v:
                    continue
                xw = x >> 6
                xb = np.uint64(x & 63)
                hox = (ho_set[xw] >> xb) & one
                hnx = (hn_set[xw] >> xb) & one
                for w in range(xw, W):
                    mo = full if hox else ho_set[w] | adj[old, x, w]
                    mn = full if hnx else hn_set[w] | adj[new, x, w]
                    diff = (mo ^ mn) & upper[x + 1, w] & outside[w]
                    while diff:
                        t = _lowest_bit(diff)
                        y = (w << 6) + t
                        delta = 1 if (mo >> np.uint64(t)) & one else -1
                        b = _apply(u, v, x, y, delta, n, p, binom, top, distinct, block, q, b)
                        diff &= diff - one
    return resamples, used, False


def adjacency_bitsets(edge_verts: np.ndarray, colors: np.ndarray, n: int, n_colors: int):
    """``(adj, upper)`` for ``resample_loop_graph``; ``upper[x]`` has the bits y >= x, y < n."""
    W = (n + 63) // 64
    adj = np.zeros((n_colors, n, W), dtype=np.uint64)
    for (u, v), c in zip(edge_verts.tolist(), colors.tolist()):
        adj[c, u, v >> 6] |= np.uint64(1) << np.uint64(v & 63)
        adj[c, v, u >> 6] |= np.uint64(1) << np.uint64(u & 63)
    upper = np.zeros((n + 1, W), dtype=np.uint64)
    for x in range(n + 1):
        for y in range(x, n):
            upper[x, y >> 6] |= np.uint64(1) << np.uint64(y & 63)
    return adj, upper


@njit(cache=True, inline="always")
def _apply(u, v, x, y, delta, n, p, binom, top, distinct, block, q, b):
    # Lex rank of the sorted set {u, v, x(, y)} with u < v and x < y; the sorted position
    # of each vertex comes from comparisons, avoiding a data-dependent sort.
    row = top
    if p == 3:
        row -= binom[n - 1 - u, 3 - (x < u)]
        row -= binom[n - 1 - v, 2 - (x < v)]
        row -= binom[n - 1 - x, 3 - (u < x) - (v < x)]
    else:
        row -= binom[n - 1 - u, 4 - (x < u) - (y < u)]
        row -= binom[n - 1 - v, 3 - (x < v) - (y < v)]
        row -= binom[n - 1 - x, 4 - (u < x) - (v < x)]
        row -= binom[n - 1 - y, 3 - (u < y) - (v < y)]
    d0 = distinct[row]
    d = d0 + delta
    distinct[row] = d
    if d0 >= q and d < q:
        block[row >> BLOCK_SHIFT] += 1
        if (row >> BLOCK_SHIFT) < b:
            b = row >> BLOCK_SHIFT
    elif d0 < q and d >= q:
        block[row >> BLOCK_SHIFT] -= 1
    return b


def binomial_table(n: int, p: int) -> np.ndarray:
    out = np.zeros((n + 1, p + 1), dtype=np.int64)
    for a in range(n + 1):
        out[a, 0] = 1
        for c in range(1, min(a, p) + 1):
            out[a, c] = out[a - 1, c - 1] + (out[a - 1, c] if c <= a - 1 else 0)
    return out


@njit(cache=True, inline="always")
def _holds(row, color, edges, colors):
    for j in range(edges.shape[1]):
        f = edges[row, j]
        if f < 0:
            return False
        if colors[f] == color:
            return True
    return False


@njit(cache=True)
def tracker_conflicts(eid, color, indptr, indices, edges, need, excess, colors):
    """Whether some region through ``eid`` is one step from firing and already holds ``color``."""
    for t in range(indptr[eid], indptr[eid + 1]):
        row = indices[t]
        if excess[row] >= need[row] - 1 and _holds(row, color, edges, colors):
            return True
    return False


@njit(cache=True)
def tracker_first_free(eid, candidates, indptr, indices, edges, need, excess, colors):
    """First candidate color that does not conflict at ``eid``, or -1."""
    for c in candidates:
        if not tracker_conflicts(eid, c, indptr, indices, edges, need, excess, colors):
            return c
    return -1


@njit(cache=True)
def tracker_blockers(eid, color, indptr, indices, edges, need, excess, colors):
    """Edges of ``color`` in the regions that would fire; may repeat."""
    out = np.empty((indptr[eid + 1] - indptr[eid]) * edges.shape[1], dtype=np.int64)
    size = 0
    for t in range(indptr[eid], indptr[eid + 1]):
        row = indices[t]
        if excess[row] >= need[row] - 1 and _holds(row, color, edges, colors):
            for j in range(edges.shape[1]):
                f = edges[row, j]
                if f < 0:
                    break
                if colors[f] == color and f != eid:
                    out[size] = f
                    size += 1
    return out[:size]


@njit(cache=True)
def tracker_shift(eid, color, delta, indptr, indices, edges, excess, colors):
    """Add ``delta`` to the excess of every region through ``eid`` already holding ``color``."""
    for t in range(indptr[eid], indptr[eid + 1]):
        row = indices[t]
        if _holds(row, color, edges, colors):
            excess[row] += delta
