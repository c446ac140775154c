"""Reference implementations of the hot loops.

Boolean vectors are passed as int bitmasks with feature ``i`` on bit ``i``.
The compiled module mirrors these signatures and visiting orders exactly.
"""
from __future__ import annotations

from itertools import combinations

NAME = "python"


def _label(dpos, dneg, k):
    allp = sorted(dpos + dneg)
    dk = allp[k - 1]
    below = 0
    pos_below = 0
    pos_at = 0
    for d in dneg:
        if d < dk:
            below += 1
    for d in dpos:
        if d < dk:
            below += 1
            pos_below += 1
        elif d == dk:
            pos_at += 1
    return 1 if pos_below + min(pos_at, k - below) >= (k + 1) // 2 else 0


def hamming_label(x, pos, neg, k):
    """Optimistic k-NN label of bitmask ``x`` under the Hamming distance."""
    dpos = [(x ^ p).bit_count() for p in pos]
    dneg = [(x ^ q).bit_count() for q in neg]
    return _label(dpos, dneg, k)


def first_flip(x, pos, neg, n, k, size, target, node_cap):
    """First flip set of ``size`` bits (lexicographic) whose label is ``target``.

    Returns ``(mask, nodes)``; mask is -1 when none exists and -2 when the
    node cap stopped the search.
    """
    nodes = 0
    for combo in combinations(range(n), size):
        if nodes >= node_cap:
            return -2, nodes
        nodes += 1
        m = 0
        for i in combo:
            m |= 1 << i
        if hamming_label(x ^ m, pos, neg, k) == target:
            return m, nodes
    return -1, nodes


def first_completion(base, free, pos, neg, k, target, node_cap):
    """First assignment of the ``free`` bits over ``base`` whose label is ``target``.

    Assignments are visited in binary counting order, bit j of the counter
    driving ``free[j]``.  Same return convention as :func:`first_flip`.
    """
    f = len(free)
    nodes = 0
    for t in range(1 << f):
        if nodes >= node_cap:
            return -2, nodes
        nodes += 1
        y = base
        for j in range(f):
            if (t >> j) & 1:
                y |= 1 << free[j]
        if hamming_label(y, pos, neg, k) == target:
            return y, nodes
    return -1, nodes


def hildreth(G, h, x, tol, max_sweeps, lam0=None):
    """Dual coordinate ascent for ``min |y - x|^2  s.t.  G y >= h``.

    Returns ``(y, lam, sweeps, delta)`` where ``delta`` is the largest primal
    move in the final sweep.
    """
    m = len(G)
    n = len(x)
    y = list(x)
    lam = list(lam0) if lam0 is not None else [0.0] * m
    norms = [sum(a * a for a in g) for g in G]
    if lam0 is not None:
        for i in range(m):
            li = lam[i]
            if li:
                g = G[i]
                for j in range(n):
                    y[j] += 0.5 * li * g[j]
    sweeps = 0
    delta = float("inf")
    while sweeps < max_sweeps:
        sweeps += 1
        delta = 0.0
        for i in range(m):
            g = G[i]
            s = 0.0
            for j in range(n):
                s += g[j] * y[j]
            old = lam[i]
            new = old + 2.0 * (h[i] - s) / norms[i]
            if new < 0.0:
                new = 0.0
            step = new - old
            if step:
                lam[i] = new
                half = 0.5 * step
                for j in range(n):
                    y[j] += half * g[j]
                move = abs(half) * norms[i] ** 0.5
                if move > delta:
                    delta = move
        if delta < tol:
            break
    return y, lam, sweeps, delta


def l1_grid_search(values, x, points, labels, k, target, limit, node_cap):
    """Depth-first search of the breakpoint grid under the l1 distance.

    All quantities are integers (callers scale rationals to a common
    denominator).  ``values[i]`` lists the candidates for coordinate ``i``
    sorted by distance to ``x[i]``; ``limit`` bounds the distance to ``x``.
    Returns ``(best_point or None, best_distance, nodes, complete)``.
    """
    n = len(x)
    npts = len(points)
    partial = [0] * npts
    y = [0] * n
    best = [None, limit + 1]
    nodes = [0]
    pos_idx = [j for j in range(npts) if labels[j] == 1]
    neg_idx = [j for j in range(npts) if labels[j] == 0]

    def rec(i, dist):
        if nodes[0] >= node_cap:
            return False
        nodes[0] += 1
        if i == n:
            lab = _label([partial[j] for j in pos_idx], [partial[j] for j in neg_idx], k)
            if lab == target and dist < best[1]:
                best[0] = tuple(y)
                best[1] = dist
            return True
        xi = x[i]
        for v in values[i]:
            nd = dist + abs(v - xi)
            if nd >= best[1]:
                break  # values are sorted by distance to x[i]
            y[i] = v
            for j in range(npts):
                partial[j] += abs(v - points[j][i])
            ok = rec(i + 1, nd)
            for j in range(npts):
                partial[j] -= abs(v - points[j][i])
            if not ok:
                return False
        return True

    complete = rec(0, 0)
    return best[0], best[1], nodes[0], complete
