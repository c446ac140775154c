"""l1 counterfactuals at desk scale.

Two stages.  A depth-first scan of the breakpoint grid (per coordinate: x's
value and every training value) finds the closest flipping grid point; any
hit is a genuine witness.  The grid alone is not always optimal: between
breakpoints every |y_i - v_i| is linear, so the label regions inside one
breakpoint box are polyhedra whose closest point to x can sit strictly
inside a box.  The refinement stage therefore visits boxes in order of
their distance lower bound and solves one exact LP per (box, cell) pair.
"""
from __future__ import annotations

import heapq
import math
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .. import _simplex, kernels
from ..core import L1, LabeledDataset, _classify, check_k, check_metric, distance
from ..errors import InternalError, ResourceLimit
from ..kernels import _pykernels
from .result import EXISTS, INDETERMINATE, NOT_EXISTS, CounterfactualResult

GRID_BUDGET = 10**7
BOX_BUDGET = 20000
INT64_SAFE = 2**62
WITNESS_SLACK = Fraction(1, 10**9)


def breakpoints(ds: LabeledDataset, x: Sequence) -> list:
    pts = ds.positives + ds.negatives
    return [sorted({x[i]} | {p[i] for p in pts}) for i in range(ds.dimension)]


def _grid_scan(ds, k, x, ell, target, bps, backend):
    pts = list(ds.positives + ds.negatives)
    labels = [1] * len(ds.positives) + [0] * len(ds.negatives)
    den = ell.denominator
    for coord in bps:
        for v in coord:
            den = math.lcm(den, v.denominator)
    scale = lambda v: int(v * den)  # noqa: E731
    values = [sorted((scale(v) for v in coord), key=lambda s, i=i: (abs(s - scale(x[i])), s))
              for i, coord in enumerate(bps)]
    xs = [scale(v) for v in x]
    ps = [[scale(v) for v in p] for p in pts]
    limit = scale(ell)
    top = max([abs(v) for c in values for v in c] + [abs(v) for v in xs] + [limit, 1])
    kb = backend
    if 2 * top * (ds.dimension + 1) >= INT64_SAFE:
        kb = _pykernels  # Python ints do not overflow
    grid = 1
    for c in values:
        grid *= len(c)
    cap = 4 * grid + 16
    y, d, nodes, complete = kb.l1_grid_search(values, xs, ps, labels, k, target, limit, cap)
    if not complete:
        raise InternalError("grid scan stopped before covering the grid")
    if y is None:
        return None, None, nodes
    return tuple(Fraction(v, den) for v in y), Fraction(d, den), nodes


def _box_rows(ds, k, target, lo, hi, free):
    """Cells of the target label restricted to the box, as rows over u = y - lo."""
    pts_same, pts_other = (ds.positives, ds.negatives) if target == 1 else (ds.negatives, ds.positives)

    def linear(p):
        coef = []
        const = Fraction(0)
        for i in range(len(lo)):
            if i in free:
                s = 1 if p[i] <= lo[i] else -1
                coef.append(s)
                const += s * (lo[i] - p[i])
            else:
                const += abs(lo[i] - p[i])
        return coef, const

    same = [linear(p) for p in pts_same]
    other = [linear(p) for p in pts_other]
    return same, other


def _greedy_one_row(cost, w, row, rhs):
    """min cost.u  s.t.  row.u >= rhs, 0 <= u <= w  (exact); None if infeasible."""
    u = [Fraction(0) if c >= 0 else wi for c, wi in zip(cost, w)]
    have = sum(a * v for a, v in zip(row, u))
    need = rhs - have
    if need <= 0:
        return u
    moves = []
    for j, (c, a, wi) in enumerate(zip(cost, row, w)):
        if a > 0 and u[j] == 0:
            moves.append((abs(c) / a, j, 1))
        elif a < 0 and u[j] == wi:
            moves.append((abs(c) / -a, j, -1))
    moves.sort()
    for _, j, sgn in moves:
        gain = abs(row[j]) * w[j]
        if gain >= need:
            step = need / abs(row[j])
            u[j] += sgn * step
            return u
        u[j] += sgn * w[j]
        need -= gain
    return None


def _lp_min(cost, w, rows):
    """Exact min cost.u over the box and rows ``(coef, rhs)`` meaning coef.u >= rhs."""
    if not rows:
        return [Fraction(0) if c >= 0 else wi for c, wi in zip(cost, w)]
    if len(rows) == 1:
        return _greedy_one_row(cost, w, rows[0][0], rows[0][1])
    n = len(cost)
    cons = [(list(r), ">=", b) for r, b in rows]
    for j in range(n):
        e = [0] * n
        e[j] = 1
        cons.append((e, "<=", w[j]))
    res = _simplex.solve_lp([-c for c in cost], cons)
    if res.status != _simplex.OPTIMAL:
        return None
    return res.x


def _lp_interior(w, rows):
    """Point of the box where every row holds strictly, or None."""
    n = len(w)
    cons = [(list(r) + [-1], ">=", b) for r, b in rows]
    for j in range(n):
        e = [0] * (n + 1)
        e[j] = 1
        cons.append((e, "<=", w[j]))
    cons.append(([0] * n + [1], "<=", 1))
    res = _simplex.solve_lp([0] * n + [1], cons)
    if res.status != _simplex.OPTIMAL or res.x[n] <= 0:
        return None
    return res.x[:n]


def _refine(ds, k, x, ell, target, bps, best, box_budget, st):
    """Best-first scan of breakpoint boxes; returns the improved best and a completeness flag."""
    n = ds.dimension
    strict = target == 0
    intervals = []
    for i, coord in enumerate(bps):
        if len(coord) == 1:
            opts = [(Fraction(0), coord[0], coord[0])]
        else:
            opts = []
            for lo, hi in zip(coord, coord[1:]):
                lb = Fraction(0) if lo <= x[i] <= hi else min(abs(x[i] - lo), abs(x[i] - hi))
                opts.append((lb, lo, hi))
            opts.sort(key=lambda t: (t[0], t[1]))
        intervals.append(opts)
    half = (k + 1) // 2
    cap = (k - 1) // 2
    start = tuple([0] * n)
    heap = [(sum(iv[0][0] for iv in intervals), start, 0)]
    boxes = 0
    while heap:
        lb, idx, last = heapq.heappop(heap)
        if lb > ell or (strict and lb >= ell):
            break
        if best is not None and lb >= best[1]:
            break
        if boxes >= box_budget:
            st["box_budget_hit"] = True
            return best, False
        boxes += 1
        for j in range(last, n):
            if idx[j] + 1 < len(intervals[j]):
                nidx = idx[:j] + (idx[j] + 1,) + idx[j + 1:]
                nlb = lb - intervals[j][idx[j]][0] + intervals[j][idx[j] + 1][0]
                heapq.heappush(heap, (nlb, nidx, j))
        lo = [intervals[i][idx[i]][1] for i in range(n)]
        hi = [intervals[i][idx[i]][2] for i in range(n)]
        free = [i for i in range(n) if hi[i] > lo[i]]
        fset = set(free)
        w = [hi[i] - lo[i] for i in free]
        same, other = _box_rows(ds, k, target, lo, hi, fset)
        xcoef, xconst = [], Fraction(0)
        for i in range(n):
            if i in fset:
                s = 1 if x[i] <= lo[i] else -1
                xcoef.append(s)
                xconst += s * (lo[i] - x[i])
            else:
                xconst += abs(lo[i] - x[i])
        for A in combinations(range(len(same)), half):
            for B in combinations(range(len(other)), min(cap, len(other))):
                rows = set()
                dead = False
                for a in A:
                    ac, a0 = same[a]
                    for c in range(len(other)):
                        if c in B:
                            continue
                        cc, c0 = other[c]
                        coef = tuple(p - q for p, q in zip(cc, ac))
                        rhs = a0 - c0
                        top = sum((v * wj for v, wj in zip(coef, w) if v > 0), Fraction(0))
                        if top < rhs or (strict and top <= rhs):
                            dead = True
                            break
                        if not any(coef):
                            continue
                        rows.add((coef, rhs))
                    if dead:
                        break
                if dead:
                    continue
                rows = sorted(rows)
                st["box_lps"] = st.get("box_lps", 0) + 1
                interior = None
                if strict:
                    interior = _lp_interior(w, rows) if rows else [Fraction(0)] * len(w)
                    if interior is None:
                        continue
                u = _lp_min(xcoef, w, rows)
                if u is None:
                    continue
                val = xconst + sum(c * v for c, v in zip(xcoef, u))
                if val > ell or (strict and val >= ell):
                    continue
                if best is not None and val >= best[1]:
                    continue
                if strict:
                    dz = xconst + sum(c * v for c, v in zip(xcoef, interior))
                    margin = min(ell - val, WITNESS_SLACK * (1 + val))
                    t = Fraction(1) if dz <= val else min(Fraction(1), margin / (dz - val))
                    u = [a + t * (b - a) for a, b in zip(u, interior)]
                y = list(lo)
                for i, v in zip(free, u):
                    y[i] = lo[i] + v
                best = (tuple(y), val, {"box": [[str(a), str(b)] for a, b in zip(lo, hi)],
                                        "A": list(A), "B": list(B)})
    st["boxes"] = boxes
    return best, True


def cf_l1_oracle(ds: LabeledDataset, k: int, x: Sequence, ell, grid_budget: int = GRID_BUDGET,
                 refine: bool = True, box_budget: int = BOX_BUDGET, backend=None,
                 stats: dict | None = None) -> CounterfactualResult:
    """Closest l1 counterfactual within ``ell``: grid scan plus exact box refinement.

    ``provenance["certified"]`` is True when the refinement covered every box
    that could still improve the answer; with ``refine=False`` the answer is
    the grid optimum only.
    """
    check_metric(ds, L1)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    ell = Fraction(ell) if not isinstance(ell, Fraction) else ell
    st = stats if stats is not None else {}
    label = _classify(ds, L1, k, x)
    target = 1 - label
    bps = breakpoints(ds, x)
    grid = 1
    for c in bps:
        grid *= len(c)
    if grid > grid_budget:
        raise ResourceLimit(f"breakpoint grid of {grid} points exceeds the budget of {grid_budget}",
                            {"grid": grid, "budget": grid_budget})
    st["grid"] = grid
    y, d, nodes = _grid_scan(ds, k, x, ell, target, bps, backend or kernels.backend)
    st["grid_nodes"] = nodes
    best = (y, d, {"source": "grid"}) if y is not None else None
    certified = not refine
    if refine:
        refined, certified = _refine(ds, k, x, ell, target, bps, best, box_budget, st)
        if refined is not best:
            refined[2]["source"] = "box"
        best = refined
    if best is None:
        if refine and not certified:
            return CounterfactualResult(INDETERMINATE, None, None, {"certified": False}, st)
        return CounterfactualResult(NOT_EXISTS, None, None, {"certified": certified, "grid_only": not refine}, st)
    y, inf, info = best
    if _classify(ds, L1, k, y) == label:
        raise InternalError("l1 witness does not change the label")
    dy = distance(x, y, L1)
    if dy > ell:
        raise InternalError("l1 witness exceeds the budget")
    info.update(certified=certified, infimum=str(inf), grid_only=not refine)
    return CounterfactualResult(EXISTS, y, dy, info, st)
