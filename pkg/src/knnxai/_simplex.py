"""Dense two-phase tableau simplex with Bland's rule.

Works over any ordered field: pass Fractions for exact answers, floats with
``eps > 0`` otherwise.  Variables may be free or sign-restricted; free ones
are split into a positive and a negative part internally.
"""
from __future__ import annotations

from fractions import Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPResult:
    __slots__ = ("status", "x", "value", "pivots")

    def __init__(self, status, x=None, value=None, pivots=0):
        self.status = status
        self.x = x
        self.value = value
        self.pivots = pivots

    def __repr__(self):
        return f"LPResult({self.status!r}, x={self.x!r}, value={self.value!r})"


def _pivot(rows, obj, r, c, eps):
    prow = rows[r]
    pv = prow[c]
    if pv != 1:
        inv = 1 / pv
        for j, v in enumerate(prow):
            if v:
                prow[j] = v * inv
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(rows):
        if i == r:
            continue
        f = row[c]
        if f:
            for j in nz:
                row[j] -= f * prow[j]
            if eps:
                for j in nz:
                    if -eps < row[j] < eps:
                        row[j] = 0
    f = obj[c]
    if f:
        for j in nz:
            obj[j] -= f * prow[j]


def _run(rows, obj, basis, eps, allowed, max_pivots):
    """Maximise; ``obj`` holds reduced costs, last entry is minus the value."""
    pivots = 0
    ncol = len(obj) - 1
    while True:
        enter = -1
        for j in range(ncol):
            if allowed[j] and obj[j] > eps:
                enter = j
                break
        if enter < 0:
            return OPTIMAL, pivots
        leave = -1
        best = None
        for i, row in enumerate(rows):
            a = row[enter]
            if a > eps:
                ratio = row[-1] / a
                if (
                    best is None
                    or ratio < best - eps
                    or (ratio <= best + eps and basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED, pivots
        _pivot(rows, obj, leave, enter, eps)
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex pivot cap exceeded")


def solve_lp(objective, constraints, free=None, eps=0, max_pivots=100000, one=Fraction(1)):
    """Maximise ``objective . x`` subject to ``constraints``.

    ``constraints`` is a list of ``(coeffs, sense, rhs)`` with sense in
    ``"<=", ">=", "="``.  ``free[j]`` marks variable j as unrestricted in sign
    (default: all nonnegative).
    """
    nvar = len(objective)
    if free is None:
        free = [False] * nvar
    zero = one - one
    # column layout: one column per variable, plus a negative part for free ones
    col_of = []
    neg_of = {}
    ncols = 0
    for j in range(nvar):
        col_of.append(ncols)
        ncols += 1
        if free[j]:
            neg_of[j] = ncols
            ncols += 1
    nstruct = ncols

    norm = []
    for coeffs, sense, rhs in constraints:
        row = [zero] * nstruct
        for j, a in enumerate(coeffs):
            if a:
                a = a * one
                row[col_of[j]] = a
                if j in neg_of:
                    row[neg_of[j]] = -a
        rhs = rhs * one
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        norm.append((row, sense, rhs))

    nslack = sum(1 for _, s, _ in norm if s != "=")
    nart = sum(1 for _, s, _ in norm if s != "<=")
    total = nstruct + nslack + nart
    rows = []
    basis = []
    art_cols = []
    si = nstruct
    ai = nstruct + nslack
    for row, sense, rhs in norm:
        full = row + [zero] * (nslack + nart) + [rhs]
        if sense == "<=":
            full[si] = one
            basis.append(si)
            si += 1
        elif sense == ">=":
            full[si] = -one
            si += 1
            full[ai] = one
            basis.append(ai)
            art_cols.append(ai)
            ai += 1
        else:
            full[ai] = one
            basis.append(ai)
            art_cols.append(ai)
            ai += 1
        rows.append(full)

    pivots = 0
    art_set = set(art_cols)
    if art_cols:
        obj = [zero] * (total + 1)
        for c in art_cols:
            obj[c] = -one
        for i, b in enumerate(basis):
            if b in art_set:
                r = rows[i]
                for j in range(total + 1):
                    if r[j]:
                        obj[j] += r[j]
        allowed = [True] * total
        status, p = _run(rows, obj, basis, eps, allowed, max_pivots)
        pivots += p
        if -obj[-1] < -eps:
            return LPResult(INFEASIBLE, pivots=pivots)
        # drive artificials out of the basis
        i = 0
        while i < len(rows):
            if basis[i] in art_set:
                row = rows[i]
                c = next((j for j in range(nstruct + nslack) if abs(row[j]) > eps), -1)
                if c < 0:
                    del rows[i]
                    del basis[i]
                    continue
                _pivot(rows, obj, i, c, eps)
                basis[i] = c
                pivots += 1
            i += 1
        for row in rows:
            for c in art_cols:
                row[c] = zero

    obj = [zero] * (total + 1)
    for j in range(nvar):
        c = objective[j] * one
        if c:
            obj[col_of[j]] = c
            if j in neg_of:
                obj[neg_of[j]] = -c
    for i, b in enumerate(basis):
        cb = obj[b]
        if cb:
            r = rows[i]
            for j in range(total + 1):
                if r[j]:
                    obj[j] -= cb * r[j]
    allowed = [j not in art_set for j in range(total)]
    status, p = _run(rows, obj, basis, eps, allowed, max_pivots)
    pivots += p
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, pivots=pivots)
    vals = [zero] * total
    for i, b in enumerate(basis):
        vals[b] = rows[i][-1]
    x = []
    for j in range(nvar):
        v = vals[col_of[j]]
        if j in neg_of:
            v = v - vals[neg_of[j]]
        x.append(v)
    value = sum((objective[j] * x[j] for j in range(nvar)), zero)
    return LPResult(OPTIMAL, x, value, pivots)
