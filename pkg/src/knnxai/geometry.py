"""Polyhedral view of the l2 decision regions.

Under l2, "closer to a than to c" is a single halfspace.  Each (A, B) witness
pair of the optimistic rule therefore carves out a polyhedron; label 1 cells
are closed, label 0 cells are open.  This module builds those cells and
provides the LP feasibility and QP projection kernels run on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

from . import _simplex
from .core import LabeledDataset, as_rational, check_k
from .errors import (
    DegenerateBisector,
    DimensionMismatch,
    InfeasibleError,
    InternalError,
    IterationLimit,
    NoInteriorDirection,
)

GE = ">="
GT = ">"
EQ = "="

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
INDETERMINATE = "indeterminate"

QP_TOL = 1e-9
QP_MAX_SWEEPS = 10**6
ACTIVE_TOL = 1e-7


@dataclass(frozen=True)
class LinearInequality:
    """``coeffs . y  (sense)  rhs`` with sense one of ``>=``, ``>``, ``=``."""

    coeffs: tuple
    rhs: Fraction
    sense: str = GE

    def __post_init__(self):
        if self.sense not in (GE, GT, EQ):
            raise ValueError(f"bad sense {self.sense!r}")

    @property
    def dimension(self) -> int:
        return len(self.coeffs)

    def lhs(self, y) -> Fraction:
        return sum((a * v for a, v in zip(self.coeffs, y) if a), Fraction(0))

    def holds(self, y) -> bool:
        s = self.lhs(y)
        if self.sense == GE:
            return s >= self.rhs
        if self.sense == GT:
            return s > self.rhs
        return s == self.rhs

    def relaxed(self) -> "LinearInequality":
        return LinearInequality(self.coeffs, self.rhs, GE) if self.sense == GT else self

    def __str__(self) -> str:
        terms = [f"{a}*y{j + 1}" for j, a in enumerate(self.coeffs) if a]
        return f"{' + '.join(terms) if terms else '0'} {self.sense} {self.rhs}"


@dataclass(frozen=True)
class Polyhedron:
    constraints: tuple
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            if c.dimension != self.dimension:
                raise DimensionMismatch(
                    f"constraint of dimension {c.dimension} in a {self.dimension}-dim polyhedron"
                )

    @property
    def openness(self) -> str:
        strict = [c.sense == GT for c in self.constraints]
        if not any(strict):
            return "closed"
        if all(strict):
            return "open"
        return "mixed"

    def closure(self) -> "Polyhedron":
        return Polyhedron(tuple(c.relaxed() for c in self.constraints), self.dimension)

    def contains(self, y) -> bool:
        return all(c.holds(y) for c in self.constraints)

    def dump(self) -> str:
        """One constraint per line, exact rationals."""
        return "\n".join(str(c) for c in self.constraints)


@dataclass(frozen=True)
class Cell:
    polyhedron: Polyhedron
    A: tuple  # indices into the class that must be closest
    B: tuple  # indices into the opposite class that are exempt
    label: int


@dataclass
class CellEnumeration:
    """Lazily produced cells whose union is ``{y : f(y) = label}``."""

    label: int
    _factory: object = field(repr=False)

    def __iter__(self) -> Iterator[Cell]:
        return self._factory()

    def count(self) -> int:
        return sum(1 for _ in self)


@dataclass(frozen=True)
class FeasibilityResult:
    status: str
    witness: tuple | None = None
    slack: Fraction | None = None
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


@dataclass(frozen=True)
class ProjectionResult:
    minimizer: tuple
    squared_distance: object
    active_set: tuple
    exact: bool = False
    kkt_residual: float = 0.0
    sweeps: int = 0
    multipliers: tuple = ()


def bisector(a: Sequence, c: Sequence, sense: str = GE) -> LinearInequality:
    """Halfspace of points at l2 distance ``<=`` (``GE``) or ``<`` (``GT``) to ``a`` than to ``c``."""
    if len(a) != len(c):
        raise DimensionMismatch("bisector endpoints differ in dimension")
    if sense not in (GE, GT):
        raise ValueError("bisector sense must be '>=' or '>'")
    a = [as_rational(v) for v in a]
    c = [as_rational(v) for v in c]
    diff = tuple(p - q for p, q in zip(a, c))
    if not any(diff):
        raise DegenerateBisector("bisector of a point with itself")
    rhs = (sum(p * p for p in a) - sum(q * q for q in c)) / 2
    return LinearInequality(diff, rhs, sense)


def _cell_pairs(ds: LabeledDataset, k: int, label: int, maximal_only: bool):
    half = (k + 1) // 2
    cap = (k - 1) // 2
    same, other = (ds.positives, ds.negatives) if label == 1 else (ds.negatives, ds.positives)
    sizes = [min(cap, len(other))] if maximal_only else range(min(cap, len(other)) + 1)
    for A in combinations(range(len(same)), half):
        for size in sizes:
            for B in combinations(range(len(other)), size):
                yield A, B


def cells(ds: LabeledDataset, k: int, label: int, maximal_only: bool = False) -> CellEnumeration:
    """Cells of the region ``{y : f(y) = label}`` in lexicographic (A, B) order.

    With ``maximal_only`` only exemption sets B of the largest admissible size
    are produced; smaller B give subsets of those cells, so the union is
    unchanged.  Coinciding points of opposite classes give a vacuous
    constraint for label 1 and an empty cell for label 0 (such cells are
    skipped).
    """
    check_k(k, ds.size)
    if label not in (0, 1):
        raise ValueError("label must be 0 or 1")
    sense = GE if label == 1 else GT
    same, other = (ds.positives, ds.negatives) if label == 1 else (ds.negatives, ds.positives)

    def factory():
        cache = {}
        for A, B in _cell_pairs(ds, k, label, maximal_only):
            rows = []
            empty = False
            for a in A:
                for ci in range(len(other)):
                    if ci in B:
                        continue
                    key = (a, ci)
                    if key not in cache:
                        try:
                            cache[key] = bisector(same[a], other[ci], sense)
                        except DegenerateBisector:
                            cache[key] = None
                    row = cache[key]
                    if row is None:
                        if sense == GT:
                            empty = True
                            break
                        continue
                    rows.append(row)
                if empty:
                    break
            if empty:
                continue
            yield Cell(Polyhedron(tuple(rows), ds.dimension), A, B, label)

    return CellEnumeration(label, factory)


# ---------------------------------------------------------------- LP layer


def _as_rows(system) -> tuple[list, int]:
    if isinstance(system, Polyhedron):
        return list(system.constraints), system.dimension
    rows = list(system)
    if not rows:
        raise ValueError("empty system needs a Polyhedron to know its dimension")
    return rows, rows[0].dimension


def lp_feasible(system, exact: bool = True, tol: float = 1e-9) -> FeasibilityResult:
    """Decide feasibility of a system with ``=``, ``>=``, ``>`` rows.

    Strict rows become ``row >= eps`` and ``eps`` (capped at 1) is maximised;
    the system is feasible iff the optimum is positive.  In exact mode the
    answer is a symbolic yes/no; the float mode reports ``indeterminate``
    when the optimum lies within ``tol`` of zero.
    """
    rows, n = _as_rows(system)
    conv = as_rational if exact else float
    live = []
    for r in rows:
        if any(r.coeffs):
            live.append(r)
            continue
        rhs = conv(r.rhs)
        ok = (0 >= rhs) if r.sense == GE else (0 > rhs) if r.sense == GT else (rhs == 0)
        if not ok and exact:
            return FeasibilityResult(INFEASIBLE)
        if not ok and not exact and abs(rhs) > tol:
            return FeasibilityResult(INFEASIBLE)
    strict = any(r.sense == GT for r in live)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    nv = n + (1 if strict else 0)
    cons = []
    for r in live:
        coeffs = [conv(a) for a in r.coeffs]
        if strict:
            coeffs.append(-one if r.sense == GT else zero)
        cons.append((coeffs, "=" if r.sense == EQ else ">=", conv(r.rhs)))
    if strict:
        cons.append(([zero] * n + [one], "<=", one))
    objective = [zero] * n + ([one] if strict else [])
    free = [True] * n + ([False] if strict else [])
    eps = 0 if exact else tol * 1e-3
    res = _simplex.solve_lp(objective, cons, free=free, eps=eps, one=one)
    if res.status == _simplex.INFEASIBLE:
        return FeasibilityResult(INFEASIBLE, pivots=res.pivots)
    if res.status != _simplex.OPTIMAL:  # cannot happen with eps capped
        raise InternalError(f"unexpected LP status {res.status}")
    y = tuple(res.x[:n])
    if strict:
        e = res.x[n]
        if exact:
            if e <= 0:
                return FeasibilityResult(INFEASIBLE, pivots=res.pivots)
        else:
            if e <= -tol:
                return FeasibilityResult(INFEASIBLE, pivots=res.pivots)
            if e <= tol:
                return FeasibilityResult(INDETERMINATE, y, e, res.pivots)
    else:
        e = None
    if exact and not all(r.holds(y) for r in rows):
        raise InternalError("LP witness fails re-verification")
    return FeasibilityResult(FEASIBLE, y, e, res.pivots)


# ---------------------------------------------------------------- QP layer


def _solve_exact(mat, rhs):
    """Solve a square rational system; None if singular."""
    n = len(mat)
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        prow = [v / pv for v in aug[col]]
        aug[col] = prow
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], prow)]
    return [aug[r][n] for r in range(n)]


def _independent(rows_idx, G):
    """Greedy maximal linearly independent subset of rows (exact)."""
    basis = []  # reduced rows with pivot columns
    keep = []
    for i in rows_idx:
        v = list(G[i])
        for piv, b in basis:
            if v[piv]:
                f = v[piv] / b[piv]
                v = [p - f * q for p, q in zip(v, b)]
        piv = next((j for j, a in enumerate(v) if a), None)
        if piv is not None:
            basis.append((piv, v))
            keep.append(i)
    return keep


def _eqp(x, G, h, W):
    """Exact projection of x onto {y : G_i y = h_i, i in W}; returns (y, lam) or None."""
    W = _independent(W, G)
    if not W:
        return tuple(x), {}
    A = [G[i] for i in W]
    M = [[sum(p * q for p, q in zip(ai, aj)) for aj in A] for ai in A]
    r = [2 * (h[i] - sum(a * v for a, v in zip(G[i], x))) for i in W]
    lam = _solve_exact(M, r)
    if lam is None:
        return None
    y = list(x)
    for li, ai in zip(lam, A):
        if li:
            half = li / 2
            for j, a in enumerate(ai):
                if a:
                    y[j] += half * a
    return tuple(y), dict(zip(W, lam))


def _polish(x, G, h, guess, max_rounds):
    """Exact active-set iterations from a guessed working set; None if it fails."""
    W = sorted(set(guess))
    seen = set()
    for _ in range(max_rounds):
        key = tuple(W)
        if key in seen:
            return None
        seen.add(key)
        sol = _eqp(x, G, h, W)
        if sol is None:
            return None
        y, lam = sol
        W = sorted(lam)  # dependent rows were dropped
        neg = [(v, i) for i, v in lam.items() if v < 0]
        viol = []
        for i, (g, b) in enumerate(zip(G, h)):
            s = sum(a * v for a, v in zip(g, y) if a) - b
            if s < 0:
                nrm = sum(a * a for a in g)
                viol.append((s * s / nrm, i))
        if not neg and not viol:
            return y, lam
        if viol:
            W = sorted(set(W) | {max(viol)[1]})
        else:
            W = sorted(set(W) - {min(neg)[1]})
    return None


def qp_project(x: Sequence, P: Polyhedron, tol: float = QP_TOL, max_sweeps: int = QP_MAX_SWEEPS,
               polish: bool = True) -> ProjectionResult:
    """Euclidean projection of ``x`` onto the closed polyhedron ``P``.

    Hildreth's dual coordinate ascent runs in floating point; its working set
    then seeds an exact active-set pass, which returns a rational minimizer
    with a zero KKT residual whenever it closes.
    """
    from .kernels import backend

    if P.openness != "closed":
        raise ValueError("qp_project needs a closed polyhedron; take .closure() first")
    n = P.dimension
    if len(x) != n:
        raise DimensionMismatch("point and polyhedron dimensions differ")
    xq = [as_rational(v) for v in x]
    G, h = [], []
    for c in P.constraints:
        if c.sense == EQ:
            G.append(list(c.coeffs))
            h.append(c.rhs)
            G.append([-a for a in c.coeffs])
            h.append(-c.rhs)
        else:
            G.append(list(c.coeffs))
            h.append(c.rhs)
    zero_rows = [i for i, g in enumerate(G) if not any(g)]
    for i in zero_rows:
        if h[i] > 0:
            raise InfeasibleError("polyhedron has an unsatisfiable constant row")
    keep = [i for i in range(len(G)) if any(G[i])]
    G = [G[i] for i in keep]
    h = [h[i] for i in keep]
    if all(sum(a * v for a, v in zip(g, xq)) >= b for g, b in zip(G, h)):
        return ProjectionResult(tuple(xq), Fraction(0), (), True, 0.0, 0, ())
    Gf = [[float(a) for a in g] for g in G]
    hf = [float(b) for b in h]
    xf = [float(v) for v in xq]
    sweeps_done = 0
    chunk = 200
    best = None
    while sweeps_done < max_sweeps:
        step = min(chunk, max_sweeps - sweeps_done)
        y, lam, sweeps, delta = backend.hildreth(Gf, hf, xf, tol, step, best[1] if best else None)
        sweeps_done += sweeps
        best = (y, lam, delta)
        converged = delta < tol
        if polish:
            scale = max(1.0, max(abs(v) for v in lam) if lam else 1.0)
            guess = [i for i, v in enumerate(lam) if v > 1e-9 * scale]
            out = _polish(xq, G, h, guess, max_rounds=4 * len(G) + 4)
            if out is not None:
                ystar, mult = out
                d2 = sum((a - b) ** 2 for a, b in zip(xq, ystar))
                active = tuple(sorted(keep[i] for i, v in mult.items() if v > 0))
                return ProjectionResult(
                    tuple(ystar), d2, active, True, 0.0, sweeps_done,
                    tuple((keep[i], v) for i, v in sorted(mult.items())),
                )
        if converged:
            break
        chunk = min(chunk * 4, 20000)
    y, lam, delta = best
    resid = _kkt_residual(xf, Gf, hf, y, lam)
    if delta >= tol and sweeps_done >= max_sweeps:
        raise IterationLimit("Hildreth iteration cap exceeded", best=tuple(y), residual=resid)
    d2 = sum((a - b) ** 2 for a, b in zip(xf, y))
    active = tuple(sorted(keep[i] for i, v in enumerate(lam) if v > 0))
    return ProjectionResult(tuple(y), d2, active, False, resid, sweeps_done,
                            tuple((keep[i], v) for i, v in enumerate(lam) if v > 0))


def _kkt_residual(x, G, h, y, lam):
    n = len(x)
    stat = [2 * (y[j] - x[j]) - sum(l * g[j] for l, g in zip(lam, G)) for j in range(n)]
    r = max((abs(v) for v in stat), default=0.0)
    for g, b, l in zip(G, h, lam):
        s = sum(a * v for a, v in zip(g, y)) - b
        r = max(r, max(0.0, -s), abs(l * s), max(0.0, -l))
    return r


def interior_direction(P_closure: Polyhedron, y: Sequence, active_tol: float = ACTIVE_TOL) -> tuple:
    """Unit vector pointing strictly into the constraints active at ``y``."""
    beta = interior_direction_exact(P_closure, y, active_tol)
    nrm = math.sqrt(sum(float(b) ** 2 for b in beta))
    return tuple(float(b) / nrm for b in beta)


def active_rows(P: Polyhedron, y, active_tol: float = ACTIVE_TOL) -> list:
    out = []
    for c in P.constraints:
        r = c.lhs([as_rational(v) if not isinstance(v, float) else Fraction(v) for v in y]) - c.rhs
        if abs(float(r)) <= active_tol * (1 + abs(float(c.rhs))):
            out.append(c)
    return out


def interior_direction_exact(P_closure: Polyhedron, y: Sequence, active_tol: float = ACTIVE_TOL) -> tuple:
    """Rational direction beta with ``alpha . beta > 0`` on every active row, box-bounded by 1."""
    n = P_closure.dimension
    act = active_rows(P_closure, y, active_tol)
    if not act:
        return tuple(Fraction(1 if j == 0 else 0) for j in range(n))
    sys = [LinearInequality(c.coeffs, Fraction(0), GT) for c in act]
    for j in range(n):
        e = tuple(Fraction(-1 if i == j else 0) for i in range(n))
        sys.append(LinearInequality(e, Fraction(-1), GE))
        sys.append(LinearInequality(tuple(-v for v in e), Fraction(-1), GE))
    res = lp_feasible(Polyhedron(tuple(sys), n))
    if not res.feasible:
        raise NoInteriorDirection("no direction enters the interior at this point")
    return res.witness
