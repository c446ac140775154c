"""l2 counterfactuals: project x onto every cell of the opposite label."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .. import geometry
from ..core import L2, LabeledDataset, _classify, as_rational, check_k, check_metric
from ..errors import InternalError, IterationLimit, NoInteriorDirection
from .result import EXISTS, INDETERMINATE, NOT_EXISTS, CounterfactualResult

CLOSED_SLACK = 1e-6
OPEN_MARGIN = 1e-9
MIN_STEP = 1e-12
# initial interior step relative to the distance, keeps witnesses near the infimum
STEP_SCALE = 1e-6


def _sqdist(x, y):
    return sum((a - b) * (a - b) for a, b in zip(x, y))


def _interior_witness(x, cell, closure, ystar, ell, ell2, d_star):
    """Point of the open cell near ``ystar`` with distance at most ``ell``.

    Moves along an exact interior direction with step halving.  Returns
    ``(point, squared distance)`` or None when no step works.
    """
    beta = geometry.interior_direction_exact(closure, ystar)
    bnorm = math.sqrt(sum(float(b) ** 2 for b in beta))
    room = (ell - d_star) / bnorm if bnorm else 0.0
    t = min(room, STEP_SCALE * (1.0 + d_star))
    t = Fraction(max(t, MIN_STEP))
    for _ in range(200):
        y = tuple(a + t * b for a, b in zip(ystar, beta))
        if cell.contains(y):
            d2 = _sqdist(x, y)
            if d2 <= ell2:
                return y, d2
        t /= 2
    return None


def cf_l2(ds: LabeledDataset, k: int, x: Sequence, ell, stats: dict | None = None) -> CounterfactualResult:
    """Closest counterfactual within l2 distance ``ell``.

    Cells of the opposite label are scanned in enumeration order.  A closed
    cell (target label 1) accepts when the projection distance is at most
    ``ell``; an open cell (target label 0) first has its nonemptiness
    certified, then accepts when the projection onto its closure lies
    strictly inside the ball, and the witness is pushed into the interior.
    """
    check_metric(ds, L2)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    ellq = as_rational(ell)
    if ellq < 0:
        raise ValueError("budget must be nonnegative")
    ell2 = ellq * ellq
    ellf = float(ellq)
    st = stats if stats is not None else {}
    st.update(cells=0, empty_cells=0, qp_sweeps=0, inexact_projections=0)
    label = _classify(ds, L2, k, x)
    target = 1 - label
    best = None
    indeterminate = []
    for cell in geometry.cells(ds, k, target, maximal_only=True):
        st["cells"] += 1
        P = cell.polyhedron
        closed = target == 1
        feas = geometry.lp_feasible(P)
        if not feas.feasible:
            st["empty_cells"] += 1
            continue
        closure = P if closed else P.closure()
        try:
            proj = geometry.qp_project(x, closure)
        except IterationLimit as exc:
            raise InternalError(f"projection failed on cell A={cell.A} B={cell.B}: {exc}") from exc
        st["qp_sweeps"] += proj.sweeps
        if proj.exact:
            d2 = proj.squared_distance
            d = math.sqrt(float(d2))
            if closed:
                if d2 > ell2:
                    continue
                cand = (tuple(proj.minimizer), d2)
            else:
                if d2 >= ell2:
                    continue
                try:
                    cand = _interior_witness(x, P, closure, proj.minimizer, ellf, ell2, d)
                except NoInteriorDirection:
                    cand = None
                if cand is None:
                    indeterminate.append((cell.A, cell.B))
                    continue
        else:
            st["inexact_projections"] += 1
            d = math.sqrt(proj.squared_distance)
            if closed and d > ellf * (1 + CLOSED_SLACK):
                continue
            if not closed and d * d >= ellf * ellf * (1 - OPEN_MARGIN):
                continue
            ystar = tuple(Fraction(v) for v in proj.minimizer)
            cand = None
            if P.contains(ystar) and _sqdist(x, ystar) <= ell2:
                cand = (ystar, _sqdist(x, ystar))
            else:
                try:
                    cand = _interior_witness(x, P, closure, ystar, ellf, ell2, d)
                except NoInteriorDirection:
                    cand = None
            if cand is None:
                indeterminate.append((cell.A, cell.B))
                continue
        y, d2y = cand
        info = {"A": list(cell.A), "B": list(cell.B), "cell_label": target,
                "infimum": math.sqrt(float(proj.squared_distance)), "exact_projection": proj.exact}
        if best is None or d2y < best[1]:
            best = (y, d2y, info)
    if best is None:
        if indeterminate:
            return CounterfactualResult(INDETERMINATE, None, None, {"cells": indeterminate}, st)
        return CounterfactualResult(NOT_EXISTS, None, None, {}, st)
    y, d2y, info = best
    if _classify(ds, L2, k, y) == label:
        raise InternalError("l2 witness does not change the label")
    if d2y > ell2:
        raise InternalError("l2 witness exceeds the budget")
    return CounterfactualResult(EXISTS, y, math.sqrt(float(d2y)), info, st)
