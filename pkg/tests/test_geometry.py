import math
import random
from fractions import Fraction

import pytest

from knnxai import _simplex, geometry
from knnxai.core import L2, LabeledDataset, classify_optimistic
from knnxai.errors import DegenerateBisector
from knnxai.geometry import EQ, GE, GT, LinearInequality, Polyhedron


def row(coeffs, sense, rhs):
    return LinearInequality(tuple(Fraction(c) for c in coeffs), Fraction(rhs), sense)


class TestSimplex:
    def test_optimal_vertex(self):
        # max x + y  s.t.  x + 2y <= 4, 3x + y <= 6
        res = _simplex.solve_lp([1, 1], [([1, 2], "<=", 4), ([3, 1], "<=", 6)])
        assert res.status == _simplex.OPTIMAL
        assert res.x == [Fraction(8, 5), Fraction(6, 5)]
        assert res.value == Fraction(14, 5)

    def test_infeasible(self):
        res = _simplex.solve_lp([1], [([1], ">=", 2), ([1], "<=", 1)])
        assert res.status == _simplex.INFEASIBLE

    def test_unbounded(self):
        res = _simplex.solve_lp([1, 0], [([1, -1], "<=", 1)])
        assert res.status == _simplex.UNBOUNDED

    def test_free_variables_and_equalities(self):
        # max -x  s.t. x = -3 with x free
        res = _simplex.solve_lp([-1], [([1], "=", -3)], free=[True])
        assert res.status == _simplex.OPTIMAL and res.x == [Fraction(-3)]

    def test_integer_inputs_stay_exact(self):
        res = _simplex.solve_lp([-1, -1], [([2, 2], ">=", 1), ([1, 0], "<=", 1), ([0, 1], "<=", 1)])
        assert all(isinstance(v, Fraction) for v in res.x)
        assert sum(res.x) == Fraction(1, 2)

    def test_degenerate_cycling_instance_terminates(self):
        # a classic cycling example for the largest-coefficient rule
        cons = [
            ([Fraction(1, 4), -8, -1, 9], "<=", 0),
            ([Fraction(1, 2), -12, Fraction(-1, 2), 3], "<=", 0),
            ([0, 0, 1, 0], "<=", 1),
        ]
        res = _simplex.solve_lp([Fraction(3, 4), -20, Fraction(1, 2), -6], cons)
        assert res.status == _simplex.OPTIMAL
        assert res.value == Fraction(5, 4)


class TestLinearObjects:
    def test_holds_and_relaxed(self):
        r = row([1, -1], GT, 0)
        assert r.holds((1, 0)) and not r.holds((0, 0))
        assert r.relaxed().holds((0, 0))
        assert row([1, 1], EQ, 2).holds((1, 1))

    def test_bisector_sides(self):
        a, c = (Fraction(0), Fraction(0)), (Fraction(2), Fraction(0))
        h = geometry.bisector(a, c)
        assert h.holds((1, 5)) and h.holds((0, 3)) and not h.holds((Fraction(3, 2), 0))
        with pytest.raises(DegenerateBisector):
            geometry.bisector(a, a)

    def test_polyhedron_openness(self):
        closed = Polyhedron((row([1], GE, 0),), 1)
        opened = Polyhedron((row([1], GT, 0),), 1)
        mixed = Polyhedron((row([1], GE, 0), row([-1], GT, -1)), 1)
        assert closed.openness == "closed"
        assert opened.openness == "open"
        assert mixed.openness == "mixed"
        assert opened.closure().openness == "closed"


class TestCells:
    def test_union_of_cells_is_label_region(self):
        rng = random.Random(1)
        for _ in range(15):
            pos = [tuple(Fraction(rng.randint(0, 3)) for _ in range(2)) for _ in range(rng.randint(1, 3))]
            neg = [tuple(Fraction(rng.randint(0, 3)) for _ in range(2)) for _ in range(rng.randint(1, 3))]
            ds = LabeledDataset.from_points(pos, neg)
            for k in (1, 3):
                if ds.size < k:
                    continue
                full = {lab: list(geometry.cells(ds, k, lab)) for lab in (0, 1)}
                maxi = {lab: list(geometry.cells(ds, k, lab, maximal_only=True)) for lab in (0, 1)}
                for _ in range(30):
                    y = tuple(Fraction(rng.randint(-4, 16), 4) for _ in range(2))
                    lab = classify_optimistic(ds, L2, k, y)
                    for cells in (full, maxi):
                        assert any(c.polyhedron.contains(y) for c in cells[lab])
                        assert not any(c.polyhedron.contains(y) for c in cells[1 - lab])

    def test_count_matches_iteration(self):
        ds = LabeledDataset.from_points([(0, 0), (1, 1), (2, 0)], [(0, 2), (2, 2)])
        e = geometry.cells(ds, 3, 1)
        assert e.count() == len(list(e))


class TestLpFeasible:
    def test_witness_is_exact(self):
        rows = [row([1, 1], GT, 1), row([1, -1], GE, 0), row([0, 1], GT, 0)]
        res = geometry.lp_feasible(rows)
        assert res.feasible
        assert all(isinstance(v, Fraction) for v in res.witness)
        assert all(r.holds(res.witness) for r in rows)

    def test_strict_touching_halfspaces(self):
        assert not geometry.lp_feasible([row([1], GT, 0), row([-1], GT, 0)]).feasible
        assert geometry.lp_feasible([row([1], GE, 0), row([-1], GE, 0)]).feasible

    def test_unbounded_strict_direction(self):
        # the epsilon variable is capped so an unbounded region is still decided
        res = geometry.lp_feasible([row([1, 0], GT, 0)])
        assert res.feasible


def square(lo, hi):
    return Polyhedron((row([1, 0], GE, lo), row([-1, 0], GE, -hi), row([0, 1], GE, lo), row([0, -1], GE, -hi)), 2)


class TestProjection:
    def test_inside_point_is_fixed(self):
        p = geometry.qp_project((Fraction(1, 2), Fraction(1, 2)), square(0, 1))
        assert p.squared_distance == 0

    def test_face_and_corner(self):
        P = square(0, 1)
        face = geometry.qp_project((Fraction(1, 2), Fraction(3)), P)
        assert face.exact and face.minimizer == (Fraction(1, 2), Fraction(1))
        assert face.squared_distance == 4
        corner = geometry.qp_project((Fraction(3), Fraction(3)), P)
        assert corner.exact and corner.minimizer == (1, 1)
        assert corner.squared_distance == 8

    def test_kkt_residual_small(self):
        rng = random.Random(3)
        for _ in range(20):
            lo, hi = Fraction(rng.randint(-3, 0)), Fraction(rng.randint(1, 3))
            P = Polyhedron(square(lo, hi).constraints + (row([1, 1], GE, lo + hi),), 2)
            x = (Fraction(rng.randint(-8, 8), 2), Fraction(rng.randint(-8, 8), 2))
            p = geometry.qp_project(x, P)
            assert p.kkt_residual <= 1e-9
            assert P.contains(p.minimizer)
            # no vertex of a coarse grid inside P is closer
            best = min(
                (float(x[0]) - i / 8) ** 2 + (float(x[1]) - j / 8) ** 2
                for i in range(-40, 41)
                for j in range(-40, 41)
                if P.contains((Fraction(i, 8), Fraction(j, 8)))
            )
            assert float(p.squared_distance) <= best + 1e-9
            assert math.sqrt(best) - math.sqrt(float(p.squared_distance)) <= 0.2


class TestInteriorDirection:
    def test_points_into_open_region(self):
        closure = Polyhedron((row([1, 0], GE, 0), row([0, 1], GE, 0)), 2)
        y = (Fraction(0), Fraction(0))
        beta = geometry.interior_direction_exact(closure, y)
        assert all(v > 0 for v in beta)
