import random
import sys
import textwrap
from fractions import Fraction
from itertools import product

import pytest

from conftest import random_boolean_dataset, random_rational_dataset
from knnxai.core import HAMMING, L1, L2, LabeledDataset, classify_optimistic, distance
from knnxai.counterfactual import (
    CardinalityConstraint,
    CnfFormula,
    DpllSolver,
    ExternalSolver,
    cardinality_to_cnf,
    cf_hamming_exact,
    cf_l1_oracle,
    cf_l2,
    enumerate_projections,
    parse_dimacs,
    parse_knf,
    sat_encode_cf_1nn,
    sat_solve_cf_1nn,
)
from knnxai.errors import BackendError, InputError, ResourceLimit

ZERO = (0, 0, 0)


class TestHamming:
    def test_cube_distances(self, cube):
        assert not cf_hamming_exact(cube, 1, ZERO, 1).exists
        res = cf_hamming_exact(cube, 1, ZERO, 3)
        assert res.exists and res.distance == 2
        assert res.witness == (1, 0, 1)

    def test_zero_budget(self, cube):
        assert not cf_hamming_exact(cube, 1, ZERO, 0).exists

    def test_first_hit_is_minimal(self):
        rng = random.Random(8)
        for _ in range(40):
            ds = random_boolean_dataset(rng, 6, 3, 3)
            x = tuple(rng.randint(0, 1) for _ in range(6))
            for k in (1, 3):
                label = classify_optimistic(ds, HAMMING, k, x)
                brute = [distance(x, y, HAMMING) for y in product((0, 1), repeat=6)
                         if classify_optimistic(ds, HAMMING, k, y) != label]
                res = cf_hamming_exact(ds, k, x, 6)
                assert res.exists == bool(brute)
                if brute:
                    assert res.distance == min(brute)

    def test_node_cap(self):
        ds = LabeledDataset.from_points([(1,) * 12], [(0,) * 12])
        with pytest.raises(ResourceLimit):
            cf_hamming_exact(ds, 1, (0,) * 12, 12, node_cap=10)


class TestCardinality:
    @pytest.mark.parametrize("n,b", [(1, 1), (3, 1), (3, 2), (3, 3), (4, 2), (5, 3), (5, 0)])
    def test_sequential_counter_is_equivalent(self, n, b):
        lits = tuple(range(1, n + 1))
        c = CardinalityConstraint(lits, b, guard=n + 1)
        clauses, nxt = cardinality_to_cnf(c, n + 2)
        f = CnfFormula(nxt - 1, clauses)
        got = enumerate_projections(f, list(range(1, n + 2)))
        want = {v for v in product((0, 1), repeat=n + 1) if not v[n] or sum(v[:n]) >= b}
        assert got == want

    def test_bounds_validated(self):
        with pytest.raises(InputError):
            CardinalityConstraint((1, 2), 3)
        with pytest.raises(InputError):
            CardinalityConstraint((0, 2), 1)


class TestFormats:
    def test_dimacs_round_trip(self, cube):
        f = sat_encode_cf_1nn(cube, ZERO, 2).expanded()
        g = parse_dimacs(f.to_dimacs())
        assert g.num_vars == f.num_vars
        assert [tuple(c) for c in g.clauses] == [tuple(c) for c in f.clauses]

    def test_knf_round_trip(self, cube):
        f = sat_encode_cf_1nn(cube, ZERO, 2)
        g = parse_knf(f.to_knf())
        assert g.num_vars == f.num_vars
        assert len(g.cardinality) == len(f.cardinality)
        assert enumerate_projections(g, [1, 2, 3]) == enumerate_projections(f, [1, 2, 3])

    def test_bad_dimacs(self):
        with pytest.raises(InputError):
            parse_dimacs("p cnf 2 1\n1 3 0\n")


class TestDpll:
    def test_sat_and_unsat(self):
        s = DpllSolver()
        ok, model = s.solve(CnfFormula(2, [(1, 2), (-1,)]))
        assert ok and model[2] and not model[1]
        ok, _ = s.solve(CnfFormula(1, [(1,), (-1,)]))
        assert not ok

    def test_pigeonhole_three_into_two(self):
        # p_{i,j}: pigeon i in hole j
        v = lambda i, j: 2 * i + j + 1  # noqa: E731
        clauses = [(v(i, 0), v(i, 1)) for i in range(3)]
        for j in range(2):
            for a in range(3):
                for b in range(a + 1, 3):
                    clauses.append((-v(a, j), -v(b, j)))
        assert not DpllSolver().solve(CnfFormula(6, clauses))[0]

    def test_cardinality_propagation(self):
        f = CnfFormula(3, [], [CardinalityConstraint((1, 2, 3), 3)])
        ok, model = DpllSolver().solve(f)
        assert ok and all(model[1:4])


class TestSatPipeline:
    def test_cube(self, cube):
        res = sat_solve_cf_1nn(cube, ZERO, 3)
        assert res.exists and res.distance == 2
        assert not sat_solve_cf_1nn(cube, ZERO, 1).exists

    def test_agrees_with_exact_search(self):
        rng = random.Random(21)
        for _ in range(40):
            n = rng.randint(1, 8)
            ds = random_boolean_dataset(rng, n, rng.randint(1, 5), rng.randint(1, 5))
            x = tuple(rng.randint(0, 1) for _ in range(n))
            a, b = cf_hamming_exact(ds, 1, x, n), sat_solve_cf_1nn(ds, x, n)
            assert a.exists == b.exists and a.distance == b.distance


STUB = textwrap.dedent(
    """
    import itertools, sys
    lines = open(sys.argv[1]).read().split("\\n")
    clauses, n = [], 0
    for ln in lines:
        t = ln.split()
        if not t or t[0] == "c":
            continue
        if t[0] == "p":
            n = int(t[2])
            continue
        clauses.append([int(v) for v in t[:-1]])
    for bits in itertools.product((False, True), repeat=n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            print("s SATISFIABLE")
            print("v " + " ".join(str(i + 1 if b else -(i + 1)) for i, b in enumerate(bits)) + " 0")
            sys.exit(10)
    print("s UNSATISFIABLE")
    sys.exit(20)
    """
)


class TestExternalSolver:
    def test_stub_solver_agrees(self, tmp_path, cube):
        script = tmp_path / "stub.py"
        script.write_text(STUB)
        ext = ExternalSolver([sys.executable, str(script)])
        res = sat_solve_cf_1nn(cube, ZERO, 2, backend=ext)
        assert res.exists and res.distance == 2
        assert ext.stats["calls"] >= 1

    def test_broken_solver_raises(self, tmp_path, cube):
        script = tmp_path / "broken.py"
        script.write_text("print('hello')\n")
        ext = ExternalSolver([sys.executable, str(script)])
        with pytest.raises(BackendError):
            sat_solve_cf_1nn(cube, ZERO, 2, backend=ext)

    def test_missing_binary(self, cube):
        ext = ExternalSolver(["/nonexistent/solver"])
        with pytest.raises(BackendError):
            sat_solve_cf_1nn(cube, ZERO, 2, backend=ext)


class TestL2:
    def test_one_dimensional_tie(self):
        ds = LabeledDataset.from_points([(Fraction(2),)], [(Fraction(0),)])
        res = cf_l2(ds, 1, (Fraction(0),), 2)
        assert res.exists and res.witness == (Fraction(1),)
        assert abs(res.distance - 1) < 1e-12

    def test_open_target_moves_past_bisector(self):
        ds = LabeledDataset.from_points([(Fraction(0),)], [(Fraction(2),)])
        res = cf_l2(ds, 1, (Fraction(0),), 2)
        assert res.exists
        assert res.witness[0] > 1 and res.distance - 1 < 1e-5
        assert classify_optimistic(ds, L2, 1, res.witness) == 0

    def test_budget_too_small(self):
        ds = LabeledDataset.from_points([(Fraction(2),)], [(Fraction(0),)])
        assert not cf_l2(ds, 1, (Fraction(0),), Fraction(1, 2)).exists

    def test_witnesses_validate(self):
        rng = random.Random(4)
        for _ in range(30):
            ds = random_rational_dataset(rng, 3, rng.randint(1, 3), rng.randint(1, 3), 0, 3)
            x = tuple(Fraction(rng.randint(0, 6), 2) for _ in range(3))
            res = cf_l2(ds, 1, x, 2)
            if res.exists:
                assert classify_optimistic(ds, L2, 1, res.witness) != classify_optimistic(ds, L2, 1, x)
                assert distance(x, res.witness, L2, powered=True) <= 4


class TestL1:
    def test_grid_alone_misses_the_midpoint(self):
        ds = LabeledDataset.from_points([(Fraction(3),)], [(Fraction(1),)])
        exact = cf_l1_oracle(ds, 1, (Fraction(0),), 5)
        grid = cf_l1_oracle(ds, 1, (Fraction(0),), 5, refine=False)
        assert exact.distance == 2 and exact.witness == (Fraction(2),)
        assert grid.distance == 3
        assert exact.provenance["certified"]

    def test_open_target_reports_infimum(self):
        ds = LabeledDataset.from_points([(Fraction(0),)], [(Fraction(2),)])
        res = cf_l1_oracle(ds, 1, (Fraction(0),), 2)
        assert res.exists and Fraction(res.provenance["infimum"]) == 1
        assert 1 < res.distance <= 1 + Fraction(1, 10**8)

    def test_dense_grid_agreement_in_the_plane(self):
        rng = random.Random(13)
        for _ in range(20):
            ds = random_rational_dataset(rng, 2, rng.randint(1, 3), rng.randint(1, 3), 0, 4)
            x = tuple(Fraction(rng.randint(0, 8), 2) for _ in range(2))
            ell = Fraction(3)
            res = cf_l1_oracle(ds, 1, x, ell)
            label = classify_optimistic(ds, L1, 1, x)
            best = None
            for i in range(-24, 25):
                for j in range(-24, 25):
                    y = (x[0] + Fraction(i, 8), x[1] + Fraction(j, 8))
                    d = distance(x, y, L1)
                    if d <= ell and classify_optimistic(ds, L1, 1, y) != label:
                        best = d if best is None else min(best, d)
            if res.exists:
                assert best is None or res.distance <= best + Fraction(1, 10**8)
                # every grid miss is within one grid step of the exact answer
                assert best is None or best - res.distance <= Fraction(1, 4)
            else:
                assert best is None

    def test_monotone_in_budget(self):
        rng = random.Random(17)
        for _ in range(15):
            ds = random_rational_dataset(rng, 2, 2, 2, 0, 4)
            x = tuple(Fraction(rng.randint(0, 4)) for _ in range(2))
            seen = False
            for ell in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4), Fraction(8)):
                res = cf_l1_oracle(ds, 1, x, ell)
                assert not (seen and not res.exists)
                seen = seen or res.exists

    def test_grid_budget(self):
        ds = LabeledDataset.from_points([tuple(Fraction(i) for i in range(8))], [tuple(Fraction(-i) for i in range(8))])
        with pytest.raises(ResourceLimit):
            cf_l1_oracle(ds, 1, (Fraction(0),) * 8, 3, grid_budget=10)
