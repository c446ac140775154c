import random
import re
from pathlib import Path

import pytest

from conftest import random_boolean_dataset
from knnxai.core import LabeledDataset
from knnxai.counterfactual import cf_hamming_exact, emit_mip_cf_discrete, mip_available, solve_mip_cf_discrete
from knnxai.errors import PreconditionError

GOLDEN = Path(__file__).parent / "golden" / "mip_two_point.lp"
needs_scip = pytest.mark.skipif(not mip_available(), reason="pyscipopt not installed")


def test_two_point_model_matches_golden():
    ds = LabeledDataset.from_points([(1, 0)], [(0, 1)])
    assert emit_mip_cf_discrete(ds, (1, 0)) == GOLDEN.read_text()


def test_emission_is_deterministic(cube):
    assert emit_mip_cf_discrete(cube, (0, 0, 0)) == emit_mip_cf_discrete(cube, (0, 0, 0))


def test_one_indicator_per_training_point(cube):
    text = emit_mip_cf_discrete(cube, (0, 0, 0))
    binaries = text.split("Binaries")[1].split("End")[0].split()
    assert sorted(b for b in binaries if b.startswith("vp")) == [f"vp{i}" for i in range(1, 4)]
    assert len([b for b in binaries if b.startswith("vn")]) == 5
    assert len([b for b in binaries if b.startswith("y")]) == 3
    assert len(re.findall(r"^ pin_", text, re.M)) == 8
    assert len(re.findall(r"^ low_", text, re.M)) == 8


def test_flip_direction_depends_on_label(cube):
    # x = (0,0,0) is negative: reach a positive with ties allowed
    assert " flip: dp - dn <= 0" in emit_mip_cf_discrete(cube, (0, 0, 0))
    assert " flip: dn - dp <= -1" in emit_mip_cf_discrete(cube, (1, 1, 1))


def test_needs_both_classes():
    with pytest.raises(PreconditionError):
        emit_mip_cf_discrete(LabeledDataset.from_points([(1, 0)], []), (0, 0))


@needs_scip
def test_scip_solves_golden_instance():
    ds = LabeledDataset.from_points([(1, 0)], [(0, 1)])
    res = solve_mip_cf_discrete(ds, (1, 0))
    # both one-bit flips tie, and ties keep label 1
    assert res.exists and res.distance == 2 and res.witness == (0, 1)


@needs_scip
def test_scip_agrees_with_exact_search(cube):
    res = solve_mip_cf_discrete(cube, (0, 0, 0))
    assert res.distance == 2
    assert not solve_mip_cf_discrete(cube, (0, 0, 0), budget=1).exists
    rng = random.Random(6)
    for _ in range(10):
        n = rng.randint(2, 7)
        ds = random_boolean_dataset(rng, n, rng.randint(1, 4), rng.randint(1, 4))
        x = tuple(rng.randint(0, 1) for _ in range(n))
        a, b = cf_hamming_exact(ds, 1, x, n), solve_mip_cf_discrete(ds, x)
        assert a.exists == b.exists and a.distance == b.distance
