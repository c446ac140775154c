import random
from fractions import Fraction

import pytest

from conftest import random_boolean_dataset, random_rational_dataset
from knnxai.abductive import (
    FeatureSet,
    check_sr_bruteforce,
    check_sr_hamming_k1,
    check_sr_l1_k1,
    check_sr_l2,
    checker_for,
    minimal_sr,
    minimum_sr_exact,
)
from knnxai.core import HAMMING, L1, L2, LabeledDataset, MetricSpec, classify_optimistic
from knnxai.errors import InputError, ResourceLimit, UnsupportedSetting

ZERO = (0, 0, 0)


class TestFeatureSet:
    def test_normalises_and_validates(self):
        X = FeatureSet((2, 0), 3)
        assert tuple(X) == (0, 2) and len(X) == 2
        assert X.one_based() == [1, 3]
        assert X.complement() == (1,)
        assert 2 in X and 1 not in X
        assert tuple(X.without(0)) == (2,)
        with pytest.raises(InputError):
            FeatureSet((3,), 3)
        with pytest.raises(InputError):
            FeatureSet((1, 1), 3)

    def test_full(self):
        assert tuple(FeatureSet.full(3)) == (0, 1, 2)


class TestCubeDataset:
    def test_sufficient_sets(self, cube):
        assert check_sr_hamming_k1(cube, ZERO, FeatureSet((0, 1), 3)).sufficient
        assert check_sr_hamming_k1(cube, ZERO, FeatureSet((2,), 3)).sufficient

    @pytest.mark.parametrize("X", [(0,), (1,), ()])
    def test_insufficient_sets_have_counterexamples(self, cube, X):
        v = check_sr_hamming_k1(cube, ZERO, FeatureSet(X, 3))
        assert not v.sufficient
        z = v.counterexample
        assert all(z[i] == 0 for i in X)
        assert classify_optimistic(cube, HAMMING, 1, z) == 1

    def test_minimal_drop_orders(self, cube):
        assert tuple(minimal_sr(cube, HAMMING, 1, ZERO)) == (0, 1)
        assert tuple(minimal_sr(cube, HAMMING, 1, ZERO, order=[0, 1, 2])) == (2,)

    def test_minimum(self, cube):
        assert tuple(minimum_sr_exact(cube, HAMMING, 1, ZERO, 1)) == (2,)
        assert minimum_sr_exact(cube, HAMMING, 1, ZERO, 0) is None

    def test_minimum_with_threads_is_identical(self, cube):
        a = minimum_sr_exact(cube, HAMMING, 1, ZERO, 3, threads=1)
        b = minimum_sr_exact(cube, HAMMING, 1, ZERO, 3, threads=4)
        assert a == b

    def test_bad_order(self, cube):
        with pytest.raises(InputError):
            minimal_sr(cube, HAMMING, 1, ZERO, order=[0, 0, 1])


def test_full_set_always_sufficient():
    rng = random.Random(1)
    for _ in range(30):
        ds = random_boolean_dataset(rng, 5, 3, 3)
        x = tuple(rng.randint(0, 1) for _ in range(5))
        assert check_sr_hamming_k1(ds, x, FeatureSet.full(5)).sufficient


def test_monotone_under_supersets():
    rng = random.Random(2)
    for _ in range(40):
        ds = random_boolean_dataset(rng, 6, 4, 4)
        x = tuple(rng.randint(0, 1) for _ in range(6))
        X = FeatureSet(tuple(i for i in range(6) if rng.random() < 0.4), 6)
        if check_sr_hamming_k1(ds, x, X).sufficient:
            for j in X.complement():
                assert check_sr_hamming_k1(ds, x, FeatureSet(tuple(X) + (j,), 6)).sufficient


@pytest.mark.parametrize("k", [1, 3])
def test_l2_checker_matches_grid_refutation(k):
    # a counterexample, when claimed, must be real; a sufficiency claim survives random probes
    rng = random.Random(30 + k)
    for _ in range(25):
        ds = random_rational_dataset(rng, 2, rng.randint(1, 3), rng.randint(1, 3), 0, 4)
        if ds.size < k:
            continue
        x = tuple(Fraction(rng.randint(0, 8), 2) for _ in range(2))
        X = FeatureSet(tuple(i for i in range(2) if rng.random() < 0.5), 2)
        v = check_sr_l2(ds, k, x, X)
        label = classify_optimistic(ds, L2, k, x)
        if v.sufficient:
            free = X.complement()
            for _ in range(200):
                z = list(x)
                for i in free:
                    z[i] = Fraction(rng.randint(-40, 80), 8)
                assert classify_optimistic(ds, L2, k, z) == label
        else:
            z = v.counterexample
            assert all(z[i] == x[i] for i in X)
            assert classify_optimistic(ds, L2, k, z) != label


def test_l1_checker_counterexamples_and_probes():
    rng = random.Random(40)
    for _ in range(30):
        ds = random_rational_dataset(rng, 3, rng.randint(1, 3), rng.randint(1, 3), 0, 3)
        x = tuple(Fraction(rng.randint(0, 6), 2) for _ in range(3))
        X = FeatureSet(tuple(i for i in range(3) if rng.random() < 0.5), 3)
        v = check_sr_l1_k1(ds, x, X)
        label = classify_optimistic(ds, L1, 1, x)
        if v.sufficient:
            for _ in range(200):
                z = list(x)
                for i in X.complement():
                    z[i] = Fraction(rng.randint(-8, 32), 4)
                assert classify_optimistic(ds, L1, 1, z) == label
        else:
            z = v.counterexample
            assert all(z[i] == x[i] for i in X)
            assert classify_optimistic(ds, L1, 1, z) != label


def test_l2_tie_on_the_bisector_counts_as_positive():
    # y1 = 1 puts every completion on the bisector -> label 1 everywhere
    ds = LabeledDataset.from_points([(Fraction(2), Fraction(0))], [(Fraction(0), Fraction(0))])
    x = (Fraction(1), Fraction(5))
    assert check_sr_l2(ds, 1, x, FeatureSet((0,), 2)).sufficient
    x0 = (Fraction(1, 2), Fraction(5))
    assert check_sr_l2(ds, 1, x0, FeatureSet((0,), 2)).sufficient
    assert not check_sr_l2(ds, 1, x0, FeatureSet((1,), 2)).sufficient


def test_checker_dispatch():
    assert checker_for(HAMMING, 1) is not None
    assert checker_for(L2, 3) is not None
    with pytest.raises(UnsupportedSetting):
        checker_for(L1, 3)
    with pytest.raises(UnsupportedSetting):
        checker_for(MetricSpec.lp(3), 1)


def test_bruteforce_cap():
    ds = LabeledDataset.from_points([(0,) * 21], [(1,) * 21])
    with pytest.raises(ResourceLimit):
        check_sr_bruteforce(ds, HAMMING, 1, (0,) * 21, FeatureSet((), 21))


def test_hamming_k3_via_bruteforce_checker(cube):
    X = minimal_sr(cube, HAMMING, 3, ZERO)
    assert check_sr_bruteforce(cube, HAMMING, 3, ZERO, X).sufficient
