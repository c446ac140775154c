from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

import pytest

from knnxai.core import BOOLEAN, RATIONAL, LabeledDataset

ACCEPTANCE_RESULTS: dict = {}

CUBE_POS = [(0, 1, 1), (1, 0, 1), (1, 1, 1)]
CUBE_NEG = [v for v in product((0, 1), repeat=3) if v not in CUBE_POS]


def cube_dataset() -> LabeledDataset:
    return LabeledDataset.from_points(CUBE_POS, CUBE_NEG, domain=BOOLEAN)


def random_boolean_dataset(rng: random.Random, n: int, npos: int, nneg: int) -> LabeledDataset:
    pos = [tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(npos)]
    neg = [tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(nneg)]
    return LabeledDataset(n, BOOLEAN, tuple(pos), tuple(neg))


def random_rational_dataset(rng: random.Random, n: int, npos: int, nneg: int, lo: int = 0, hi: int = 4,
                            den: int = 1) -> LabeledDataset:
    def pt():
        return tuple(Fraction(rng.randint(lo * den, hi * den), den) for _ in range(n))

    return LabeledDataset(n, RATIONAL, tuple(pt() for _ in range(npos)), tuple(pt() for _ in range(nneg)))


@pytest.fixture
def cube():
    return cube_dataset()


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        line = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(line)
