"""Labelled datasets with their distances and the optimistic k-NN classifier.

Vectors are plain tuples.  Boolean vectors hold ``0``/``1`` ints; rational
vectors hold :class:`fractions.Fraction` so that distance ties survive
arithmetic untouched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import DimensionMismatch, DomainMismatch, InputError

BOOLEAN = "boolean"
RATIONAL = "rational"


def as_rational(value) -> Fraction:
    """Exact conversion of ints, decimal strings, Decimals and Fractions."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, (str, Decimal)):
        try:
            return Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational literal: {value!r}") from exc
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputError(f"non-finite coordinate {value!r}")
        # exact binary expansion; callers that care pass strings instead
        return Fraction(value)
    try:
        return Fraction(value)
    except TypeError as exc:
        raise InputError(f"cannot interpret {value!r} as a rational") from exc


def as_bit(value) -> int:
    if isinstance(value, str):
        value = value.strip()
        if value in ("0", "1"):
            return int(value)
        try:
            value = Fraction(value)
        except ValueError as exc:
            raise DomainMismatch(f"boolean coordinate expected, got {value!r}") from exc
    if value == 0 or value == 1:
        return int(value)
    raise DomainMismatch(f"boolean coordinate expected, got {value!r}")


def to_vector(values: Iterable, domain: str) -> tuple:
    if domain == BOOLEAN:
        return tuple(as_bit(v) for v in values)
    if domain == RATIONAL:
        return tuple(as_rational(v) for v in values)
    raise InputError(f"unknown domain {domain!r}")


@dataclass(frozen=True)
class MetricSpec:
    """Either the Hamming distance or an l_p distance with integer ``p >= 1``."""

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind == "hamming":
            if self.p is not None:
                raise InputError("hamming metric takes no exponent")
        elif self.kind == "lp":
            if not isinstance(self.p, int) or isinstance(self.p, bool) or self.p < 1:
                raise InputError(f"lp metric needs an integer p >= 1, got {self.p!r}")
        else:
            raise InputError(f"unknown metric kind {self.kind!r}")

    @classmethod
    def hamming(cls) -> "MetricSpec":
        return cls("hamming")

    @classmethod
    def lp(cls, p: int) -> "MetricSpec":
        return cls("lp", p)

    @classmethod
    def parse(cls, text: str) -> "MetricSpec":
        t = text.strip().lower()
        if t == "hamming":
            return cls.hamming()
        if t in ("l1", "l2"):
            return cls.lp(int(t[1]))
        if t.startswith("lp:"):
            try:
                return cls.lp(int(t[3:]))
            except ValueError as exc:
                raise InputError(f"bad metric {text!r}") from exc
        raise InputError(f"bad metric {text!r}; use hamming, l1, l2 or lp:<p>")

    @property
    def domain(self) -> str:
        return BOOLEAN if self.kind == "hamming" else RATIONAL

    def __str__(self) -> str:
        if self.kind == "hamming":
            return "hamming"
        return f"l{self.p}" if self.p in (1, 2) else f"lp:{self.p}"


HAMMING = MetricSpec.hamming()
L1 = MetricSpec.lp(1)
L2 = MetricSpec.lp(2)


@dataclass(frozen=True)
class LabeledDataset:
    """Positive and negative examples over a shared dimension and domain."""

    dimension: int
    domain: str
    positives: tuple = ()
    negatives: tuple = ()

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dimension!r}")
        if self.domain not in (BOOLEAN, RATIONAL):
            raise InputError(f"unknown domain {self.domain!r}")
        for name in ("positives", "negatives"):
            vecs = []
            for row, v in enumerate(getattr(self, name)):
                v = tuple(v)
                if len(v) != self.dimension:
                    raise DimensionMismatch(
                        f"{name}[{row}] has length {len(v)}, expected {self.dimension}"
                    )
                vecs.append(to_vector(v, self.domain))
            object.__setattr__(self, name, tuple(vecs))

    @classmethod
    def from_points(cls, positives: Sequence, negatives: Sequence, domain: str | None = None):
        pts = list(positives) + list(negatives)
        if not pts:
            raise InputError("dataset has no points")
        n = len(pts[0])
        if domain is None:
            domain = BOOLEAN if all(c in (0, 1) and not isinstance(c, (Fraction, float)) for p in pts for c in p) else RATIONAL
        return cls(n, domain, tuple(positives), tuple(negatives))

    @property
    def size(self) -> int:
        return len(self.positives) + len(self.negatives)

    def labeled_points(self) -> list[tuple[tuple, int]]:
        return [(p, 1) for p in self.positives] + [(q, 0) for q in self.negatives]

    def swapped(self) -> "LabeledDataset":
        return LabeledDataset(self.dimension, self.domain, self.negatives, self.positives)

    def permuted(self, perm: Sequence[int]) -> "LabeledDataset":
        def apply(v):
            return tuple(v[j] for j in perm)

        return LabeledDataset(
            self.dimension,
            self.domain,
            tuple(apply(v) for v in self.positives),
            tuple(apply(v) for v in self.negatives),
        )

    def check_vector(self, x: Sequence) -> tuple:
        if len(x) != self.dimension:
            raise DimensionMismatch(f"vector has length {len(x)}, expected {self.dimension}")
        return to_vector(x, self.domain)


def check_metric(ds: LabeledDataset, m: MetricSpec) -> None:
    if m.domain != ds.domain:
        raise DomainMismatch(f"metric {m} cannot be used with a {ds.domain} dataset")


def check_k(k: int, n_points: int | None = None) -> None:
    if not isinstance(k, int) or isinstance(k, bool) or k < 1 or k % 2 == 0:
        raise InputError(f"k must be an odd integer >= 1, got {k!r}")
    if n_points is not None and n_points < k:
        raise InputError(f"need at least k={k} training points, have {n_points}")


def distance(x: Sequence, y: Sequence, m: MetricSpec, powered: bool = False):
    """Distance between ``x`` and ``y``.

    For l_p with ``powered=True`` the p-th power of the norm is returned; it
    orders points identically and stays rational.  Without the flag, p >= 2
    yields a float.
    """
    if len(x) != len(y):
        raise DimensionMismatch(f"lengths {len(x)} and {len(y)} differ")
    if m.kind == "hamming":
        for v in (x, y):
            for c in v:
                if c != 0 and c != 1:
                    raise DomainMismatch(f"hamming distance on non-boolean value {c!r}")
        return sum(1 for a, b in zip(x, y) if a != b)
    xs = [as_rational(a) for a in x]
    ys = [as_rational(b) for b in y]
    s = _lp_powered(xs, ys, m.p)
    if powered or m.p == 1:
        return s
    return float(s) ** (1.0 / m.p)


def _lp_powered(x, y, p):
    if p == 1:
        return sum((abs(a - b) for a, b in zip(x, y)), Fraction(0))
    if p == 2:
        s = Fraction(0)
        for a, b in zip(x, y):
            d = a - b
            s += d * d
        return s
    return sum((abs(a - b) ** p for a, b in zip(x, y)), Fraction(0))


def _hamming(x, y):
    return sum(1 for a, b in zip(x, y) if a != b)


def order_distance(x, y, m: MetricSpec):
    """Order-preserving distance used for all classification decisions."""
    if m.kind == "hamming":
        return _hamming(x, y)
    return _lp_powered(x, y, m.p)


def label_from_distances(pos: Sequence, neg: Sequence, k: int) -> int:
    """Optimistic k-NN label from the positive and negative distance lists."""
    allp = sorted(list(pos) + list(neg))
    dk = allp[k - 1]
    below = sum(1 for d in allp if d < dk)
    pos_below = sum(1 for d in pos if d < dk)
    pos_at = sum(1 for d in pos if d == dk)
    return 1 if pos_below + min(pos_at, k - below) >= (k + 1) // 2 else 0


@dataclass(frozen=True)
class NeighborProfile:
    """Tie structure around the k-th smallest distance."""

    neighbors: tuple  # sorted (distance, label) pairs
    threshold: object
    positives_below: int
    positives_at: int
    free_slots: int
    label: int = field(default=0)


def neighbor_profile(ds: LabeledDataset, m: MetricSpec, k: int, x: Sequence) -> NeighborProfile:
    check_metric(ds, m)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    pairs = sorted(
        [(order_distance(x, p, m), 1) for p in ds.positives]
        + [(order_distance(x, q, m), 0) for q in ds.negatives],
        key=lambda t: (t[0], -t[1]),
    )
    dk = pairs[k - 1][0]
    below = sum(1 for d, _ in pairs if d < dk)
    pos_below = sum(1 for d, lab in pairs if d < dk and lab == 1)
    pos_at = sum(1 for d, lab in pairs if d == dk and lab == 1)
    free = k - below
    label = 1 if pos_below + min(pos_at, free) >= (k + 1) // 2 else 0
    return NeighborProfile(tuple(pairs), dk, pos_below, pos_at, free, label)


def classify_optimistic(ds: LabeledDataset, m: MetricSpec, k: int, x: Sequence) -> int:
    """Optimistic k-NN label of ``x``: ties at the k-th distance favour label 1."""
    check_metric(ds, m)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    return _classify(ds, m, k, x)


def _classify(ds, m, k, x) -> int:
    # unchecked fast path for callers that already validated their inputs
    pos = [order_distance(x, p, m) for p in ds.positives]
    neg = [order_distance(x, q, m) for q in ds.negatives]
    return label_from_distances(pos, neg, k)


def classify_by_subsets(ds: LabeledDataset, m: MetricSpec, k: int, x: Sequence) -> int:
    """Label via explicit enumeration of the (A, B) subset pairs.

    Exponential in k; exists as a cross-check for :func:`classify_optimistic`.
    """
    check_metric(ds, m)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    half = (k + 1) // 2
    dpos = [order_distance(x, p, m) for p in ds.positives]
    dneg = [order_distance(x, q, m) for q in ds.negatives]
    for A in combinations(range(len(dpos)), half):
        worst = max(dpos[a] for a in A)
        for size in range((k - 1) // 2 + 1):
            for B in combinations(range(len(dneg)), size):
                rest = [dneg[c] for c in range(len(dneg)) if c not in B]
                if all(worst <= d for d in rest):
                    return 1
    return 0


def hybrid(x: Sequence, other: Sequence, fixed: Iterable[int]) -> tuple:
    """``x`` on the ``fixed`` coordinates, ``other`` everywhere else."""
    fixed = set(fixed)
    return tuple(x[i] if i in fixed else other[i] for i in range(len(x)))
