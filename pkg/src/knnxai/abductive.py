"""Sufficient reasons: checking, greedy minimal sets, exact minimum sets.

Feature indices are 0-based throughout the library.  A set X is sufficient
for x when every vector agreeing with x on X receives x's label.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from . import geometry
from .core import (
    BOOLEAN,
    RATIONAL,
    LabeledDataset,
    MetricSpec,
    _classify,
    check_k,
    check_metric,
    hybrid,
    order_distance,
)
from .errors import InputError, InternalError, ResourceLimit, UnsupportedSetting
from . import kernels

MAX_BRUTEFORCE_FREE = 20
MAX_MINIMUM_FEATURES = 24


@dataclass(frozen=True)
class FeatureSet:
    indices: tuple
    dimension: int

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if len(idx) != len(tuple(self.indices)):
            raise InputError("feature set has duplicate indices")
        for i in idx:
            if not 0 <= i < self.dimension:
                raise InputError(f"feature index {i} outside 0..{self.dimension - 1}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def full(cls, n: int) -> "FeatureSet":
        return cls(tuple(range(n)), n)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        return i in self.indices

    def without(self, i: int) -> "FeatureSet":
        return FeatureSet(tuple(j for j in self.indices if j != i), self.dimension)

    def complement(self) -> tuple:
        s = set(self.indices)
        return tuple(i for i in range(self.dimension) if i not in s)

    def one_based(self) -> list:
        return [i + 1 for i in self.indices]


@dataclass(frozen=True)
class SufficiencyVerdict:
    sufficient: bool
    counterexample: tuple | None = None
    stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.sufficient == (self.counterexample is not None):
            raise InternalError("counterexample must be present iff the set is not sufficient")


def _features(X, n: int) -> FeatureSet:
    if isinstance(X, FeatureSet):
        if X.dimension != n:
            raise InputError("feature set dimension does not match the dataset")
        return X
    return FeatureSet(tuple(X), n)


def _prepare(ds, m, k, x, X):
    check_metric(ds, m)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    return x, _features(X, ds.dimension)


def _refute(ds, m, k, x, X, z, label, stats) -> SufficiencyVerdict:
    z = tuple(z)
    if any(z[i] != x[i] for i in X):
        raise InternalError("counterexample disagrees with x on the fixed features")
    if _classify(ds, m, k, z) == label:
        raise InternalError("counterexample does not change the label")
    return SufficiencyVerdict(False, z, stats)


# ---------------------------------------------------------------- l2


def _reduced_rows(same, other, x, fixed, free, sense):
    """Bisector rows with the fixed coordinates substituted.

    Returns ``rows[a][c]`` as ``(coeffs over free, rhs)`` or the constant
    truth value when no free coefficient survives.
    """
    rows = []
    for a in same:
        per = []
        for c in other:
            diff = [p - q for p, q in zip(a, c)]
            rhs = (sum(p * p for p in a) - sum(q * q for q in c)) / 2
            for i in fixed:
                if diff[i]:
                    rhs -= diff[i] * x[i]
            coeffs = tuple(diff[i] for i in free)
            if any(coeffs):
                per.append((coeffs, rhs))
            else:
                per.append(Fraction(0) > rhs if sense == geometry.GT else Fraction(0) >= rhs)
        rows.append(per)
    return rows


def check_sr_l2(ds: LabeledDataset, k: int, x: Sequence, X, stats: dict | None = None) -> SufficiencyVerdict:
    """Exact sufficiency check under l2 by LP feasibility on every opposite cell.

    Fixing the coordinates in X turns each cell into a polyhedron over the
    free coordinates; X is sufficient iff all of them are empty.
    """
    m = MetricSpec.lp(2)
    if ds.domain != RATIONAL:
        raise InputError("check_sr_l2 needs a rational dataset")
    x, X = _prepare(ds, m, k, x, X)
    st = stats if stats is not None else {}
    st.setdefault("cells", 0)
    st.setdefault("lp_calls", 0)
    label = _classify(ds, m, k, x)
    target = 1 - label
    fixed = X.indices
    free = X.complement()
    # cheap falsifiers: x glued onto each training point
    for v in (ds.positives if target == 1 else ds.negatives) + (ds.negatives if target == 1 else ds.positives):
        z = hybrid(x, v, fixed)
        if _classify(ds, m, k, z) == target:
            st["heuristic_hit"] = True
            return _refute(ds, m, k, x, fixed, z, label, st)
    if not free:
        return SufficiencyVerdict(True, None, st)
    sense = geometry.GE if target == 1 else geometry.GT
    same, other = (ds.positives, ds.negatives) if target == 1 else (ds.negatives, ds.positives)
    rows = _reduced_rows(same, other, x, fixed, free, sense)
    half = (k + 1) // 2
    cap = min((k - 1) // 2, len(other))
    nf = len(free)
    for A in combinations(range(len(same)), half):
        forced = set()
        for a in A:
            for c, r in enumerate(rows[a]):
                if r is False:
                    forced.add(c)
        if len(forced) > cap:
            continue
        rest = [c for c in range(len(other)) if c not in forced]
        for extra in combinations(rest, cap - len(forced)):
            B = forced.union(extra)
            sys = []
            for a in A:
                for c, r in enumerate(rows[a]):
                    if c in B or r is True:
                        continue
                    sys.append(geometry.LinearInequality(r[0], r[1], sense))
            st["cells"] += 1
            if not sys:
                y = tuple(Fraction(0) for _ in range(nf))
            else:
                st["lp_calls"] += 1
                res = geometry.lp_feasible(geometry.Polyhedron(tuple(sys), nf))
                if not res.feasible:
                    continue
                y = res.witness
            z = list(x)
            for i, v in zip(free, y):
                z[i] = v
            st["cell"] = {"A": list(A), "B": sorted(B)}
            return _refute(ds, m, k, x, fixed, z, label, st)
    return SufficiencyVerdict(True, None, st)


# ---------------------------------------------------------------- l1, k = 1


def check_sr_l1_k1(ds: LabeledDataset, x: Sequence, X, stats: dict | None = None) -> SufficiencyVerdict:
    """l1 check for k = 1: the best completion copies one training point on the free part."""
    m = MetricSpec.lp(1)
    if ds.domain != RATIONAL:
        raise InputError("check_sr_l1_k1 needs a rational dataset")
    x, X = _prepare(ds, m, 1, x, X)
    st = stats if stats is not None else {}
    label = _classify(ds, m, 1, x)
    fixed = X.indices
    if label == 0:
        cands, rivals, strict = ds.positives, ds.negatives, False
    else:
        cands, rivals, strict = ds.negatives, ds.positives, True
    for a in cands:
        y = hybrid(x, a, fixed)
        da = order_distance(y, a, m)
        if all((da < order_distance(y, c, m)) if strict else (da <= order_distance(y, c, m)) for c in rivals):
            return _refute(ds, m, 1, x, fixed, y, label, st)
    return SufficiencyVerdict(True, None, st)


# ---------------------------------------------------------------- hamming


def to_mask(v: Sequence) -> int:
    m = 0
    for i, b in enumerate(v):
        if b:
            m |= 1 << i
    return m


def from_mask(mask: int, n: int) -> tuple:
    return tuple((mask >> i) & 1 for i in range(n))


def _masks(ds):
    return [to_mask(p) for p in ds.positives], [to_mask(q) for q in ds.negatives]


def check_sr_hamming_k1(ds: LabeledDataset, x: Sequence, X, stats: dict | None = None,
                        backend=None) -> SufficiencyVerdict:
    """Hamming check for k = 1: only hybrids of x with opposite points need testing."""
    kb = backend or kernels.backend
    m = MetricSpec.hamming()
    x, X = _prepare(ds, m, 1, x, X)
    st = stats if stats is not None else {}
    pos, neg = _masks(ds)
    xm = to_mask(x)
    label = kb.hamming_label(xm, pos, neg, 1)
    fmask = to_mask([1 if i in X else 0 for i in range(ds.dimension)])
    for o in (neg if label == 1 else pos):
        z = (xm & fmask) | (o & ~fmask)
        if kb.hamming_label(z, pos, neg, 1) != label:
            return _refute(ds, m, 1, x, X.indices, from_mask(z, ds.dimension), label, st)
    return SufficiencyVerdict(True, None, st)


def check_sr_bruteforce(ds: LabeledDataset, m: MetricSpec, k: int, x: Sequence, X,
                        max_free: int = MAX_BRUTEFORCE_FREE, stats: dict | None = None,
                        backend=None) -> SufficiencyVerdict:
    """Definitional check on Boolean data: try every completion of the free features."""
    kb = backend or kernels.backend
    if ds.domain != BOOLEAN:
        raise InputError("the exhaustive checker works on Boolean data only")
    x, X = _prepare(ds, m, k, x, X)
    st = stats if stats is not None else {}
    free = list(X.complement())
    if len(free) > max_free:
        raise ResourceLimit(
            f"{len(free)} free features exceed the exhaustive budget of {max_free}",
            {"free": len(free), "max_free": max_free},
        )
    pos, neg = _masks(ds)
    xm = to_mask(x)
    label = kb.hamming_label(xm, pos, neg, k)
    base = xm
    for i in free:
        base &= ~(1 << i)
    found, nodes = kb.first_completion(base, free, pos, neg, k, 1 - label, 1 << len(free))
    st["completions"] = st.get("completions", 0) + nodes
    if found >= 0:
        return _refute(ds, m, k, x, X.indices, from_mask(found, ds.dimension), label, st)
    return SufficiencyVerdict(True, None, st)


# ---------------------------------------------------------------- dispatch

Checker = Callable[[LabeledDataset, MetricSpec, int, Sequence, FeatureSet], SufficiencyVerdict]


def checker_for(m: MetricSpec, k: int) -> Checker:
    """Pick the checker valid for the setting; raises UnsupportedSetting when none is known."""
    check_k(k)
    if m.kind == "hamming":
        if k == 1:
            return lambda ds, m_, k_, x, X: check_sr_hamming_k1(ds, x, X)
        return lambda ds, m_, k_, x, X: check_sr_bruteforce(ds, m_, k_, x, X)
    if m.p == 2:
        return lambda ds, m_, k_, x, X: check_sr_l2(ds, k_, x, X)
    if m.p == 1:
        if k == 1:
            return lambda ds, m_, k_, x, X: check_sr_l1_k1(ds, x, X)
        raise UnsupportedSetting("sufficient-reason checking under l1 with k >= 3 is an open problem")
    raise UnsupportedSetting(f"no sufficient-reason checker for {m}")


def minimal_sr(ds: LabeledDataset, m: MetricSpec, k: int, x: Sequence, checker: Checker | None = None,
               order: Iterable[int] | None = None, stats: dict | None = None) -> FeatureSet:
    """Greedy minimal sufficient reason.

    Starts from all features and drops them one at a time in ``order``
    (descending index by default), keeping a drop whenever the remainder is
    still sufficient.  The result is re-verified before it is returned.
    """
    check_metric(ds, m)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    n = ds.dimension
    checker = checker or checker_for(m, k)
    st = stats if stats is not None else {}
    st.setdefault("checks", 0)
    order = list(range(n - 1, -1, -1)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise InputError("drop order must be a permutation of the feature indices")
    X = FeatureSet.full(n)
    for i in order:
        cand = X.without(i)
        st["checks"] += 1
        if checker(ds, m, k, x, cand).sufficient:
            X = cand
    st["checks"] += 1
    if not checker(ds, m, k, x, X).sufficient:
        raise InternalError("greedy result is not sufficient")
    for i in X:
        st["checks"] += 1
        if checker(ds, m, k, x, X.without(i)).sufficient:
            raise InternalError(f"greedy result is not minimal: feature {i} can be dropped")
    return X


def minimum_sr_exact(ds: LabeledDataset, m: MetricSpec, k: int, x: Sequence, limit: int,
                     checker: Checker | None = None, threads: int = 1,
                     max_features: int = MAX_MINIMUM_FEATURES, stats: dict | None = None) -> FeatureSet | None:
    """Smallest sufficient reason of size at most ``limit``, or None.

    Candidates are visited by increasing size, lexicographically within a
    size, so the first sufficient set is a minimum one.  Every counterexample
    found is remembered: a later candidate contained in the features where
    that counterexample agrees with x is refuted without a checker call.
    """
    check_metric(ds, m)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    n = ds.dimension
    if n > max_features:
        raise ResourceLimit(f"{n} features exceed the subset enumeration budget of {max_features}",
                            {"features": n, "max_features": max_features})
    if limit < 0:
        return None
    checker = checker or checker_for(m, k)
    st = stats if stats is not None else {}
    st.setdefault("checks", 0)
    st.setdefault("pruned", 0)
    refuters: list[int] = []

    def agree_mask(z):
        return sum(1 << i for i in range(n) if z[i] == x[i])

    def run(combo):
        return checker(ds, m, k, x, FeatureSet(combo, n))

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for size in range(min(limit, n) + 1):
            st["stage"] = size
            batch = []
            for combo in combinations(range(n), size):
                cm = sum(1 << i for i in combo)
                if any(cm & r == cm for r in refuters):
                    st["pruned"] += 1
                    continue
                if pool is None:
                    st["checks"] += 1
                    v = run(combo)
                    if v.sufficient:
                        return FeatureSet(combo, n)
                    refuters.append(agree_mask(v.counterexample))
                    continue
                batch.append(combo)
                if len(batch) >= 4 * threads:
                    hit = _drain(pool, batch, run, refuters, agree_mask, st)
                    if hit is not None:
                        return FeatureSet(hit, n)
                    batch = []
            if pool is not None and batch:
                hit = _drain(pool, batch, run, refuters, agree_mask, st)
                if hit is not None:
                    return FeatureSet(hit, n)
        return None
    finally:
        if pool is not None:
            pool.shutdown(wait=True)


def _drain(pool, batch, run, refuters, agree_mask, st):
    # results come back in submission order, so the first hit is lexicographic
    st["checks"] += len(batch)
    for combo, v in zip(batch, pool.map(run, batch)):
        if v.sufficient:
            return combo
        refuters.append(agree_mask(v.counterexample))
    return None
