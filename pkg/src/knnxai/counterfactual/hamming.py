"""Exact counterfactual search on Boolean data by iterative deepening."""
from __future__ import annotations

from typing import Sequence

from .. import kernels
from ..abductive import from_mask, to_mask
from ..core import HAMMING, LabeledDataset, _classify, check_k, check_metric, distance
from ..errors import InternalError, ResourceLimit
from .result import EXISTS, CounterfactualResult

DEFAULT_NODE_CAP = 10**7


def _verify(ds, k, x, y, budget, label):
    if _classify(ds, HAMMING, k, y) == label:
        raise InternalError("counterfactual witness does not change the label")
    d = distance(x, y, HAMMING)
    if d > budget:
        raise InternalError("counterfactual witness exceeds the budget")
    return d


def cf_hamming_exact(ds: LabeledDataset, k: int, x: Sequence, budget: int,
                     node_cap: int = DEFAULT_NODE_CAP, backend=None) -> CounterfactualResult:
    """Closest flip set of at most ``budget`` bits that changes the label.

    Flip sets are tried by increasing size and lexicographically within a
    size, so the first hit is distance-minimal and deterministic.
    """
    kb = backend or kernels.backend
    check_metric(ds, HAMMING)
    check_k(k, ds.size)
    x = ds.check_vector(x)
    n = ds.dimension
    pos = [to_mask(p) for p in ds.positives]
    neg = [to_mask(q) for q in ds.negatives]
    xm = to_mask(x)
    label = kb.hamming_label(xm, pos, neg, k)
    nodes = 0
    for size in range(1, min(budget, n) + 1):
        found, used = kb.first_flip(xm, pos, neg, n, k, size, 1 - label, node_cap - nodes)
        nodes += used
        if found == -2:
            raise ResourceLimit(
                f"flip-set search hit the node cap of {node_cap}",
                {"size": size, "nodes": nodes, "exhausted_sizes": size - 1},
            )
        if found >= 0:
            y = from_mask(xm ^ found, n)
            d = _verify(ds, k, x, y, budget, label)
            flips = [i for i in range(n) if (found >> i) & 1]
            return CounterfactualResult(EXISTS, y, d, {"flip_set": flips}, {"nodes": nodes})
    return CounterfactualResult.none(stats={"nodes": nodes})
