"""Formal explanations for k-nearest-neighbour classifiers.

Counterfactuals and sufficient reasons for the optimistic k-NN rule over
Boolean vectors (Hamming distance) and rational vectors (l1, l2).
"""
from importlib.metadata import PackageNotFoundError, version

from .abductive import (
    FeatureSet,
    SufficiencyVerdict,
    check_sr_bruteforce,
    check_sr_hamming_k1,
    check_sr_l1_k1,
    check_sr_l2,
    checker_for,
    minimal_sr,
    minimum_sr_exact,
)
from .core import (
    BOOLEAN,
    HAMMING,
    L1,
    L2,
    RATIONAL,
    LabeledDataset,
    MetricSpec,
    classify_by_subsets,
    classify_optimistic,
    distance,
    neighbor_profile,
)
from .counterfactual import (
    CounterfactualResult,
    cf_hamming_exact,
    cf_l1_oracle,
    cf_l2,
    emit_mip_cf_discrete,
    sat_encode_cf_1nn,
    sat_solve_cf_1nn,
)
from .errors import KnnXaiError

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.0.0"

__all__ = [
    "BOOLEAN", "CounterfactualResult", "FeatureSet", "HAMMING", "KnnXaiError", "L1", "L2",
    "LabeledDataset", "MetricSpec", "RATIONAL", "SufficiencyVerdict", "cf_hamming_exact",
    "cf_l1_oracle", "cf_l2", "check_sr_bruteforce", "check_sr_hamming_k1", "check_sr_l1_k1",
    "check_sr_l2", "checker_for", "classify_by_subsets", "classify_optimistic", "distance",
    "emit_mip_cf_discrete", "minimal_sr", "minimum_sr_exact", "neighbor_profile",
    "sat_encode_cf_1nn", "sat_solve_cf_1nn",
]
