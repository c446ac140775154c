from .hamming import cf_hamming_exact
from .l1 import breakpoints, cf_l1_oracle
from .l2 import cf_l2
from .mip import emit_mip_cf_discrete, mip_available, solve_mip_cf_discrete
from .result import EXISTS, INDETERMINATE, NOT_EXISTS, CounterfactualResult
from .sat import (
    CardinalityConstraint,
    CnfFormula,
    DpllSolver,
    ExternalSolver,
    cardinality_to_cnf,
    enumerate_projections,
    parse_dimacs,
    parse_knf,
    sat_encode_cf_1nn,
    sat_solve_cf_1nn,
)

__all__ = [
    "CardinalityConstraint", "CnfFormula", "CounterfactualResult", "DpllSolver", "EXISTS",
    "ExternalSolver", "INDETERMINATE", "NOT_EXISTS", "breakpoints", "cardinality_to_cnf",
    "cf_hamming_exact", "cf_l1_oracle", "cf_l2", "emit_mip_cf_discrete", "enumerate_projections",
    "mip_available", "parse_dimacs", "parse_knf", "sat_encode_cf_1nn", "sat_solve_cf_1nn",
    "solve_mip_cf_discrete",
]
