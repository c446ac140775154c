from __future__ import annotations

from dataclasses import dataclass, field

EXISTS = "exists"
NOT_EXISTS = "not_exists"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class CounterfactualResult:
    """Outcome of a counterfactual search.

    ``distance`` is the distance from x to ``witness`` (Hamming count, exact
    l1 rational, or l2 norm as float).  ``provenance`` records where the
    witness came from: the cell (A, B), the flip set, or the SAT budget.
    """

    status: str
    witness: tuple | None = None
    distance: object = None
    provenance: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def exists(self) -> bool:
        return self.status == EXISTS

    @classmethod
    def none(cls, **kw) -> "CounterfactualResult":
        return cls(NOT_EXISTS, None, None, **kw)
