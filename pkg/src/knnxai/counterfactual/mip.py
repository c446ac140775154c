"""Integer-program export for Hamming 1-NN counterfactuals.

The emitted text is in CPLEX LP format.  Binaries y_i encode the candidate
point; each training point z gets a distance expression

    r_z = |z| + sum_{z_i = 0} y_i - sum_{z_i = 1} y_i

and the two class minima dp, dn are pinned with indicator binaries
(m <= r_z for every z, v_z * r_z <= m, sum v_z = 1).  Because every
distance is an integer the strict comparison is written with a unit gap.
"""
from __future__ import annotations

import os
import tempfile
from typing import Sequence

from ..core import HAMMING, LabeledDataset, _classify, check_metric, distance
from ..errors import BackendError, InternalError, PreconditionError
from .result import EXISTS, NOT_EXISTS, CounterfactualResult


def _linear(terms):
    """Render ``[(coef, name)]`` as LP-format text; zero coefficients are dropped."""
    out = []
    for coef, name in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1 else f"{mag} {name}"
        out.append((sign, body))
    if not out:
        return "0"
    first_sign, first = out[0]
    text = ("- " if first_sign == "-" else "") + first
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


def _distance_parts(z, n):
    ones = sum(1 for b in z if b)
    return ones, [(1 if z[i] == 0 else -1, f"y{i + 1}") for i in range(n)]


def emit_mip_cf_discrete(ds: LabeledDataset, x: Sequence) -> str:
    """LP-format model whose optimum is a closest 1-NN Hamming counterfactual for ``x``.

    For a positive ``x`` the model asks for dn <= dp - 1; for a negative
    ``x`` it asks for dp <= dn, matching the tie rule.
    """
    check_metric(ds, HAMMING)
    x = ds.check_vector(x)
    if not ds.positives or not ds.negatives:
        raise PreconditionError("both classes must be nonempty")
    n = ds.dimension
    label = _classify(ds, HAMMING, 1, x)
    const = sum(1 for b in x if b)
    obj = _linear([(1 if x[i] == 0 else -1, f"y{i + 1}") for i in range(n)])
    if const:
        obj = f"{obj} + {const}" if obj != "0" else str(const)
    lines = [
        "\\ closest Hamming counterfactual for a 1-NN classifier",
        f"\\ n={n} positives={len(ds.positives)} negatives={len(ds.negatives)} x_label={label}",
        "Minimize",
        f" obj: {obj}",
        "Subject To",
    ]
    for tag, m, pts in (("p", "dp", ds.positives), ("n", "dn", ds.negatives)):
        names = [f"v{tag}{j + 1}" for j in range(len(pts))]
        lines.append(f" sel_{tag}: " + " + ".join(names) + " = 1")
        for j, z in enumerate(pts):
            ones, terms = _distance_parts(z, n)
            lo = _linear([(1, m)] + [(-c, name) for c, name in terms])
            lines.append(f" low_{tag}{j + 1}: {lo} <= {ones}")
            v = names[j]
            quad = _linear([(c, f"{v} * {name}") for c, name in terms])
            lead = _linear([(ones, v)]) + " + " if ones else ""
            lines.append(f" pin_{tag}{j + 1}: {lead}[ {quad} ] - {m} <= 0")
    if label == 1:
        lines.append(" flip: dn - dp <= -1")
    else:
        lines.append(" flip: dp - dn <= 0")
    lines.append("Bounds")
    lines.append(f" 0 <= dp <= {n}")
    lines.append(f" 0 <= dn <= {n}")
    lines.append("Binaries")
    names = [f"y{i + 1}" for i in range(n)]
    names += [f"vp{j + 1}" for j in range(len(ds.positives))]
    names += [f"vn{j + 1}" for j in range(len(ds.negatives))]
    for start in range(0, len(names), 10):
        lines.append(" " + " ".join(names[start:start + 10]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def mip_available() -> bool:
    try:
        import pyscipopt  # noqa: F401
    except ImportError:
        return False
    return True


def solve_mip_cf_discrete(ds: LabeledDataset, x: Sequence, budget=None, time_limit: float = 60.0) -> CounterfactualResult:
    """Solve the emitted model with SCIP (``pip install artifact[mip]``) and decode y."""
    try:
        from pyscipopt import Model
    except ImportError as exc:
        raise BackendError("pyscipopt is not installed") from exc
    x = ds.check_vector(x)
    text = emit_mip_cf_discrete(ds, x)
    fd, path = tempfile.mkstemp(suffix=".lp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        model = Model()
        model.hideOutput()
        model.setParam("limits/time", time_limit)
        model.readProblem(path)
        model.optimize()
        status = model.getStatus()
        if status == "infeasible":
            return CounterfactualResult.none(provenance={"solver": "scip"})
        if status != "optimal":
            raise BackendError(f"SCIP stopped with status {status}")
        values = {v.name: model.getVal(v) for v in model.getVars()}
    finally:
        os.unlink(path)
    y = tuple(1 if values[f"y{i + 1}"] > 0.5 else 0 for i in range(ds.dimension))
    label = _classify(ds, HAMMING, 1, x)
    if _classify(ds, HAMMING, 1, y) == label:
        raise InternalError("decoded MIP solution does not change the label")
    d = distance(x, y, HAMMING)
    if budget is not None and d > budget:
        return CounterfactualResult(NOT_EXISTS, None, None, {"solver": "scip", "optimum": d}, {})
    return CounterfactualResult(EXISTS, y, d, {"solver": "scip"}, {})
