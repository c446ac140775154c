"""SAT encoding of 1-NN counterfactuals with guarded cardinality constraints.

Variables ``1..n`` are the bits of the candidate y; variables ``n+1..`` are
the selectors ``c_i``, one per training point of the label we want y to
get.  ``c_i`` forces y to be closer to that point than to every point of
the other class (strictly when flipping a positive x, non-strictly when
flipping a negative one, matching the optimistic tie rule).  A final
cardinality constraint bounds the Hamming distance to x.

Text formats:

* DIMACS ``p cnf V C`` with cardinality constraints expanded into clauses.
* KNF ``p knf V C`` where a line ``k <bound> <lits> 0`` states that at
  least ``bound`` of the listed literals are true.  A guarded constraint
  ``g -> sum >= b`` is written as the plain constraint ``sum + b*(-g) >= b``
  (``-g`` repeated ``b`` times), preceded by a ``c guard <g>`` comment so
  the guard survives a round trip.
"""
from __future__ import annotations

import os
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Sequence

from ..core import HAMMING, LabeledDataset, _classify, check_k, check_metric, distance
from ..errors import BackendError, InputError, InternalError, ResourceLimit
from .result import EXISTS, CounterfactualResult


@dataclass(frozen=True)
class CardinalityConstraint:
    """``guard -> (at least `bound` of `lits` are true)``; no guard means always active."""

    lits: tuple
    bound: int
    guard: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "lits", tuple(int(v) for v in self.lits))
        if not 0 <= self.bound <= len(self.lits):
            raise InputError(f"cardinality bound {self.bound} outside 0..{len(self.lits)}")
        if any(v == 0 for v in self.lits) or self.guard == 0:
            raise InputError("literal 0 is not allowed")

    def satisfied(self, value) -> bool:
        if self.guard is not None and not _lit(value, self.guard):
            return True
        return sum(1 for v in self.lits if _lit(value, v)) >= self.bound


def _lit(value, lit) -> bool:
    v = value[abs(lit)]
    return v if lit > 0 else not v


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list = field(default_factory=list)
    cardinality: list = field(default_factory=list)
    names: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        for cl in self.clauses:
            for v in cl:
                if v == 0 or abs(v) > self.num_vars:
                    raise InputError(f"literal {v} references an undeclared variable")
        for c in self.cardinality:
            for v in c.lits + ((c.guard,) if c.guard is not None else ()):
                if abs(v) > self.num_vars:
                    raise InputError(f"literal {v} references an undeclared variable")

    def satisfied(self, model) -> bool:
        """``model`` is indexable by variable (index 0 unused)."""
        return all(any(_lit(model, v) for v in cl) for cl in self.clauses) and all(
            c.satisfied(model) for c in self.cardinality
        )

    def expanded(self) -> "CnfFormula":
        """Equivalent plain CNF; auxiliary variables are appended after the originals."""
        nxt = self.num_vars + 1
        clauses = [tuple(cl) for cl in self.clauses]
        for c in self.cardinality:
            extra, nxt = cardinality_to_cnf(c, nxt)
            clauses.extend(extra)
        return CnfFormula(nxt - 1, clauses, [], dict(self.names), dict(self.meta))

    def _comment_lines(self) -> list:
        out = []
        for var in sorted(self.names):
            out.append(f"c var {var} {self.names[var]}")
        return out

    def to_dimacs(self) -> str:
        f = self.expanded() if self.cardinality else self
        lines = f._comment_lines()
        if self.cardinality:
            lines.append(f"c cardinality constraints expanded by sequential counters; "
                         f"variables {self.num_vars + 1}..{f.num_vars} are auxiliary")
        lines.append(f"p cnf {f.num_vars} {len(f.clauses)}")
        for cl in f.clauses:
            lines.append(" ".join(str(v) for v in cl) + " 0")
        return "\n".join(lines) + "\n"

    def to_knf(self) -> str:
        lines = self._comment_lines()
        lines.append(f"p knf {self.num_vars} {len(self.clauses) + len(self.cardinality)}")
        for cl in self.clauses:
            lines.append(" ".join(str(v) for v in cl) + " 0")
        for c in self.cardinality:
            lits = list(c.lits)
            if c.guard is not None:
                lines.append(f"c guard {c.guard}")
                lits += [-c.guard] * c.bound
            lines.append(f"k {c.bound} " + " ".join(str(v) for v in lits) + " 0")
        return "\n".join(lines) + "\n"


def _parse(text: str, kind: str) -> CnfFormula:
    header = None
    clauses, card, names = [], [], {}
    pending_guard = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 4 and parts[1] == "var":
                names[int(parts[2])] = parts[3]
            elif len(parts) == 3 and parts[1] == "guard":
                pending_guard = int(parts[2])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != kind:
                raise InputError(f"line {lineno}: expected 'p {kind} V C' header")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise InputError(f"line {lineno}: data before the problem header")
        try:
            toks = [int(t) for t in line.split()[1:]] if line.startswith("k") else [int(t) for t in line.split()]
        except ValueError as exc:
            raise InputError(f"line {lineno}: non-integer token") from exc
        if not toks or toks[-1] != 0:
            raise InputError(f"line {lineno}: missing terminating 0")
        if line.startswith("k"):
            if kind != "knf":
                raise InputError(f"line {lineno}: cardinality line in a cnf file")
            bound, lits = toks[0], toks[1:-1]
            g = pending_guard
            if g is not None and bound > 0 and lits[-bound:] == [-g] * bound:
                card.append(CardinalityConstraint(tuple(lits[:-bound]), bound, g))
            else:
                card.append(CardinalityConstraint(tuple(lits), bound))
            pending_guard = None
        else:
            clauses.append(tuple(toks[:-1]))
    if header is None:
        raise InputError("missing problem header")
    f = CnfFormula(header[0], clauses, card, names)
    if len(clauses) + len(card) != header[1]:
        raise InputError(f"header announces {header[1]} constraints, found {len(clauses) + len(card)}")
    f.validate()
    return f


def parse_dimacs(text: str) -> CnfFormula:
    return _parse(text, "cnf")


def parse_knf(text: str) -> CnfFormula:
    return _parse(text, "knf")


def cardinality_to_cnf(c: CardinalityConstraint, next_var: int) -> tuple[list, int]:
    """Sequential-counter clauses for ``c``; returns ``(clauses, next free variable)``.

    ``sum(lits) >= b`` is rewritten as ``sum(-lits) <= len - b`` and counted
    with registers ``s[i][j]`` ("at least j of the first i negated literals
    hold").  A guard ``g`` adds ``-g`` to every clause.
    """
    tail = (-c.guard,) if c.guard is not None else ()
    n = len(c.lits)
    b = c.bound
    if b <= 0:
        return [], next_var
    if b == 1:
        return [tuple(c.lits) + tail], next_var
    if b == n:
        return [(v,) + tail for v in c.lits], next_var
    K = n - b
    xs = [-v for v in c.lits]
    s = [[next_var + i * K + j for j in range(K)] for i in range(n - 1)]
    nxt = next_var + (n - 1) * K
    out = [(-xs[0], s[0][0]) + tail]
    for j in range(1, K):
        out.append((-s[0][j],) + tail)
    for i in range(1, n - 1):
        out.append((-xs[i], s[i][0]) + tail)
        out.append((-s[i - 1][0], s[i][0]) + tail)
        for j in range(1, K):
            out.append((-xs[i], -s[i - 1][j - 1], s[i][j]) + tail)
            out.append((-s[i - 1][j], s[i][j]) + tail)
        out.append((-xs[i], -s[i - 1][K - 1]) + tail)
    out.append((-xs[n - 1], -s[n - 2][K - 1]) + tail)
    return out, nxt


# ---------------------------------------------------------------- encoder


@dataclass(frozen=True)
class DeltaPair:
    """Coordinates where ``o`` and ``s`` differ, split by the value of ``o``."""

    delta0: tuple
    delta1: tuple

    @classmethod
    def of(cls, o: Sequence, s: Sequence) -> "DeltaPair":
        return cls(
            tuple(i for i, (a, b) in enumerate(zip(o, s)) if a == 0 and b == 1),
            tuple(i for i, (a, b) in enumerate(zip(o, s)) if a == 1 and b == 0),
        )

    def __len__(self) -> int:
        return len(self.delta0) + len(self.delta1)


def sat_encode_cf_1nn(ds: LabeledDataset, x: Sequence, budget: int) -> CnfFormula:
    """Formula whose models are the y within Hamming distance ``budget`` of x with the other label."""
    check_metric(ds, HAMMING)
    check_k(1, ds.size)
    x = ds.check_vector(x)
    n = ds.dimension
    if not 0 <= budget:
        raise InputError("budget must be nonnegative")
    label = _classify(ds, HAMMING, 1, x)
    targets, rivals = (ds.negatives, ds.positives) if label == 1 else (ds.positives, ds.negatives)
    strict = label == 1
    names = {i + 1: f"y{i + 1}" for i in range(n)}
    cvars = []
    for t in range(len(targets)):
        v = n + 1 + t
        cvars.append(v)
        names[v] = f"c{t + 1}"
    f = CnfFormula(n + len(targets), [tuple(cvars)], [], names)
    f.meta = {"direction": "to_negative" if strict else "to_positive", "n": n, "budget": budget}
    for t, o in enumerate(targets):
        g = cvars[t]
        for s in rivals:
            dp = DeltaPair.of(o, s)
            size = len(dp)
            bound = size // 2 + 1 if strict else (size + 1) // 2
            if bound == 0:
                continue
            if bound > size:
                # identical points of opposite classes: the selector can never hold
                f.clauses.append((-g,))
                continue
            lits = tuple(-(i + 1) for i in dp.delta0) + tuple(i + 1 for i in dp.delta1)
            f.cardinality.append(CardinalityConstraint(lits, bound, g))
    agree = n - min(budget, n)
    if agree > 0:
        lits = tuple(-(i + 1) if x[i] == 0 else (i + 1) for i in range(n))
        f.cardinality.append(CardinalityConstraint(lits, agree))
    return f


# ---------------------------------------------------------------- solvers


class DpllSolver:
    """Chronological-backtracking DPLL with counting propagation.

    Clauses are treated as cardinality constraints of bound 1, so one
    propagation routine serves both.  No learning, no restarts.
    """

    name = "dpll"

    def __init__(self, max_conflicts: int | None = None):
        self.max_conflicts = max_conflicts
        self.stats = {"decisions": 0, "propagations": 0, "conflicts": 0}

    def solve(self, f: CnfFormula, phase: dict | None = None):
        V = f.num_vars
        cons = [(tuple(cl), 1, None) for cl in f.clauses]
        cons += [(c.lits, c.bound, c.guard) for c in f.cardinality if c.bound > 0]
        occurs = [[] for _ in range(V + 1)]
        for ci, (lits, _, g) in enumerate(cons):
            seen = set()
            for v in lits + ((g,) if g is not None else ()):
                a = abs(v)
                if a not in seen:
                    occurs[a].append(ci)
                    seen.add(a)
        val = [None] * (V + 1)
        trail = []  # (var, kind) with kind in "dec", "flip", "prop"
        phase = phase or {}
        st = self.stats

        def value(lit):
            v = val[abs(lit)]
            if v is None:
                return None
            return v if lit > 0 else not v

        def assign(lit, kind):
            val[abs(lit)] = lit > 0
            trail.append((abs(lit), kind))

        def propagate(start):
            # returns False on conflict
            queue = list(range(start, len(trail)))
            check = list(range(len(cons))) if start == 0 else None
            qi = 0
            pending = set(check) if check is not None else set()
            order = list(check) if check is not None else []
            while True:
                while qi < len(queue):
                    var = trail[queue[qi]][0]
                    qi += 1
                    for ci in occurs[var]:
                        if ci not in pending:
                            pending.add(ci)
                            order.append(ci)
                if not order:
                    return True
                ci = order.pop()
                pending.discard(ci)
                lits, b, g = cons[ci]
                gv = True if g is None else value(g)
                if gv is False:
                    continue
                t = u = 0
                for v in lits:
                    x = value(v)
                    if x is None:
                        u += 1
                    elif x:
                        t += 1
                if t >= b:
                    continue
                if t + u < b:
                    if gv is None:
                        assign(-g, "prop")
                        st["propagations"] += 1
                        queue.append(len(trail) - 1)
                        continue
                    return False
                if gv is True and t + u == b:
                    for v in lits:
                        if value(v) is None:
                            assign(v, "prop")
                            st["propagations"] += 1
                            queue.append(len(trail) - 1)

        def backtrack():
            while trail:
                var, kind = trail.pop()
                old = val[var]
                val[var] = None
                if kind == "dec":
                    assign(var if not old else -var, "flip")
                    return True
            return False

        if not propagate(0):
            return False, None
        nxt = 1
        while True:
            while nxt <= V and val[nxt] is not None:
                nxt += 1
            if nxt > V:
                model = [False] + [bool(v) for v in val[1:]]
                if not f.satisfied(model):
                    raise InternalError("DPLL produced a model that violates the formula")
                return True, model
            st["decisions"] += 1
            assign(nxt if phase.get(nxt, False) else -nxt, "dec")
            mark = len(trail) - 1
            while not propagate(mark):
                st["conflicts"] += 1
                if self.max_conflicts is not None and st["conflicts"] > self.max_conflicts:
                    raise ResourceLimit("DPLL conflict budget exhausted", dict(st))
                if not backtrack():
                    return False, None
                mark = len(trail) - 1
            nxt = 1


class ExternalSolver:
    """Runs ``command + [path]`` on a DIMACS (or KNF) file.

    Standard solver output is expected: an ``s SATISFIABLE`` or
    ``s UNSATISFIABLE`` line and, when satisfiable, ``v`` lines of literals.
    """

    name = "external"

    def __init__(self, command: Sequence[str], fmt: str = "cnf", timeout: float | None = None):
        if fmt not in ("cnf", "knf"):
            raise InputError("external solver format must be cnf or knf")
        self.command = list(command)
        self.fmt = fmt
        self.timeout = timeout
        self.stats = {"calls": 0}

    def solve(self, f: CnfFormula, phase: dict | None = None):
        text = f.to_knf() if self.fmt == "knf" else f.to_dimacs()
        fd, path = tempfile.mkstemp(suffix="." + self.fmt)
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            try:
                proc = subprocess.run(self.command + [path], capture_output=True, text=True,
                                      timeout=self.timeout)
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise BackendError(f"external solver failed to run: {exc}") from exc
        finally:
            os.unlink(path)
        self.stats["calls"] += 1
        status = None
        lits = []
        for line in proc.stdout.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "s" and len(parts) >= 2:
                status = parts[1]
            elif parts[0] == "v":
                try:
                    lits.extend(int(t) for t in parts[1:])
                except ValueError as exc:
                    raise BackendError(f"unparsable value line: {line!r}") from exc
        if status is None or proc.returncode not in (0, 10, 20):
            raise BackendError(
                f"external solver exited with code {proc.returncode} and no usable status line"
            )
        if status == "UNSATISFIABLE":
            return False, None
        if status != "SATISFIABLE":
            raise BackendError(f"external solver reported {status!r}")
        model = [False] * (f.num_vars + 1)
        for v in lits:
            if v != 0 and abs(v) <= f.num_vars:
                model[abs(v)] = v > 0
        if not f.satisfied(model):
            raise BackendError("external solver model does not satisfy the formula")
        return True, model


def make_backend(backend):
    if backend is None or backend == "internal":
        return DpllSolver()
    if isinstance(backend, str):
        raise InputError(f"unknown SAT backend {backend!r}")
    return backend


def enumerate_projections(f: CnfFormula, variables: Sequence[int], backend=None) -> set:
    """All assignments to ``variables`` that extend to a model (blocking-clause loop)."""
    solver = make_backend(backend)
    g = CnfFormula(f.num_vars, list(f.clauses), list(f.cardinality), dict(f.names), dict(f.meta))
    found = set()
    while True:
        sat, model = solver.solve(g)
        if not sat:
            return found
        proj = tuple(int(model[v]) for v in variables)
        found.add(proj)
        g.clauses.append(tuple(-v if model[v] else v for v in variables))


def sat_solve_cf_1nn(ds: LabeledDataset, x: Sequence, budget: int, backend=None) -> CounterfactualResult:
    """Closest 1-NN counterfactual by binary search over the distance budget."""
    check_metric(ds, HAMMING)
    check_k(1, ds.size)
    x = ds.check_vector(x)
    n = ds.dimension
    label = _classify(ds, HAMMING, 1, x)
    solver = make_backend(backend)
    calls = []

    def attempt(kappa):
        sat, model = solver.solve(sat_encode_cf_1nn(ds, x, kappa),
                                  phase={i + 1: bool(x[i]) for i in range(n)})
        calls.append((kappa, sat))
        if not sat:
            return None
        y = tuple(int(model[i + 1]) for i in range(n))
        if _classify(ds, HAMMING, 1, y) == label or distance(x, y, HAMMING) > kappa:
            raise InternalError(f"SAT model at budget {kappa} is not a valid counterfactual")
        return y

    hi = min(budget, n)
    best = attempt(hi) if hi >= 0 else None
    if best is None:
        return CounterfactualResult.none(provenance={"calls": calls}, stats=dict(solver.stats))
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        y = attempt(mid)
        if y is None:
            lo = mid + 1
        else:
            hi, best = mid, y
    d = distance(x, best, HAMMING)
    return CounterfactualResult(EXISTS, best, d, {"kappa": hi, "calls": calls}, dict(solver.stats))
