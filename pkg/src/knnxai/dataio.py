"""Dataset CSV, query vectors, edge lists and generated-instance sidecars."""
from __future__ import annotations

import csv
import json
import os
from fractions import Fraction

from .core import BOOLEAN, RATIONAL, LabeledDataset, MetricSpec, as_rational
from .errors import InputError, InternalError
from .reductions import GeneratedInstance, Graph

SIDECAR_SCHEMA = 1


class FileFormatError(InputError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, path, line, msg):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {msg}")


def format_rational(q) -> str:
    """Shortest exact text for ``q``: integer, terminating decimal, or p/q."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    scaled = abs(q.numerator) * (10**places // q.denominator)
    digits = str(scaled).rjust(places + 1, "0")
    sign = "-" if q < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _parse_cell(text, domain):
    t = text.strip()
    q = as_rational(t)
    if domain == BOOLEAN and q not in (0, 1):
        raise InputError(f"boolean feature must be 0 or 1, got {t!r}")
    return int(q) if domain == BOOLEAN else q


def _looks_numeric(cells) -> bool:
    for c in cells:
        try:
            as_rational(c.strip())
        except InputError:
            return False
    return True


def read_dataset(path, domain: str = RATIONAL) -> LabeledDataset:
    """One point per row, feature columns then a 0/1 label; a header row is optional."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FileFormatError(path, None, exc.strerror or str(exc)) from exc
    pos, neg = [], []
    width = None
    for line, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
            continue
        if width is None and not pos and not neg and not _looks_numeric(row):
            width = len(row)
            continue
        if width is None:
            width = len(row)
        if len(row) != width:
            raise FileFormatError(path, line, f"row has {len(row)} columns, expected {width}")
        if width < 2:
            raise FileFormatError(path, line, "need at least one feature column and a label")
        try:
            vec = tuple(_parse_cell(c, domain) for c in row[:-1])
            label = as_rational(row[-1].strip())
        except InputError as exc:
            raise FileFormatError(path, line, str(exc)) from exc
        if label not in (0, 1):
            raise FileFormatError(path, line, f"label must be 0 or 1, got {row[-1].strip()!r}")
        (pos if label == 1 else neg).append(vec)
    if not pos and not neg:
        raise FileFormatError(path, None, "no data rows")
    return LabeledDataset(width - 1, domain, tuple(pos), tuple(neg))


def write_dataset(ds: LabeledDataset, path, header: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{i + 1}" for i in range(ds.dimension)] + ["label"])
        for vec, label in ds.labeled_points():
            w.writerow([format_rational(v) for v in vec] + [label])


def parse_vector(text: str, domain: str = RATIONAL) -> tuple:
    """Inline comma list, or a path to a CSV file holding one row."""
    if os.path.exists(text):
        with open(text, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        if rows and not _looks_numeric(rows[0]):
            rows = rows[1:]
        if len(rows) != 1:
            raise FileFormatError(text, None, f"query file must hold exactly one row, found {len(rows)}")
        cells = rows[0]
    else:
        cells = [c for c in text.replace(" ", "").split(",")]
    if not cells or any(c == "" for c in cells):
        raise InputError(f"malformed vector {text!r}")
    return tuple(_parse_cell(c, domain) for c in cells)


def read_edges(path) -> Graph:
    """``u v`` per line with 1-based vertices; ``#`` comments; optional ``n <count>`` line."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise FileFormatError(path, None, exc.strerror or str(exc)) from exc
    n = None
    edges = []
    top = 0
    for line, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if parts[0] == "n" and len(parts) == 2:
            if n is not None or edges:
                raise FileFormatError(path, line, "vertex count must come first and only once")
            try:
                n = int(parts[1])
            except ValueError as exc:
                raise FileFormatError(path, line, f"bad vertex count {parts[1]!r}") from exc
            continue
        if len(parts) != 2:
            raise FileFormatError(path, line, f"expected 'u v', got {text!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FileFormatError(path, line, f"vertices must be integers, got {text!r}") from exc
        if u < 1 or v < 1:
            raise FileFormatError(path, line, "vertices are numbered from 1")
        top = max(top, u, v)
        edges.append((u - 1, v - 1))
    if n is None:
        n = top
    elif top > n:
        raise FileFormatError(path, None, f"edge mentions vertex {top} but n = {n}")
    try:
        return Graph(n, tuple(edges))
    except InputError as exc:
        raise FileFormatError(path, None, str(exc)) from exc


def write_edges(G: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"n {G.n}\n")
        for u, v in G.edges:
            fh.write(f"{u + 1} {v + 1}\n")


def _jsonable(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_instance(inst: GeneratedInstance, stem) -> tuple:
    """Write ``<stem>.csv`` and ``<stem>.json``; returns both paths."""
    csv_path = f"{stem}.csv"
    json_path = f"{stem}.json"
    write_dataset(inst.dataset, csv_path)
    side = {
        "schema": SIDECAR_SCHEMA,
        "family": inst.family,
        "dataset": os.path.basename(csv_path),
        "metric": str(inst.metric),
        "k": inst.k,
        "x": [format_rational(v) for v in inst.x],
        "budget": None if inst.budget is None else _jsonable(inst.budget),
        "expected_label": inst.expected_label,
        "truth": _jsonable(inst.truth),
    }
    with open(json_path, "w") as fh:
        json.dump(side, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def load_instance(json_path) -> GeneratedInstance:
    """Read a sidecar and its dataset, then re-check the recorded label of x."""
    try:
        with open(json_path) as fh:
            side = json.load(fh)
    except OSError as exc:
        raise FileFormatError(json_path, None, exc.strerror or str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(json_path, exc.lineno, exc.msg) from exc
    if side.get("schema") != SIDECAR_SCHEMA:
        raise FileFormatError(json_path, None, f"unsupported sidecar schema {side.get('schema')!r}")
    try:
        metric = MetricSpec.parse(side["metric"])
        ds = read_dataset(os.path.join(os.path.dirname(json_path) or ".", side["dataset"]), metric.domain)
        x = ds.check_vector(side["x"])
        budget = side["budget"]
        if isinstance(budget, str):
            budget = as_rational(budget)
        inst = GeneratedInstance(side["family"], ds, metric, int(side["k"]), x, budget,
                                 int(side["expected_label"]), side.get("truth", {}))
    except KeyError as exc:
        raise FileFormatError(json_path, None, f"missing key {exc.args[0]!r}") from exc
    try:
        inst.check()
    except InternalError as exc:
        raise FileFormatError(json_path, None, f"sidecar label check failed: {exc}") from exc
    return inst
