"""``knnxai`` command line.

Every command prints a JSON report (schema ``knnxai.report/1``) or a short
text rendering.  Feature indices on the command line and in reports are
1-based.  Exit codes: 0 success (counterfactual found, set sufficient,
minimum found), 1 negative answer, 2 input or engine error, 3 unsupported
setting.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

from . import abductive, dataio, reductions
from .core import HAMMING, MetricSpec, as_rational, neighbor_profile
from .counterfactual import (
    INDETERMINATE,
    cf_hamming_exact,
    cf_l1_oracle,
    cf_l2,
    emit_mip_cf_discrete,
    sat_encode_cf_1nn,
    sat_solve_cf_1nn,
)
from .errors import KnnXaiError, ResourceLimit, UnsupportedSetting

REPORT_SCHEMA = "knnxai.report/1"
EXIT_OK, EXIT_NO, EXIT_ERROR, EXIT_UNSUPPORTED = 0, 1, 2, 3
ENGINES = ("auto", "qp", "exact", "sat", "l1-oracle")
EXACT_AUTO_MAX_N = 20


class CliError(Exception):
    def __init__(self, message, code=EXIT_ERROR):
        super().__init__(message)
        self.code = code


def _num(v):
    if isinstance(v, Fraction):
        return dataio.format_rational(v)
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return v if math.isfinite(v) else str(v)
    return str(v)


def _plain(v):
    """JSON-safe copy: rationals become exact strings, tuples become lists."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        items = sorted(v) if isinstance(v, (set, frozenset)) else v
        return [_plain(x) for x in items]
    return _num(v)


# ---------------------------------------------------------------- loading


def _metric(args) -> MetricSpec:
    return MetricSpec.parse(args.metric)


def _load(args):
    if not args.dataset:
        raise CliError("--dataset is required")
    m = _metric(args)
    ds = dataio.read_dataset(args.dataset, m.domain)
    return ds, m


def _query(args, ds):
    if args.x is None:
        raise CliError("--x is required")
    return ds.check_vector(dataio.parse_vector(args.x, ds.domain))


def _features(text, n):
    if text is None:
        raise CliError("--features is required (comma-separated, 1-based; empty for none)")
    idx = []
    for t in text.replace(" ", "").split(","):
        if not t:
            continue
        try:
            i = int(t)
        except ValueError as exc:
            raise CliError(f"bad feature index {t!r}") from exc
        if not 1 <= i <= n:
            raise CliError(f"feature index {i} outside 1..{n}")
        idx.append(i - 1)
    return abductive.FeatureSet(tuple(idx), n)


def _order(text, n):
    if text is None or text == "desc":
        return None
    if text == "asc":
        return list(range(n))
    try:
        perm = [int(t) - 1 for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise CliError(f"--order must be asc, desc or a 1-based permutation, got {text!r}") from exc
    if sorted(perm) != list(range(n)):
        raise CliError("--order must list every feature exactly once")
    return perm


def _fingerprint(ds, m, k):
    return {"dimension": ds.dimension, "positives": len(ds.positives), "negatives": len(ds.negatives),
            "metric": str(m), "k": k}


# ---------------------------------------------------------------- commands


def cmd_classify(args):
    ds, m = _load(args)
    x = _query(args, ds)
    prof = neighbor_profile(ds, m, args.k, x)
    neigh = []
    for d, lab in prof.neighbors[: max(args.k, 1)]:
        entry = {"label": lab}
        if m.kind == "lp" and m.p >= 2:
            entry["distance_pow"] = _num(d)
            entry["distance"] = float(d) ** (1.0 / m.p)
        else:
            entry["distance"] = _num(d)
        neigh.append(entry)
    result = {"label": prof.label, "threshold": _num(prof.threshold), "positives_below": prof.positives_below,
              "positives_at": prof.positives_at, "free_slots": prof.free_slots, "nearest": neigh}
    return EXIT_OK, _fingerprint(ds, m, args.k), result, {}


def _pick_engine(engine, m, k, n):
    if engine == "auto":
        if m.kind == "hamming":
            return "exact" if n <= EXACT_AUTO_MAX_N or k != 1 else "sat"
        if m.p == 2:
            return "qp"
        if m.p == 1:
            return "l1-oracle"
        raise CliError(f"no counterfactual engine for {m}", EXIT_UNSUPPORTED)
    ok = {
        "qp": m.kind == "lp" and m.p == 2,
        "exact": m.kind == "hamming",
        "sat": m.kind == "hamming" and k == 1,
        "l1-oracle": m.kind == "lp" and m.p == 1,
    }[engine]
    if not ok:
        raise CliError(f"engine {engine} is incompatible with metric {m} and k={k}")
    return engine


def cmd_counterfactual(args):
    ds, m = _load(args)
    x = _query(args, ds)
    if args.budget is None:
        raise CliError("--budget is required")
    engine = _pick_engine(args.engine, m, args.k, ds.dimension)
    if engine in ("exact", "sat"):
        budget = as_rational(args.budget)
        if budget.denominator != 1:
            raise CliError("Hamming budgets are integers")
        budget = int(budget)
    else:
        budget = as_rational(args.budget)
    if engine == "qp":
        res = cf_l2(ds, args.k, x, budget)
    elif engine == "exact":
        res = cf_hamming_exact(ds, args.k, x, budget)
    elif engine == "sat":
        res = sat_solve_cf_1nn(ds, x, budget)
    else:
        res = cf_l1_oracle(ds, args.k, x, budget)
    result = {"engine": engine, "status": res.status, "budget": _num(budget)}
    if res.exists:
        result["witness"] = [_num(v) for v in res.witness]
        result["distance"] = _num(res.distance)
        if m.domain == HAMMING.domain:
            result["flipped"] = [i + 1 for i in range(ds.dimension) if res.witness[i] != x[i]]
    result["provenance"] = _plain(res.provenance)
    if res.status == INDETERMINATE:
        code = EXIT_ERROR
    else:
        code = EXIT_OK if res.exists else EXIT_NO
    return code, _fingerprint(ds, m, args.k), result, _plain(res.stats)


def _checker(m, k):
    try:
        return abductive.checker_for(m, k)
    except UnsupportedSetting as exc:
        raise CliError(str(exc), EXIT_UNSUPPORTED) from exc


def cmd_check_sr(args):
    ds, m = _load(args)
    x = _query(args, ds)
    X = _features(args.features, ds.dimension)
    checker = _checker(m, args.k)
    v = checker(ds, m, args.k, x, X)
    result = {"features": X.one_based(), "sufficient": v.sufficient}
    if not v.sufficient:
        result["counterexample"] = [_num(c) for c in v.counterexample]
    return (EXIT_OK if v.sufficient else EXIT_NO), _fingerprint(ds, m, args.k), result, _plain(v.stats)


def cmd_minimal_sr(args):
    ds, m = _load(args)
    x = _query(args, ds)
    checker = _checker(m, args.k)
    st = {}
    X = abductive.minimal_sr(ds, m, args.k, x, checker=checker, order=_order(args.order, ds.dimension), stats=st)
    result = {"features": X.one_based(), "size": len(X), "order": args.order or "desc"}
    return EXIT_OK, _fingerprint(ds, m, args.k), result, _plain(st)


def cmd_minimum_sr(args):
    ds, m = _load(args)
    x = _query(args, ds)
    if args.budget is None:
        raise CliError("--budget is required (largest set size to consider)")
    limit = as_rational(args.budget)
    if limit.denominator != 1:
        raise CliError("minimum-sr budget is an integer set size")
    checker = _checker(m, args.k)
    st = {}
    X = abductive.minimum_sr_exact(ds, m, args.k, x, int(limit), checker=checker, threads=args.threads, stats=st)
    if X is None:
        return EXIT_NO, _fingerprint(ds, m, args.k), {"found": False, "budget": int(limit)}, _plain(st)
    result = {"found": True, "features": X.one_based(), "size": len(X), "budget": int(limit)}
    return EXIT_OK, _fingerprint(ds, m, args.k), result, _plain(st)


def cmd_encode(args):
    ds, m = _load(args)
    if m.kind != "hamming":
        raise CliError("encoders need the hamming metric")
    x = _query(args, ds)
    if args.k != 1:
        raise CliError("encoders cover k=1 only", EXIT_UNSUPPORTED)
    if not args.out:
        raise CliError("--out is required")
    if args.target == "mip":
        text = emit_mip_cf_discrete(ds, x)
        varmap = {f"y{i + 1}": f"feature {i + 1}" for i in range(ds.dimension)}
        result = {"target": "mip", "file": args.out, "variables": varmap}
    else:
        if args.budget is None:
            raise CliError("--budget is required for cnf/knf")
        budget = as_rational(args.budget)
        if budget.denominator != 1 or budget < 0:
            raise CliError("Hamming budgets are nonnegative integers")
        f = sat_encode_cf_1nn(ds, x, int(budget))
        text = f.to_knf() if args.target == "knf" else f.to_dimacs()
        result = {"target": args.target, "file": args.out, "variables": {str(k): v for k, v in sorted(f.names.items())},
                  "guarded_constraints": sum(1 for c in f.cardinality if c.guard is not None),
                  "meta": _plain(f.meta)}
    with open(args.out, "w") as fh:
        fh.write(text)
    return EXIT_OK, _fingerprint(ds, m, args.k), result, {}


def _need(args, name):
    v = getattr(args, name)
    if v is None:
        raise CliError(f"--{name.replace('_', '-')} is required for this family")
    return v


def cmd_gen(args):
    fam = args.family
    if not args.out:
        raise CliError("--out is required (path stem for the .csv/.json pair)")
    if fam in ("vc-minsr-cont", "vc-minsr-disc", "bmcf", "checksr-k3"):
        G = dataio.read_edges(_need(args, "graph"))
    if fam == "vc-minsr-cont":
        inst = reductions.gen_vc_minsr_continuous(G, args.k, args.p)
    elif fam == "vc-minsr-disc":
        inst = reductions.gen_vc_minsr_discrete(G)
    elif fam == "knapsack-l1":
        ki = reductions.KnapsackInstance(reductions.parse_int_list(_need(args, "w")),
                                         reductions.parse_int_list(_need(args, "v")), int(_need(args, "W")))
        inst = reductions.gen_knapsack_cf_l1(ki)
        if args.k > 1:
            inst = reductions.lift_cf_l1_to_k(inst, args.k)
    elif fam == "bmcf":
        bi = reductions.gen_vc_to_bmcf(G, int(_need(args, "ell")), args.slack)
        inst = reductions.gen_bmcf_cf_hamming(bi, pad=args.pad)
    else:
        inst = reductions.gen_check_sr_k3_discrete(G, args.k if args.k > 1 else 3)
    csv_path, json_path = dataio.write_instance(inst, args.out)
    dataio.load_instance(json_path)
    result = {"family": inst.family, "dataset": csv_path, "sidecar": json_path, "k": inst.k,
              "budget": _plain(inst.budget), "x": [_num(v) for v in inst.x], "truth": _plain(inst.truth)}
    return EXIT_OK, _fingerprint(inst.dataset, inst.metric, inst.k), result, {}


COMMANDS = {
    "classify": cmd_classify,
    "counterfactual": cmd_counterfactual,
    "check-sr": cmd_check_sr,
    "minimal-sr": cmd_minimal_sr,
    "minimum-sr": cmd_minimum_sr,
    "encode": cmd_encode,
    "gen": cmd_gen,
}


# ---------------------------------------------------------------- plumbing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dataset", help="dataset CSV (features..., label)")
    common.add_argument("--metric", default="l2", help="hamming, l1, l2 or lp:<p> (default l2)")
    common.add_argument("--k", type=int, default=1, help="odd number of neighbours (default 1)")
    common.add_argument("--x", help="query vector: comma list or one-row CSV file")
    common.add_argument("--budget", help="distance budget, or set-size limit for minimum-sr")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", help="output file (encode) or path stem (gen); report goes to stdout")
    common.add_argument("--threads", type=int, default=1, help="worker threads (minimum-sr)")

    p = argparse.ArgumentParser(prog="knnxai", description="Explanations for k-NN classifiers.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="label and neighbour profile of x")
    c = sub.add_parser("counterfactual", parents=[common], help="closest label flip within the budget")
    c.add_argument("--engine", choices=ENGINES, default="auto")
    c = sub.add_parser("check-sr", parents=[common], help="is a feature set sufficient")
    c.add_argument("--features", help="1-based comma list; empty string for the empty set")
    c = sub.add_parser("minimal-sr", parents=[common], help="greedy subset-minimal sufficient reason")
    c.add_argument("--order", help="drop order: desc (default), asc, or a 1-based permutation")
    sub.add_parser("minimum-sr", parents=[common], help="smallest sufficient reason up to --budget features")
    c = sub.add_parser("encode", parents=[common], help="write a SAT or MIP model for k=1 Hamming")
    c.add_argument("--target", choices=("cnf", "knf", "mip"), required=True)
    c = sub.add_parser("gen", parents=[common], help="generate a reduction instance with ground truth")
    c.add_argument("family", choices=("vc-minsr-cont", "vc-minsr-disc", "knapsack-l1", "bmcf", "checksr-k3"))
    c.add_argument("--graph", help="edge-list file")
    c.add_argument("--p", type=int, default=2, help="lp exponent for vc-minsr-cont")
    c.add_argument("--w", help="knapsack weights, comma list")
    c.add_argument("--v", help="knapsack values, comma list")
    c.add_argument("--W", help="knapsack capacity")
    c.add_argument("--ell", help="cover size for bmcf")
    c.add_argument("--slack", type=int, default=0, help="uncovered-edge allowance for bmcf")
    c.add_argument("--pad", action="store_true", help="append zero columns so bmcf rows have two zeros")
    return p


def _render_text(report) -> str:
    lines = [f"{report['command']}: exit {report['exit_code']}"]
    if "error" in report:
        lines.append(f"error: {report['error']['message']}")
        return "\n".join(lines)
    inst = report["instance"]
    lines.append(f"instance: n={inst['dimension']} |S+|={inst['positives']} |S-|={inst['negatives']} "
                 f"metric={inst['metric']} k={inst['k']}")
    for key, val in report["result"].items():
        if key in ("provenance", "variables", "nearest", "truth"):
            continue
        lines.append(f"{key}: {json.dumps(val) if isinstance(val, (list, dict)) else val}")
    return "\n".join(lines)


def execute(args, argv) -> tuple:
    report = {"schema": REPORT_SCHEMA, "command": args.command, "argv": list(argv)}
    start = time.perf_counter()
    try:
        if args.k < 1 or args.k % 2 == 0:
            raise CliError(f"--k must be an odd positive integer, got {args.k}")
        code, inst, result, stats = COMMANDS[args.command](args)
        report.update(instance=inst, result=result, stats=stats)
    except CliError as exc:
        code = exc.code
        report["error"] = {"type": "usage" if code == EXIT_ERROR else "unsupported", "message": str(exc)}
    except UnsupportedSetting as exc:
        code = EXIT_UNSUPPORTED
        report["error"] = {"type": "unsupported", "message": str(exc)}
    except ResourceLimit as exc:
        code = EXIT_ERROR
        report["error"] = {"type": "resource", "message": str(exc), "progress": _plain(exc.progress)}
    except KnnXaiError as exc:
        code = EXIT_ERROR
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except OSError as exc:
        code = EXIT_ERROR
        report["error"] = {"type": "io", "message": str(exc)}
    report["exit_code"] = code
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    return code, report


def run(argv=None) -> tuple:
    """Parse and execute; returns ``(exit_code, report)`` without printing."""
    argv = sys.argv[1:] if argv is None else list(argv)
    return execute(build_parser().parse_args(argv), argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    code, report = execute(args, argv)
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(_render_text(report))
    if "error" in report:
        print(f"knnxai: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
