"""Hardness constructions as instance generators, with brute-force oracles.

Each generator maps a small source instance (graph, knapsack, Boolean
matrix) to an explanation problem and records the source answer, so a
solver can be checked end to end against an independent enumeration.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .core import BOOLEAN, HAMMING, L1, RATIONAL, LabeledDataset, MetricSpec, _classify
from .errors import InputError, InternalError, PreconditionError, ResourceLimit

MAX_SUBSETS = 2**20


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple

    def __post_init__(self):
        if self.n < 0:
            raise InputError("vertex count must be nonnegative")
        seen = set()
        norm = []
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InputError(f"edge ({u}, {v}) out of range for {self.n} vertices")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InputError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "edges", tuple(norm))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, tuple(combinations(range(n), 2)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, tuple((i, i + 1) for i in range(n - 1)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(n, tuple((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def star(cls, n: int) -> "Graph":
        return cls(n, tuple((0, i) for i in range(1, n)))

    @property
    def m(self) -> int:
        return len(self.edges)

    def connected(self) -> bool:
        if self.n == 0:
            return True
        adj = {v: set() for v in range(self.n)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def incidence(self, j: int) -> tuple:
        u, v = self.edges[j]
        return tuple(1 if i in (u, v) else 0 for i in range(self.n))


@dataclass(frozen=True)
class KnapsackInstance:
    weights: tuple
    values: tuple
    capacity: int

    def __post_init__(self):
        w, v = tuple(self.weights), tuple(self.values)
        if len(w) != len(v) or not w:
            raise InputError("weights and values must be nonempty and of equal length")
        if any(int(a) != a or a <= 0 for a in w + v) or int(self.capacity) != self.capacity or self.capacity <= 0:
            raise InputError("knapsack weights, values and capacity must be positive integers")
        object.__setattr__(self, "weights", tuple(int(a) for a in w))
        object.__setattr__(self, "values", tuple(int(a) for a in v))
        object.__setattr__(self, "capacity", int(self.capacity))


@dataclass(frozen=True)
class BmcfInstance:
    matrix: tuple
    budget: int
    slack: int

    def __post_init__(self):
        rows = tuple(tuple(int(b) for b in r) for r in self.matrix)
        if not rows:
            raise InputError("matrix must have at least one row")
        width = len(rows[0])
        if any(len(r) != width for r in rows) or any(b not in (0, 1) for r in rows for b in r):
            raise InputError("matrix must be a rectangular 0/1 array")
        if not (0 <= self.budget <= width):
            raise InputError("budget must lie between 0 and the column count")
        if self.slack < 0:
            raise InputError("slack must be nonnegative")
        object.__setattr__(self, "matrix", rows)

    @property
    def shape(self) -> tuple:
        return len(self.matrix), len(self.matrix[0])


@dataclass(frozen=True)
class GeneratedInstance:
    family: str
    dataset: LabeledDataset
    metric: MetricSpec
    k: int
    x: tuple
    budget: object
    expected_label: int
    truth: dict = field(default_factory=dict)

    def check(self) -> None:
        got = _classify(self.dataset, self.metric, self.k, self.x)
        if got != self.expected_label:
            raise InternalError(f"{self.family}: x classifies to {got}, construction says {self.expected_label}")


def _subsets(n: int, max_size: int | None = None):
    if 2**n > MAX_SUBSETS:
        raise ResourceLimit(f"{2**n} subsets exceed the enumeration budget", {"n": n})
    top = n if max_size is None else min(n, max_size)
    for r in range(top + 1):
        yield from combinations(range(n), r)


def solve_vc_bruteforce(G: Graph, ell: int, c: int = 0) -> bool:
    """Is there a vertex set of size <= ell leaving at most c edges uncovered?"""
    for S in _subsets(G.n, ell):
        s = set(S)
        if sum(1 for u, v in G.edges if u not in s and v not in s) <= c:
            return True
    return False


def min_vertex_cover(G: Graph) -> int:
    for r in range(G.n + 1):
        if solve_vc_bruteforce(G, r):
            return r
    raise InternalError("the full vertex set is always a cover")


def solve_knapsack_bruteforce(ki: KnapsackInstance) -> bool:
    """Some item set of weight <= W reaches at least half of the total value."""
    total = sum(ki.values)
    for S in _subsets(len(ki.weights)):
        if sum(ki.weights[i] for i in S) <= ki.capacity and 2 * sum(ki.values[i] for i in S) >= total:
            return True
    return False


def solve_bmcf_bruteforce(bi: BmcfInstance) -> bool:
    """Flip at most ``budget`` columns so all but ``slack`` rows weigh at most |T| - 1."""
    m, n = bi.shape
    for T in _subsets(n, bi.budget):
        t = set(T)
        bad = 0
        for row in bi.matrix:
            w = sum((1 - b) if j in t else b for j, b in enumerate(row))
            if w > len(T) - 1:
                bad += 1
                if bad > bi.slack:
                    break
        if bad <= bi.slack:
            return True
    return False


def epsilon_ladder(count: int) -> list:
    return [Fraction(1, 2 * (h + 1)) for h in range(1, count + 1)]


def gen_vc_minsr_continuous(G: Graph, k: int, p: int = 2) -> GeneratedInstance:
    """Minimum sufficient reason over R^n whose answer is the vertex cover number of G."""
    if G.m == 0:
        raise PreconditionError("graph needs at least one edge")
    if k < 1 or k % 2 == 0:
        raise PreconditionError("k must be odd and positive")
    if p < 1:
        raise PreconditionError("p must be at least 1")
    neg, pos = [], []
    for j, (u, v) in enumerate(G.edges):
        for eps in epsilon_ladder((k + 1) // 2):
            y = [Fraction(0)] * G.n
            y[u] = y[v] = 1 + eps
            neg.append(tuple(y))
            for end in (u, v):
                z = list(y)
                z[end] = eps
                pos.append(tuple(z))
    ds = LabeledDataset.from_points(pos, neg, domain=RATIONAL)
    x = tuple([Fraction(0)] * G.n)
    vc = min_vertex_cover(G)
    inst = GeneratedInstance("vc-minsr-cont", ds, MetricSpec.lp(p), k, x, vc, 1,
                             {"graph": _graph_record(G), "min_vertex_cover": vc, "min_sr_size": vc})
    inst.check()
    return inst


def gen_vc_minsr_discrete(G: Graph) -> GeneratedInstance:
    """Boolean k=1 counterpart: S- holds edge incidence vectors, S+ their one-bit drops."""
    if G.m == 0:
        raise PreconditionError("graph needs at least one edge")
    neg, pos = [], []
    for j, (u, v) in enumerate(G.edges):
        y = G.incidence(j)
        neg.append(y)
        for end in (u, v):
            z = list(y)
            z[end] = 0
            pos.append(tuple(z))
    ds = LabeledDataset.from_points(pos, neg, domain=BOOLEAN)
    x = tuple([0] * G.n)
    vc = min_vertex_cover(G)
    inst = GeneratedInstance("vc-minsr-disc", ds, HAMMING, 1, x, vc, 1,
                             {"graph": _graph_record(G), "min_vertex_cover": vc, "min_sr_size": vc})
    inst.check()
    return inst


def gen_knapsack_cf_l1(ki: KnapsackInstance) -> GeneratedInstance:
    """Two-point l1 instance: a counterfactual within W exists iff the knapsack answer is yes."""
    gamma = Fraction(1, 2 * max(ki.values))
    g = tuple(Fraction(w) for w in ki.weights)
    h = tuple(Fraction(w) - gamma * v for w, v in zip(ki.weights, ki.values))
    ds = LabeledDataset.from_points([g], [h], domain=RATIONAL)
    x = tuple([Fraction(0)] * len(g))
    answer = solve_knapsack_bruteforce(ki)
    inst = GeneratedInstance("knapsack-l1", ds, L1, 1, x, Fraction(ki.capacity), 0,
                             {"weights": list(ki.weights), "values": list(ki.values),
                              "capacity": ki.capacity, "gamma": str(gamma), "answer": answer})
    inst.check()
    return inst


def lift_cf_l1_to_k(inst: GeneratedInstance, k: int) -> GeneratedInstance:
    """Pad a two-point instance to odd k with (k-1)/2 decoys per class and a far coordinate."""
    if inst.family != "knapsack-l1":
        raise PreconditionError("only knapsack instances can be lifted")
    if k < 3 or k % 2 == 0:
        raise PreconditionError("k must be odd and at least 3")
    ds = inst.dataset
    n = ds.dimension
    big = 10 * (inst.budget + k)
    half = (k - 1) // 2

    def decoy(j):
        return (Fraction(j),) + tuple([Fraction(0)] * n)

    pos = [p + (big,) for p in ds.positives] + [decoy(j) for j in range(1, half + 1)]
    neg = [p + (big,) for p in ds.negatives] + [decoy(j) for j in range(half + 1, k)]
    lifted = LabeledDataset.from_points(pos, neg, domain=RATIONAL)
    truth = dict(inst.truth, lifted_k=k, far_coordinate=str(big))
    out = GeneratedInstance("knapsack-l1-lifted", lifted, L1, k, inst.x + (Fraction(0),), inst.budget,
                            inst.expected_label, truth)
    out.check()
    return out


def gen_vc_to_bmcf(G: Graph, ell: int, p: int = 0) -> BmcfInstance:
    """Edge-vertex incidence rows plus an all-ones column; budget ell + 1."""
    if G.m < p + 1:
        raise PreconditionError(f"graph needs at least {p + 1} edges")
    rows = [G.incidence(j) + (1,) for j in range(G.m)]
    return BmcfInstance(tuple(rows), min(ell + 1, G.n + 1), p)


def bmcf_padding_needed(bi: BmcfInstance) -> int:
    """Zero columns to append so every row has at least two zeros."""
    return max(0, max(2 - sum(1 for b in row if b == 0) for row in bi.matrix))


def pad_bmcf(bi: BmcfInstance, columns: int) -> BmcfInstance:
    """Append all-zero columns; flipping them never helps, so the answer is unchanged."""
    rows = tuple(row + (0,) * columns for row in bi.matrix)
    return BmcfInstance(rows, bi.budget, bi.slack)


def gen_bmcf_cf_hamming(bi: BmcfInstance, pad: bool = False) -> GeneratedInstance:
    """Hamming instance with k = 2 * slack + 1 that has a counterfactual iff ``bi`` is yes.

    The matrix must have distinct rows, two zeros per row and more rows than
    ``slack``; ``pad=True`` appends zero columns to meet the zero-count rule.
    """
    if pad:
        bi = pad_bmcf(bi, bmcf_padding_needed(bi))
    m, n = bi.shape
    p = bi.slack
    if len(set(bi.matrix)) != m:
        raise PreconditionError("matrix rows must be distinct")
    if any(sum(1 for b in row if b == 0) < 2 for row in bi.matrix):
        raise PreconditionError("every row needs at least two zeros (pass pad=True to append zero columns)")
    if m < p + 1:
        raise PreconditionError(f"matrix needs at least {p + 1} rows")
    pos = [row + (0,) * (p + 1) for row in bi.matrix]
    neg = [(0,) * (n + j) + (1,) + (0,) * (p - j) for j in range(p + 1)]
    ds = LabeledDataset.from_points(pos, neg, domain=BOOLEAN)
    x = (1,) * (n + p + 1)
    answer = solve_bmcf_bruteforce(bi)
    inst = GeneratedInstance("bmcf", ds, HAMMING, 2 * p + 1, x, bi.budget, 1,
                             {"matrix": [list(r) for r in bi.matrix], "budget": bi.budget,
                              "slack": p, "answer": answer})
    inst.check()
    return inst


def gen_check_sr_k3_discrete(G: Graph, k: int = 3) -> GeneratedInstance:
    """Hamming instance where the empty set fails to be sufficient iff a half-size near cover exists.

    Near cover: at most n/2 vertices leaving at most (k-1)/2 edges uncovered.
    """
    if k < 3 or k % 2 == 0:
        raise PreconditionError("k must be odd and at least 3")
    c = (k - 1) // 2
    n = G.n
    if not G.connected() or n % 2 or n <= 2 * (c + 1) or G.m == 0:
        raise PreconditionError(f"graph must be connected with an even vertex count above {2 * (c + 1)}")

    def alpha(h):
        return tuple(1 if i == h else 0 for i in range(c))

    neg = [G.incidence(j) + alpha(0) for j in range(G.m)]
    pos = [(0,) * n + alpha(0)] + [(1,) * n + alpha(h) for h in range(c)]
    ds = LabeledDataset.from_points(pos, neg, domain=BOOLEAN)
    x = (0,) * (n + c)
    cover = solve_vc_bruteforce(G, n // 2, c)
    inst = GeneratedInstance("checksr-k3", ds, HAMMING, k, x, None, 0,
                             {"graph": _graph_record(G), "near_cover": cover, "empty_sufficient": not cover})
    inst.check()
    return inst


def _graph_record(G: Graph) -> dict:
    return {"n": G.n, "edges": [[u + 1, v + 1] for u, v in G.edges]}


def random_connected_graph(n: int, prob: float, rng: random.Random, tries: int = 1000) -> Graph:
    """Erdos-Renyi G(n, prob) conditioned on connectivity by rejection."""
    for _ in range(tries):
        edges = tuple((u, v) for u, v in combinations(range(n), 2) if rng.random() < prob)
        G = Graph(n, edges)
        if G.connected():
            return G
    raise ResourceLimit(f"no connected G({n}, {prob}) after {tries} draws", {"tries": tries})


def graph_corpus(max_vertices: int = 8, random_per_size: int = 2, seed: int = 7) -> list:
    """Fixed connected graphs (paths, cycles, stars, cliques) plus seeded random ones."""
    out = []
    seen = set()

    def add(G):
        key = (G.n, tuple(sorted(G.edges)))
        if key not in seen and G.m:
            seen.add(key)
            out.append(G)

    for n in range(2, max_vertices + 1):
        add(Graph.path(n))
        if n >= 3:
            add(Graph.cycle(n))
        if n >= 4:
            add(Graph.star(n))
        if n <= 5:
            add(Graph.complete(n))
    rng = random.Random(seed)
    for n in range(4, max_vertices + 1):
        for _ in range(random_per_size):
            add(random_connected_graph(n, 0.4, rng))
    return out


def random_knapsack(items: int, rng: random.Random, top: int = 9) -> KnapsackInstance:
    w = tuple(rng.randint(1, top) for _ in range(items))
    v = tuple(rng.randint(1, top) for _ in range(items))
    cap = rng.randint(1, max(1, sum(w) // 2 + 1))
    return KnapsackInstance(w, v, cap)


def parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise InputError(f"expected a comma-separated integer list, got {text!r}") from exc

