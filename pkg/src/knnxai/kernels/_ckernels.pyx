# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see _pykernels for the contracts."""
from libc.stdlib cimport malloc, free, calloc
from libc.math cimport sqrt, fabs
from libc.stdint cimport uint64_t, int64_t

NAME = "cython"
MAX_BITS = 64


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _popcount(uint64_t v) nogil:
    return __builtin_popcountll(v)


cdef int _label_counts(int* cpos, int* cneg, int maxd, int k) nogil:
    # cpos/cneg are histograms of distances 0..maxd
    cdef int d, total = 0, below = 0, pos_below = 0
    for d in range(maxd + 1):
        if total + cpos[d] + cneg[d] >= k:
            if pos_below + min(cpos[d], k - below) >= (k + 1) // 2:
                return 1
            return 0
        total += cpos[d] + cneg[d]
        below = total
        pos_below += cpos[d]
    return 0


cdef int _hlabel(uint64_t x, uint64_t* pos, int npos, uint64_t* neg, int nneg,
                 int* cpos, int* cneg, int n, int k) nogil:
    cdef int i
    for i in range(n + 1):
        cpos[i] = 0
        cneg[i] = 0
    for i in range(npos):
        cpos[_popcount(x ^ pos[i])] += 1
    for i in range(nneg):
        cneg[_popcount(x ^ neg[i])] += 1
    return _label_counts(cpos, cneg, n, k)


cdef class _Masks:
    cdef uint64_t* pos
    cdef uint64_t* neg
    cdef int npos, nneg, n
    cdef int* cpos
    cdef int* cneg

    def __cinit__(self, pos, neg, int n):
        self.npos = len(pos)
        self.nneg = len(neg)
        self.n = n
        self.pos = <uint64_t*> malloc(max(1, self.npos) * sizeof(uint64_t))
        self.neg = <uint64_t*> malloc(max(1, self.nneg) * sizeof(uint64_t))
        self.cpos = <int*> calloc(n + 2, sizeof(int))
        self.cneg = <int*> calloc(n + 2, sizeof(int))
        if not self.pos or not self.neg or not self.cpos or not self.cneg:
            raise MemoryError()
        cdef int i
        for i in range(self.npos):
            self.pos[i] = <uint64_t> pos[i]
        for i in range(self.nneg):
            self.neg[i] = <uint64_t> neg[i]

    def __dealloc__(self):
        free(self.pos)
        free(self.neg)
        free(self.cpos)
        free(self.cneg)

    cdef int label(self, uint64_t x, int k) nogil:
        return _hlabel(x, self.pos, self.npos, self.neg, self.nneg, self.cpos, self.cneg, self.n, k)


def _width(x, pos, neg):
    w = x.bit_length()
    for v in pos:
        w = max(w, v.bit_length())
    for v in neg:
        w = max(w, v.bit_length())
    return w


def hamming_label(x, pos, neg, int k):
    n = _width(x, pos, neg)
    if n > MAX_BITS:
        from . import _pykernels
        return _pykernels.hamming_label(x, pos, neg, k)
    cdef _Masks m = _Masks(pos, neg, n)
    return m.label(<uint64_t> x, k)


def first_flip(x, pos, neg, int n, int k, int size, int target, long long node_cap):
    if n > MAX_BITS:
        from . import _pykernels
        return _pykernels.first_flip(x, pos, neg, n, k, size, target, node_cap)
    cdef _Masks m = _Masks(pos, neg, n)
    cdef uint64_t ux = <uint64_t> x
    cdef long long nodes = 0
    cdef int i, j
    cdef uint64_t mask
    if size > n or size < 0:
        return -1, 0
    cdef int* idx = <int*> malloc((size + 1) * sizeof(int))
    if not idx:
        raise MemoryError()
    try:
        for i in range(size):
            idx[i] = i
        while True:
            if nodes >= node_cap:
                return -2, nodes
            nodes += 1
            mask = 0
            for i in range(size):
                mask |= (<uint64_t> 1) << idx[i]
            if m.label(ux ^ mask, k) == target:
                return int(mask), nodes
            # next combination in lexicographic order
            i = size - 1
            while i >= 0 and idx[i] == n - size + i:
                i -= 1
            if i < 0:
                return -1, nodes
            idx[i] += 1
            for j in range(i + 1, size):
                idx[j] = idx[j - 1] + 1
    finally:
        free(idx)


def first_completion(base, free_bits, pos, neg, int k, int target, long long node_cap):
    cdef int f = len(free_bits)
    n = max(_width(base, pos, neg), (max(free_bits) + 1) if f else 0)
    if n > MAX_BITS or f > 40:
        from . import _pykernels
        return _pykernels.first_completion(base, free_bits, pos, neg, k, target, node_cap)
    cdef _Masks m = _Masks(pos, neg, n)
    cdef uint64_t ub = <uint64_t> base
    cdef uint64_t* bits = <uint64_t*> malloc(max(1, f) * sizeof(uint64_t))
    if not bits:
        raise MemoryError()
    cdef int j
    cdef uint64_t t, y, total
    cdef long long nodes = 0
    try:
        for j in range(f):
            bits[j] = (<uint64_t> 1) << <int> free_bits[j]
        total = (<uint64_t> 1) << f
        t = 0
        while t < total:
            if nodes >= node_cap:
                return -2, nodes
            nodes += 1
            y = ub
            for j in range(f):
                if (t >> j) & 1:
                    y |= bits[j]
            if m.label(y, k) == target:
                return int(y), nodes
            t += 1
        return -1, nodes
    finally:
        free(bits)


def hildreth(G, h, x, double tol, long long max_sweeps, lam0=None):
    cdef int m = len(G)
    cdef int n = len(x)
    cdef double* g = <double*> malloc(max(1, m * n) * sizeof(double))
    cdef double* hb = <double*> malloc(max(1, m) * sizeof(double))
    cdef double* lam = <double*> malloc(max(1, m) * sizeof(double))
    cdef double* nrm = <double*> malloc(max(1, m) * sizeof(double))
    cdef double* y = <double*> malloc(max(1, n) * sizeof(double))
    if not g or not hb or not lam or not nrm or not y:
        free(g); free(hb); free(lam); free(nrm); free(y)
        raise MemoryError()
    cdef int i, j
    cdef long long sweeps = 0
    cdef double s, old, new, step, half, move, delta = float("inf")
    try:
        for i in range(m):
            row = G[i]
            s = 0.0
            for j in range(n):
                g[i * n + j] = row[j]
                s += g[i * n + j] * g[i * n + j]
            nrm[i] = s
            hb[i] = h[i]
            lam[i] = lam0[i] if lam0 is not None else 0.0
        for j in range(n):
            y[j] = x[j]
        if lam0 is not None:
            for i in range(m):
                if lam[i] != 0.0:
                    for j in range(n):
                        y[j] += 0.5 * lam[i] * g[i * n + j]
        with nogil:
            while sweeps < max_sweeps:
                sweeps += 1
                delta = 0.0
                for i in range(m):
                    s = 0.0
                    for j in range(n):
                        s += g[i * n + j] * y[j]
                    old = lam[i]
                    new = old + 2.0 * (hb[i] - s) / nrm[i]
                    if new < 0.0:
                        new = 0.0
                    step = new - old
                    if step != 0.0:
                        lam[i] = new
                        half = 0.5 * step
                        for j in range(n):
                            y[j] += half * g[i * n + j]
                        move = fabs(half) * sqrt(nrm[i])
                        if move > delta:
                            delta = move
                if delta < tol:
                    break
        return [y[j] for j in range(n)], [lam[i] for i in range(m)], sweeps, delta
    finally:
        free(g); free(hb); free(lam); free(nrm); free(y)


cdef struct _Grid:
    int n
    int npts
    int k
    int target
    int64_t* vals      # flattened candidate values
    int* offs          # offsets into vals, n + 1 entries
    int64_t* x
    int64_t* pts       # npts * n
    int* labels
    int64_t* partial
    int64_t* y
    int64_t* best_y
    int64_t best
    int found
    long long nodes
    long long cap
    int64_t* scratch   # 2 * npts


cdef int _grid_label(_Grid* G) nogil:
    # optimistic rule on the partial distance array; insertion-sort scratch
    cdef int a, b, cnt = G.npts
    cdef int64_t v, dk
    for a in range(cnt):
        v = G.partial[a]
        b = a - 1
        while b >= 0 and G.scratch[b] > v:
            G.scratch[b + 1] = G.scratch[b]
            b -= 1
        G.scratch[b + 1] = v
    dk = G.scratch[G.k - 1]
    cdef int below = 0, pos_below = 0, pos_at = 0
    for a in range(cnt):
        v = G.partial[a]
        if v < dk:
            below += 1
            if G.labels[a] == 1:
                pos_below += 1
        elif v == dk and G.labels[a] == 1:
            pos_at += 1
    if pos_below + min(pos_at, G.k - below) >= (G.k + 1) // 2:
        return 1
    return 0


cdef int _grid_rec(_Grid* G, int i, int64_t dist) nogil:
    cdef int t, j
    cdef int64_t v, nd, dv
    if G.nodes >= G.cap:
        return 0
    G.nodes += 1
    if i == G.n:
        if _grid_label(G) == G.target and dist < G.best:
            G.best = dist
            G.found = 1
            for j in range(G.n):
                G.best_y[j] = G.y[j]
        return 1
    for t in range(G.offs[i], G.offs[i + 1]):
        v = G.vals[t]
        nd = dist + (v - G.x[i] if v >= G.x[i] else G.x[i] - v)
        if nd >= G.best:
            break
        G.y[i] = v
        for j in range(G.npts):
            dv = v - G.pts[j * G.n + i]
            G.partial[j] += dv if dv >= 0 else -dv
        if not _grid_rec(G, i + 1, nd):
            for j in range(G.npts):
                dv = v - G.pts[j * G.n + i]
                G.partial[j] -= dv if dv >= 0 else -dv
            return 0
        for j in range(G.npts):
            dv = v - G.pts[j * G.n + i]
            G.partial[j] -= dv if dv >= 0 else -dv
    return 1


def l1_grid_search(values, x, points, labels, int k, int target, limit, long long node_cap):
    cdef _Grid G
    cdef int i, j, t, complete
    G.n = len(x)
    G.npts = len(points)
    G.k = k
    G.target = target
    total = sum(len(v) for v in values)
    G.vals = <int64_t*> malloc(max(1, total) * sizeof(int64_t))
    G.offs = <int*> malloc((G.n + 1) * sizeof(int))
    G.x = <int64_t*> malloc(max(1, G.n) * sizeof(int64_t))
    G.pts = <int64_t*> malloc(max(1, G.npts * G.n) * sizeof(int64_t))
    G.labels = <int*> malloc(max(1, G.npts) * sizeof(int))
    G.partial = <int64_t*> calloc(max(1, G.npts), sizeof(int64_t))
    G.y = <int64_t*> calloc(max(1, G.n), sizeof(int64_t))
    G.best_y = <int64_t*> calloc(max(1, G.n), sizeof(int64_t))
    G.scratch = <int64_t*> calloc(max(2, 2 * G.npts), sizeof(int64_t))
    try:
        if (not G.vals or not G.offs or not G.x or not G.pts or not G.labels
                or not G.partial or not G.y or not G.best_y or not G.scratch):
            raise MemoryError()
        t = 0
        for i in range(G.n):
            G.offs[i] = t
            for v in values[i]:
                G.vals[t] = v
                t += 1
            G.x[i] = x[i]
        G.offs[G.n] = t
        for j in range(G.npts):
            G.labels[j] = labels[j]
            for i in range(G.n):
                G.pts[j * G.n + i] = points[j][i]
        G.best = limit + 1
        G.found = 0
        G.nodes = 0
        G.cap = node_cap
        with nogil:
            complete = _grid_rec(&G, 0, 0)
        best_y = tuple(G.best_y[i] for i in range(G.n)) if G.found else None
        return best_y, G.best, G.nodes, bool(complete)
    finally:
        free(G.vals); free(G.offs); free(G.x); free(G.pts); free(G.labels)
        free(G.partial); free(G.y); free(G.best_y); free(G.scratch)
