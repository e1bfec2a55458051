"""Non-binary quasi-cyclic LDPC codes: PEG construction and FFT-SPA decoding.

A code is stored as its expanded edge list.  Edge ``e`` joins symbol
``var[e]`` and check ``chk[e]`` with nonzero label ``label[e]``; check ``c``
reads ``sum_e label[e] * x[var[e]] = 0`` over GF(q).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from tepcc.gf import FieldContext

NEG_INF = -1.0e9
_TINY = 1e-300


@dataclass
class QcLdpcCode:
    ctx: FieldContext
    rows: int  # block rows
    cols: int  # block columns
    b: int  # circulant size
    w: int  # column weight
    circulants: list[tuple[int, int, int]]  # (block_row, block_col, shift)
    labels: np.ndarray
    seed: int = 0
    _hp_inv: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        var, chk = [], []
        for r, c, s in self.circulants:
            u = np.arange(self.b)
            var.append(c * self.b + u)
            chk.append(r * self.b + (u + s) % self.b)
        self.var = np.concatenate(var).astype(np.int64) if var else np.zeros(0, np.int64)
        self.chk = np.concatenate(chk).astype(np.int64) if chk else np.zeros(0, np.int64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != self.var.shape:
            raise ValueError("one label per expanded edge required")
        if np.any(self.labels <= 0) or np.any(self.labels >= self.ctx.q):
            raise ValueError("edge labels must be nonzero field elements")

    @property
    def n(self) -> int:
        return self.cols * self.b

    @property
    def m(self) -> int:
        return self.rows * self.b

    @property
    def k(self) -> int:
        return self.n - self.m

    @property
    def p(self) -> int:
        return self.m

    @property
    def q(self) -> int:
        return self.ctx.q

    def parity_check_matrix(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.int64)
        H[self.chk, self.var] = self.labels
        return H

    def syndrome(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.int64)
        terms = self.ctx.vmul(self.labels, word[..., self.var])
        out = np.zeros(word.shape[:-1] + (self.m,), dtype=np.int64)
        order = np.argsort(self.chk, kind="stable")
        starts = np.searchsorted(self.chk[order], np.arange(self.m))
        red = np.bitwise_xor.reduceat(terms[..., order], starts, axis=-1)
        out[...] = red
        return out

    def is_codeword(self, word) -> bool:
        return not np.any(self.syndrome(word))

    def column_weights(self) -> np.ndarray:
        return np.bincount(self.var, minlength=self.n)

    def row_weights(self) -> np.ndarray:
        return np.bincount(self.chk, minlength=self.m)

    # encoding
    def _parity_inverse(self) -> np.ndarray:
        if self._hp_inv is None:
            H = self.parity_check_matrix()
            self._hp_inv = gf_matrix_inverse(self.ctx, H[:, self.k :])
        return self._hp_inv

    def encode(self, data) -> np.ndarray:
        return qc_encode(self, data)

    def to_alist(self, path: str | Path | None = None) -> str:
        return write_alist(self, path)


def gf_matrix_inverse(ctx: FieldContext, A: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse over GF(q); raises ValueError when singular."""
    A = np.array(A, dtype=np.int64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    aug = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
    for col in range(n):
        piv = np.flatnonzero(aug[col:, col])
        if piv.size == 0:
            raise ValueError("singular matrix")
        p = col + piv[0]
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        aug[col] = ctx.vmul(aug[col], ctx.inv(int(aug[col, col])))
        f = aug[:, col].copy()
        f[col] = 0
        nz = np.flatnonzero(f)
        if nz.size:
            aug[nz] ^= ctx.vmul(f[nz, None], aug[col][None, :])
    return aug[:, n:]


def gf_matvec(ctx: FieldContext, M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """M @ x over GF(q); x may carry leading batch axes."""
    prod = ctx.vmul(M, np.asarray(x, dtype=np.int64)[..., None, :])
    return np.bitwise_xor.reduce(prod, axis=-1)


def qc_encode(code: QcLdpcCode, data) -> np.ndarray:
    """Systematic encoding: data symbols first, the m parity symbols last."""
    data = np.asarray(data, dtype=np.int64)
    if data.shape[-1] != code.k:
        raise ValueError(f"expected {code.k} data symbols, got {data.shape[-1]}")
    word = np.zeros(data.shape[:-1] + (code.n,), dtype=np.int64)
    word[..., : code.k] = data
    s = code.syndrome(word)
    word[..., code.k :] = gf_matvec(code.ctx, code._parity_inverse(), s)
    return word


# ---------------------------------------------------------------- construction


class _Graph:
    def __init__(self, n: int, m: int):
        self.vadj: list[list[int]] = [[] for _ in range(n)]
        self.cadj: list[list[int]] = [[] for _ in range(m)]

    def add(self, v: int, c: int) -> None:
        self.vadj[v].append(c)
        self.cadj[c].append(v)

    def remove(self, v: int, c: int) -> None:
        self.vadj[v].remove(c)
        self.cadj[c].remove(v)

    def check_depths(self, v: int) -> np.ndarray:
        """BFS depth (in check layers) of each check from variable v; -1 = unreachable."""
        depth = np.full(len(self.cadj), -1, dtype=np.int64)
        seen_v = {v}
        frontier = [v]
        d = 0
        while frontier:
            nxt = []
            for x in frontier:
                for c in self.vadj[x]:
                    if depth[c] < 0:
                        depth[c] = d
                        for y in self.cadj[c]:
                            if y not in seen_v:
                                seen_v.add(y)
                                nxt.append(y)
            frontier = nxt
            d += 1
        return depth

    def path_length(self, v: int, c: int, limit: int) -> int:
        """Edges on the shortest v -> c path, ignoring the edge (v, c) itself."""
        dist = {("v", v): 0}
        queue = deque([("v", v)])
        while queue:
            node = queue.popleft()
            d = dist[node]
            if d >= limit:
                break
            kind, x = node
            nbrs = self.vadj[x] if kind == "v" else self.cadj[x]
            nk = "c" if kind == "v" else "v"
            for y in nbrs:
                if kind == "v" and x == v and y == c:
                    continue
                key = (nk, y)
                if key in dist:
                    continue
                if key == ("c", c):
                    return d + 1
                dist[key] = d + 1
                queue.append(key)
        return 10**9


def peg_qc_construct(
    cols: int,
    rows: int,
    b: int,
    w: int,
    q: int | FieldContext,
    seed: int = 0,
    require_encodable: bool = True,
    max_attempts: int = 20,
) -> QcLdpcCode:
    """Progressive edge growth under a quasi-cyclic constraint.

    Edges are grown on one representative symbol per block column; each
    chosen edge is expanded into a b x b circulant, so the neighbourhood of
    every symbol in the block is a shifted copy of the representative's.  A
    column may take two circulants in the same block row when that gives a
    longer cycle (needed when cols > b with rows == w).

    Among candidate checks the farthest (or unreachable) ones win, then the
    lowest degree; the remaining tie is broken by a generator seeded with
    ``seed``.  With ``require_encodable`` the construction retries with
    ``seed + 1, ...`` until the parity part of H is invertible.
    """
    ctx = q if isinstance(q, FieldContext) else FieldContext(int(q).bit_length() - 1)
    if cols < 1 or rows < 1 or b < 1 or w < 1:
        raise ValueError("dimensions must be positive")
    if w > rows * b:
        raise ValueError("column weight exceeds the number of checks")
    if rows >= cols:
        raise ValueError("need more block columns than block rows")
    last_err = None
    for attempt in range(max_attempts):
        code = _peg_qc_once(cols, rows, b, w, ctx, seed + attempt)
        if not require_encodable:
            return code
        try:
            code._parity_inverse()
            return code
        except ValueError as err:
            last_err = err
    raise ValueError(f"no encodable construction after {max_attempts} seeds: {last_err}")


def _peg_qc_once(cols, rows, b, w, ctx, seed) -> QcLdpcCode:
    rng = np.random.default_rng(seed)
    n, m = cols * b, rows * b
    graph = _Graph(n, m)
    circulants: list[tuple[int, int, int]] = []
    deg = np.zeros(m, dtype=np.int64)
    for c in range(cols):
        v = c * b
        used: set[tuple[int, int]] = set()
        for e in range(w):
            depth = graph.check_depths(v) if e else np.full(m, -1)
            blocked = np.zeros(m, dtype=bool)
            for r, s in used:
                blocked[r * b + s] = True
            unreachable = (depth < 0) & ~blocked
            if unreachable.any():
                pool = np.flatnonzero(unreachable)
                predicted = 10**9
            else:
                far = depth[~blocked].max()
                pool = np.flatnonzero((depth == far) & ~blocked)
                predicted = 2 * (far + 1)
            # rank: lowest degree, then seeded random order
            keys = rng.permutation(pool.size)
            ranked = pool[np.lexsort((keys, deg[pool]))]
            choice, best_len = None, -1
            for cand in ranked:
                r, s = divmod(int(cand), b)
                added = _add_circulant(graph, c, r, s, b)
                length = graph.path_length(v, int(cand), limit=predicted) + 1
                for vv, cc in added:
                    graph.remove(vv, cc)
                if length > best_len:
                    choice, best_len = int(cand), length
                if length >= predicted:
                    break
            r, s = divmod(choice, b)
            _add_circulant(graph, c, r, s, b)
            used.add((r, s))
            circulants.append((r, c, s))
            deg[r * b : (r + 1) * b] += 1
    labels = rng.integers(1, ctx.q, size=len(circulants) * b)
    return QcLdpcCode(ctx, rows, cols, b, w, circulants, labels, seed=seed)


def _add_circulant(graph: _Graph, c: int, r: int, s: int, b: int) -> list[tuple[int, int]]:
    added = []
    for u in range(b):
        vv, cc = c * b + u, r * b + (u + s) % b
        graph.add(vv, cc)
        added.append((vv, cc))
    return added


def girth(code: QcLdpcCode, sources=None) -> float:
    """Length of the shortest cycle in the Tanner graph (inf if acyclic).

    For QC codes the block-column representatives suffice as sources.
    """
    n, m = code.n, code.m
    adj: list[list[int]] = [[] for _ in range(n + m)]
    for v, c in zip(code.var.tolist(), code.chk.tolist()):
        adj[v].append(n + c)
        adj[n + c].append(v)
    if sources is None:
        sources = range(0, n, code.b)
    best = np.inf
    for s in sources:
        best = min(best, _shortest_cycle_through(adj, s))
    return best


def _shortest_cycle_through(adj: list[list[int]], s: int) -> float:
    dist = {s: 0}
    branch = {s: -1}
    queue = deque()
    best = np.inf
    for y in adj[s]:
        if y in dist:  # parallel edge
            return 2
        dist[y] = 1
        branch[y] = y
        queue.append(y)
    while queue:
        x = queue.popleft()
        if 2 * dist[x] + 1 >= best:
            break
        for y in adj[x]:
            if y == s:
                if dist[x] > 1:
                    best = min(best, dist[x] + 1)
                continue
            if y not in dist:
                dist[y] = dist[x] + 1
                branch[y] = branch[x]
                queue.append(y)
            elif branch[y] != branch[x]:
                best = min(best, dist[x] + dist[y] + 1)
    return best


# ---------------------------------------------------------------- alist I/O


def write_alist(code: QcLdpcCode, path: str | Path | None = None) -> str:
    """alist text with a GF label after every index; header line is ``n m q``."""
    n, m = code.n, code.m
    cols = [[] for _ in range(n)]
    rows = [[] for _ in range(m)]
    for v, c, h in zip(code.var.tolist(), code.chk.tolist(), code.labels.tolist()):
        cols[v].append((c, h))
        rows[c].append((v, h))
    for lst in cols + rows:
        lst.sort()
    lines = [
        f"{n} {m} {code.q}",
        f"{max(map(len, cols))} {max(map(len, rows))}",
        " ".join(str(len(x)) for x in cols),
        " ".join(str(len(x)) for x in rows),
    ]
    lines += [" ".join(f"{i + 1} {h}" for i, h in x) for x in cols]
    lines += [" ".join(f"{i + 1} {h}" for i, h in x) for x in rows]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_alist(text_or_path) -> tuple[np.ndarray, int]:
    """Parse labelled alist text into a dense (m, n) GF(q) matrix and q."""
    text = str(text_or_path)
    if "\n" not in text and Path(text).exists():
        text = Path(text).read_text()
    lines = [ln.split() for ln in text.strip().splitlines()]
    n, m, q = (int(x) for x in lines[0])
    H = np.zeros((m, n), dtype=np.int64)
    for j in range(n):
        vals = [int(x) for x in lines[4 + j]]
        for i, h in zip(vals[0::2], vals[1::2]):
            H[i - 1, j] = h
    for i in range(m):
        vals = [int(x) for x in lines[4 + n + i]]
        for j, h in zip(vals[0::2], vals[1::2]):
            if H[i, j - 1] != h:
                raise ValueError(f"row/column lists disagree at ({i}, {j - 1})")
    return H, q


# ---------------------------------------------------------------- decoding


def hadamard(q: int) -> np.ndarray:
    """Sylvester Hadamard matrix of order q (a power of two)."""
    if q < 1 or q & (q - 1):
        raise ValueError("order must be a power of two")
    H = np.ones((1, 1))
    while H.shape[0] < q:
        H = np.block([[H, H], [H, -H]])
    return H


def wht(x: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis."""
    x = np.asarray(x, dtype=np.float64)
    return x @ hadamard(x.shape[-1])


def normalize_max(msg: np.ndarray) -> np.ndarray:
    out = msg - msg.max(axis=-1, keepdims=True)
    return np.maximum(out, NEG_INF)


def recenter(msg: np.ndarray) -> np.ndarray:
    """gamma(0) = 0 convention."""
    return msg - msg[..., :1]


@numba.njit(cache=True, fastmath=True)
def _fwht(a):
    n = a.size
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                x = a[j]
                y = a[j + h]
                a[j] = x + y
                a[j + h] = x - y
        h *= 2


@numba.njit(cache=True, fastmath=True)
def _check_kernel(v2c, inv_perm, perm, starts):
    """Check-node update for all checks; edges are grouped by check."""
    E, q = v2c.shape
    out = np.empty((E, q))
    F = np.empty((E, q))
    for e in range(E):
        tot = 0.0
        for y in range(q):
            v = np.exp(v2c[e, inv_perm[e, y]])
            F[e, y] = v
            tot += v
        for y in range(q):
            F[e, y] /= tot
        _fwht(F[e])
    pre = np.empty(q)
    g = np.empty(q)
    for c in range(starts.size - 1):
        a, b = starts[c], starts[c + 1]
        # suffix products stored in out, prefix running in pre
        for y in range(q):
            out[b - 1, y] = 1.0
        for e in range(b - 2, a - 1, -1):
            for y in range(q):
                out[e, y] = out[e + 1, y] * F[e + 1, y]
        for y in range(q):
            pre[y] = 1.0
        for e in range(a, b):
            for y in range(q):
                g[y] = pre[y] * out[e, y]
                pre[y] *= F[e, y]
            _fwht(g)
            top = -np.inf
            for x in range(q):
                v = g[perm[e, x]] / q
                v = np.log(v) if v > _TINY else np.log(_TINY)
                out[e, x] = v
                if v > top:
                    top = v
            for x in range(q):
                v = out[e, x] - top
                out[e, x] = v if v > NEG_INF else NEG_INF
    return out


@numba.njit(cache=True)
def _var_kernel(channel, c2v, var, var_order, starts):
    n, q = channel.shape
    E = c2v.shape[0]
    post = channel.copy()
    for v in range(n):
        for u in range(starts[v], starts[v + 1]):
            e = var_order[u]
            for x in range(q):
                post[v, x] += c2v[e, x]
    v2c = np.empty((E, q))
    for e in range(E):
        top = -np.inf
        for x in range(q):
            val = post[var[e], x] - c2v[e, x]
            v2c[e, x] = val
            if val > top:
                top = val
        for x in range(q):
            val = v2c[e, x] - top
            v2c[e, x] = val if val > NEG_INF else NEG_INF
    return post, v2c


@dataclass
class SpaResult:
    posterior: np.ndarray  # (n, q) mlLLRs, slot 0 = 0
    decisions: np.ndarray
    converged: bool
    iterations: int


class FftSpaDecoder:
    """Log-domain FFT sum-product decoder over GF(2^p).

    Messages are kept max-normalised (largest entry 0, floor NEG_INF);
    ``messages()`` and the returned posteriors use the gamma(0) = 0 form.
    """

    def __init__(self, code: QcLdpcCode):
        self.code = code
        ctx = code.ctx
        q = ctx.q
        order = np.lexsort((code.var, code.chk))  # check-major edge order
        self.var = code.var[order]
        self.chk = code.chk[order]
        self.labels = code.labels[order]
        self.edge_order = order
        x = np.arange(q)
        # perm[e, x] = h_e * x ; the check sees y = h_e * x
        self.perm = ctx.vmul(self.labels[:, None], x[None, :])
        self.inv_perm = np.argsort(self.perm, axis=1)
        rows = np.arange(self.perm.shape[0])[:, None] * q
        self._to_check = (rows + self.inv_perm).ravel()
        self._from_check = (rows + self.perm).ravel()
        self._H = hadamard(q)
        self.check_starts = np.searchsorted(self.chk, np.arange(code.m))
        self.check_starts_full = np.searchsorted(self.chk, np.arange(code.m + 1))
        self.var_order = np.argsort(self.var, kind="stable")
        self.var_starts = np.searchsorted(self.var[self.var_order], np.arange(code.n))
        self.var_starts_full = np.searchsorted(self.var[self.var_order], np.arange(code.n + 1))
        self.v2c: np.ndarray | None = None
        self.c2v: np.ndarray | None = None
        self.channel: np.ndarray | None = None

    def start(self, channel_mlllrs) -> None:
        ch = np.asarray(channel_mlllrs, dtype=np.float64)
        if ch.shape != (self.code.n, self.code.q):
            raise ValueError(f"channel mlLLRs must have shape {(self.code.n, self.code.q)}")
        self.channel = normalize_max(ch)
        self.v2c = self.channel[self.var]
        self.c2v = np.zeros_like(self.v2c)

    def _check_update(self) -> None:
        self.c2v = _check_kernel(self.v2c, self.inv_perm, self.perm, self.check_starts_full)

    def _var_update(self) -> np.ndarray:
        post, self.v2c = _var_kernel(self.channel, self.c2v, self.var, self.var_order, self.var_starts_full)
        return post

    def iterate(self) -> np.ndarray:
        """One flooding iteration; returns the unnormalised posterior."""
        self._check_update()
        return self._var_update()

    def messages(self) -> tuple[np.ndarray, np.ndarray]:
        """(v2c, c2v) in the code's original edge order, gamma(0) = 0 form."""
        inv = np.argsort(self.edge_order)
        return recenter(self.v2c)[inv], recenter(self.c2v)[inv]

    def _settled(self, post: np.ndarray, dec: np.ndarray) -> bool:
        # a tied maximum leaves the decision undetermined, whatever argmax picked
        top = post[np.arange(post.shape[0]), dec]
        if np.count_nonzero(post >= top[:, None]) != post.shape[0]:
            return False
        return self.code.is_codeword(dec)

    def decode(self, channel_mlllrs, max_iter: int = 50) -> SpaResult:
        self.start(channel_mlllrs)
        post = self.channel
        dec = post.argmax(axis=1)
        if self._settled(post, dec):
            return SpaResult(recenter(post), dec, True, 0)
        for it in range(1, max_iter + 1):
            post = self.iterate()
            dec = post.argmax(axis=1)
            if self._settled(post, dec):
                return SpaResult(recenter(post), dec, True, it)
        return SpaResult(recenter(post), dec, False, max_iter)


def fft_spa_decode(code: QcLdpcCode, channel_mlllrs, max_iter: int = 50) -> SpaResult:
    return FftSpaDecoder(code).decode(channel_mlllrs, max_iter)
