"""GF(2) linear block-code algebra.

Parses MacKay-style alist files into parity-check matrices with their
Tanner-graph adjacency, derives generator matrices by Gaussian elimination
over GF(2), encodes messages, and computes syndromes.  Bit vectors are
numpy uint8 arrays with entries in {0, 1}; the bipolar map sends bit b to
the symbol 1 - 2b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AlistError(ValueError):
    """Malformed alist stream or an alist describing an unusable Tanner graph."""


def _frozen(a):
    a.setflags(write=False)
    return a


def _as_bits(x, name="bits"):
    x = np.asarray(x)
    if not np.isin(x, (0, 1)).all():
        raise ValueError(f"{name} entries must be 0 or 1")
    return x.astype(np.uint8)


@dataclass(frozen=True)
class ParityCheckMatrix:
    """Binary (n-k) x n parity-check matrix plus Tanner-graph adjacency.

    ``var_adjacency[v]`` holds the check indices incident to variable v and
    ``chk_adjacency[c]`` the variable indices incident to check c, both
    sorted ascending and exactly matching the nonzero pattern of ``rows``.
    Instances are immutable and safe to share across threads.
    """

    n: int
    k: int
    rows: np.ndarray
    var_adjacency: tuple
    chk_adjacency: tuple

    @classmethod
    def from_rows(cls, rows):
        rows = _as_bits(rows, "parity-check matrix")
        if rows.ndim != 2:
            raise ValueError("parity-check matrix must be two-dimensional")
        m, n = rows.shape
        if not 0 < m < n:
            raise ValueError(f"need 0 < n-k < n, got {m} rows of length {n}")
        chk_deg = rows.sum(axis=1)
        if (chk_deg < 2).any():
            bad = int(np.argmax(chk_deg < 2))
            raise AlistError(f"check {bad} has degree {int(chk_deg[bad])} < 2")
        var_adj = tuple(tuple(np.flatnonzero(rows[:, v]).tolist()) for v in range(n))
        chk_adj = tuple(tuple(np.flatnonzero(rows[c]).tolist()) for c in range(m))
        return cls(n=n, k=n - m, rows=_frozen(rows), var_adjacency=var_adj,
                   chk_adjacency=chk_adj)

    @property
    def num_checks(self):
        return self.n - self.k

    @property
    def num_edges(self):
        return sum(len(a) for a in self.chk_adjacency)

    @property
    def rate(self):
        return self.k / self.n


@dataclass(frozen=True)
class GeneratorMatrix:
    """k x n generator in the column-permuted basis [P^T | I].

    ``column_permutation[j]`` is the original column of H sitting at
    permuted position j; H itself is never permuted, so encode() maps
    results back to the original bit order.
    """

    matrix: np.ndarray
    column_permutation: np.ndarray

    @property
    def k(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[1]


def gf2_rank(mat):
    """Rank of a binary matrix over GF(2)."""
    a = _as_bits(mat).copy()
    m, n = a.shape
    rank = 0
    for j in range(n):
        if rank == m:
            break
        pivots = np.flatnonzero(a[rank:, j])
        if pivots.size == 0:
            continue
        i = rank + pivots[0]
        if i != rank:
            a[[rank, i]] = a[[i, rank]]
        elim = np.flatnonzero(a[:, j])
        elim = elim[elim != rank]
        a[elim] ^= a[rank]
        rank += 1
    return rank


def parse_alist(text):
    """Parse an alist character stream into a ParityCheckMatrix.

    Layout: "N M", "max_var_degree max_chk_degree", N variable degrees,
    M check degrees, then N zero-padded rows of 1-based check indices and
    M zero-padded rows of 1-based variable indices.  Zero entries are
    padding; duplicated indices are deduplicated.  The variable and check
    lists must describe the same matrix.
    """
    try:
        tokens = [int(t) for t in text.split()]
    except ValueError as exc:
        raise AlistError(f"non-integer token in alist: {exc}") from None
    it = iter(tokens)

    def take(count, what):
        out = []
        for _ in range(count):
            try:
                out.append(next(it))
            except StopIteration:
                raise AlistError(f"alist truncated while reading {what}") from None
        return out

    n, m = take(2, "header")
    if not 0 < m < n:
        raise AlistError(f"bad header: N={n}, M={m} (need 0 < M < N)")
    max_var_deg, max_chk_deg = take(2, "max degrees")
    if max_var_deg < 1 or max_chk_deg < 2:
        raise AlistError(f"bad max degrees {max_var_deg}/{max_chk_deg}")
    var_deg = take(n, "variable degrees")
    chk_deg = take(m, "check degrees")
    if max(var_deg) > max_var_deg or max(chk_deg) > max_chk_deg:
        raise AlistError("declared degree exceeds declared maximum")

    def entry_lists(count, width, limit, degrees, what):
        lists = []
        for i in range(count):
            raw = take(width, f"{what} list {i}")
            entries = sorted(set(e for e in raw if e != 0))
            for e in entries:
                if not 1 <= e <= limit:
                    raise AlistError(f"{what} list {i}: index {e} out of range 1..{limit}")
            if len(entries) != degrees[i]:
                raise AlistError(
                    f"{what} list {i}: {len(entries)} entries but declared degree {degrees[i]}")
            lists.append(entries)
        return lists

    var_lists = entry_lists(n, max_var_deg, m, var_deg, "variable")
    chk_lists = entry_lists(m, max_chk_deg, n, chk_deg, "check")
    leftover = sum(1 for _ in it)
    if leftover:
        raise AlistError(f"{leftover} unexpected trailing tokens")

    rows = np.zeros((m, n), dtype=np.uint8)
    for c, vs in enumerate(chk_lists):
        rows[c, [v - 1 for v in vs]] = 1
    for v, cs in enumerate(var_lists):
        if np.flatnonzero(rows[:, v]).tolist() != [c - 1 for c in cs]:
            raise AlistError(f"variable list {v} disagrees with check lists")
    return ParityCheckMatrix.from_rows(rows)


def serialize_alist(h):
    """Emit the canonical alist text for a ParityCheckMatrix."""
    m = h.num_checks
    max_var = max(len(a) for a in h.var_adjacency)
    max_chk = max(len(a) for a in h.chk_adjacency)
    lines = [f"{h.n} {m}", f"{max_var} {max_chk}"]
    lines.append(" ".join(str(len(a)) for a in h.var_adjacency))
    lines.append(" ".join(str(len(a)) for a in h.chk_adjacency))
    for adj, width in ((h.var_adjacency, max_var), (h.chk_adjacency, max_chk)):
        for entries in adj:
            padded = [e + 1 for e in entries] + [0] * (width - len(entries))
            lines.append(" ".join(str(e) for e in padded))
    return "\n".join(lines) + "\n"


def load_alist(path):
    with open(path, "r", encoding="ascii") as fh:
        return parse_alist(fh.read())


def derive_generator(h):
    """Generator matrix via GF(2) Gaussian elimination with column pivoting.

    Brings H to [I | P] by row operations plus a column permutation (pivot
    chosen as the first nonzero entry scanning left-to-right then
    top-to-bottom) and returns G = [P^T | I] in that permuted basis along
    with the permutation.  Raises if H is rank deficient.
    """
    a = h.rows.copy()
    m, n = a.shape
    pivot_cols = []
    r = 0
    for j in range(n):
        if r == m:
            break
        hits = np.flatnonzero(a[r:, j])
        if hits.size == 0:
            continue
        i = r + hits[0]
        if i != r:
            a[[r, i]] = a[[i, r]]
        elim = np.flatnonzero(a[:, j])
        elim = elim[elim != r]
        a[elim] ^= a[r]
        pivot_cols.append(j)
        r += 1
    if r < m:
        raise ValueError(f"parity-check matrix is rank deficient: rank {r} < {m}")
    free_cols = [j for j in range(n) if j not in set(pivot_cols)]
    perm = np.array(pivot_cols + free_cols, dtype=np.int64)
    p_block = a[:, free_cols]
    gen = np.concatenate([p_block.T, np.eye(h.k, dtype=np.uint8)], axis=1)
    return GeneratorMatrix(matrix=_frozen(gen.astype(np.uint8)),
                           column_permutation=_frozen(perm))


def encode(g, m):
    """Encode message bits (1-D length k, or a (B, k) batch) into codewords
    in the original column order of H."""
    m = _as_bits(m, "message")
    single = m.ndim == 1
    mm = np.atleast_2d(m)
    if mm.shape[1] != g.k:
        raise ValueError(f"message length {mm.shape[1]} != k={g.k}")
    permuted = (mm.astype(np.int64) @ g.matrix.astype(np.int64)) % 2
    out = np.empty_like(permuted)
    out[:, g.column_permutation] = permuted
    out = out.astype(np.uint8)
    return out[0] if single else out


def syndrome(h, x):
    """H x^T mod 2 and its number of nonzero entries (parity-check errors)."""
    x = _as_bits(x, "word")
    if x.shape[-1] != h.n:
        raise ValueError(f"word length {x.shape[-1]} != n={h.n}")
    s = (h.rows.astype(np.int64) @ x.astype(np.int64)) % 2
    return s.astype(np.uint8), int(s.sum())


def bipolar(x_b):
    """Map bits {0,1} to symbols {+1,-1} via 1 - 2b."""
    return 1.0 - 2.0 * _as_bits(x_b, "codeword").astype(np.float64)
