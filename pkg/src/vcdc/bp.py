"""Belief propagation on the Tanner graph.

Flooding schedule with sum-product (exact, tanh/arctanh) or min-sum check
updates and syndrome-based early exit.  Edges are enumerated check-major,
variable ascending within each check; message arrays, and any weights tied
to them, are indexed by that canonical order.

The module exposes the per-edge update rules as scalar functions and a
batch decoder vectorized over codewords; a single decode is a batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import syndrome

# Product clamp inside arctanh; keeps check messages finite (|u| <= ~28.4).
ATANH_EPS = 1e-12

SUM_PRODUCT = "sum-product"
MIN_SUM = "min-sum"


@dataclass(frozen=True)
class BpConfig:
    """Decoder knobs: iteration cap, check-update rule, clamping bounds.

    ``early_exit`` stops a frame once its hard decision satisfies every
    parity check; disabling it runs all iterations (used when converged
    marginals themselves are of interest).
    """

    max_iters: int = 5
    variant: str = SUM_PRODUCT
    llr_clamp: float = 1e9
    message_clamp: float = 30.0
    early_exit: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.variant not in (SUM_PRODUCT, MIN_SUM):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.llr_clamp <= 0 or self.message_clamp <= 0:
            raise ValueError("clamps must be positive")


@dataclass(frozen=True)
class DecodeResult:
    """Hard decisions, final beliefs, work done, and syndrome status."""

    bits: np.ndarray
    beliefs: np.ndarray
    steps_used: int
    syndrome_zero: bool
    parity_errors: int


class EdgeIndex:
    """Canonical edge enumeration of a Tanner graph plus gather/scatter maps.

    Edge e runs between check edge_chk[e] and variable edge_var[e]; edges
    are sorted by (check, variable).  Checks are grouped by degree so check
    updates vectorize as (batch, checks_of_degree_d, d) blocks.
    """

    def __init__(self, h):
        self.h = h
        chks, vars_ = [], []
        for c, vs in enumerate(h.chk_adjacency):
            chks.extend([c] * len(vs))
            vars_.extend(vs)
        self.edge_chk = np.asarray(chks, dtype=np.int64)
        self.edge_var = np.asarray(vars_, dtype=np.int64)
        self.num_edges = self.edge_var.size

        degrees = np.asarray([len(vs) for vs in h.chk_adjacency])
        row_splits = np.concatenate([[0], np.cumsum(degrees)])
        self.degree_groups = {}
        for d in sorted(set(degrees.tolist())):
            checks = np.flatnonzero(degrees == d)
            eidx = np.stack([np.arange(row_splits[c], row_splits[c] + d) for c in checks])
            self.degree_groups[int(d)] = eidx

        # var-major view for belief sums; variables of degree zero are legal
        # in principle, so reduceat output is scattered by nonempty index
        order = np.lexsort((self.edge_chk, self.edge_var))
        self.var_order = order
        var_ids = self.edge_var[order]
        self.nonempty_vars = np.unique(var_ids)
        self.var_starts = np.searchsorted(var_ids, self.nonempty_vars)

    def belief_sums(self, c2v):
        """Per-variable sums of check-to-variable messages, shape (B, n)."""
        out = np.zeros((c2v.shape[0], self.h.n), dtype=c2v.dtype)
        sums = np.add.reduceat(c2v[:, self.var_order], self.var_starts, axis=1)
        out[:, self.nonempty_vars] = sums
        return out


def check_update_sumproduct(incoming):
    """Exact extrinsic check update 2*arctanh(prod tanh(u/2)) for one edge."""
    incoming = np.asarray(incoming, dtype=np.float64)
    if incoming.size == 0:
        raise ValueError("check update needs at least one incoming message")
    prod = np.clip(np.prod(np.tanh(incoming / 2.0)), -(1 - ATANH_EPS), 1 - ATANH_EPS)
    return float(2.0 * np.arctanh(prod))


def check_update_minsum(incoming):
    """Min-sum approximation: sign product times minimum magnitude, sign(0)=+1."""
    incoming = np.asarray(incoming, dtype=np.float64)
    if incoming.size == 0:
        raise ValueError("check update needs at least one incoming message")
    signs = np.where(incoming < 0, -1.0, 1.0)
    return float(np.prod(signs) * np.min(np.abs(incoming)))


def variable_update(l_v, incoming, message_clamp=30.0):
    """Extrinsic variable-to-check message: channel LLR plus incoming sum."""
    total = float(l_v) + float(np.sum(incoming))
    return float(np.clip(total, -message_clamp, message_clamp))


def belief(l_v, incoming):
    """Posterior LLR: channel LLR plus all incoming check messages."""
    return float(l_v) + float(np.sum(incoming))


def _check_sweep_sumproduct(v2c, ei):
    t = np.tanh(v2c / 2.0)
    c2v = np.empty_like(v2c)
    for d, eidx in ei.degree_groups.items():
        tt = t[:, eidx]
        excl = np.empty_like(tt)
        if d == 2:
            excl[..., 0] = tt[..., 1]
            excl[..., 1] = tt[..., 0]
        else:
            fwd = np.cumprod(tt, axis=-1)
            bwd = np.cumprod(tt[..., ::-1], axis=-1)[..., ::-1]
            excl[..., 0] = bwd[..., 1]
            excl[..., -1] = fwd[..., -2]
            excl[..., 1:-1] = fwd[..., :-2] * bwd[..., 2:]
        np.clip(excl, -(1 - ATANH_EPS), 1 - ATANH_EPS, out=excl)
        c2v[:, eidx] = 2.0 * np.arctanh(excl)
    return c2v


def _check_sweep_minsum(v2c, ei):
    signs = np.where(v2c < 0, -1.0, 1.0)
    mags = np.abs(v2c)
    c2v = np.empty_like(v2c)
    for d, eidx in ei.degree_groups.items():
        s = signs[:, eidx]
        a = mags[:, eidx]
        s_excl = np.prod(s, axis=-1, keepdims=True) * s
        i1 = np.argmin(a, axis=-1, keepdims=True)
        m1 = np.take_along_axis(a, i1, axis=-1)
        masked = a.copy()
        np.put_along_axis(masked, i1, np.inf, axis=-1)
        m2 = np.min(masked, axis=-1, keepdims=True)
        here = np.arange(d) == i1
        c2v[:, eidx] = s_excl * np.where(here, m2, m1)
    return c2v


def decode_bp_batch(h, llrs, cfg=BpConfig(), edge_index=None):
    """Flooding BP over a (B, n) batch of LLR vectors.

    Returns (bits, beliefs, iterations, syndrome_zero) arrays; each frame
    exits as soon as its hard decision satisfies every parity check.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] != h.n:
        raise ValueError(f"expected (B, {h.n}) LLR array, got {llrs.shape}")
    ei = edge_index if edge_index is not None else EdgeIndex(h)
    sweep = _check_sweep_sumproduct if cfg.variant == SUM_PRODUCT else _check_sweep_minsum

    nframes = llrs.shape[0]
    l_all = np.clip(llrs, -cfg.llr_clamp, cfg.llr_clamp)
    bits = (l_all < 0).astype(np.uint8)
    beliefs = l_all.copy()
    iters = np.full(nframes, cfg.max_iters, dtype=np.int64)
    ok = np.zeros(nframes, dtype=bool)

    idx = np.arange(nframes)
    l = l_all
    v2c = np.clip(l[:, ei.edge_var], -cfg.message_clamp, cfg.message_clamp)
    ht = h.rows.astype(np.int64).T
    for it in range(1, cfg.max_iters + 1):
        c2v = sweep(v2c, ei)
        s = l + ei.belief_sums(c2v)
        hard = (s < 0).astype(np.uint8)
        syn_counts = (hard.astype(np.int64) @ ht % 2).sum(axis=1)
        done = (syn_counts == 0) if cfg.early_exit else np.zeros(len(s), dtype=bool)
        if not cfg.early_exit and it == cfg.max_iters:
            done = syn_counts == 0
        if done.any():
            sel = idx[done]
            bits[sel] = hard[done]
            beliefs[sel] = s[done]
            iters[sel] = it
            ok[sel] = True
        if done.all() or it == cfg.max_iters:
            if not done.all():
                sel = idx[~done]
                bits[sel] = hard[~done]
                beliefs[sel] = s[~done]
            break
        keep = ~done
        idx, l, s = idx[keep], l[keep], s[keep]
        v2c = np.clip(s[:, ei.edge_var] - c2v[keep], -cfg.message_clamp, cfg.message_clamp)
    return bits, beliefs, iters, ok


def decode_bp(h, llr, cfg=BpConfig()):
    """Decode a single LLR word (LlrWord or length-n array)."""
    values = np.asarray(getattr(llr, "values", llr), dtype=np.float64)
    if values.shape != (h.n,):
        raise ValueError(f"expected length-{h.n} LLR word, got shape {values.shape}")
    bits, beliefs, iters, ok = decode_bp_batch(h, values[None, :], cfg)
    _, nerr = syndrome(h, bits[0])
    return DecodeResult(bits=bits[0], beliefs=beliefs[0], steps_used=int(iters[0]),
                        syndrome_zero=bool(ok[0]), parity_errors=nerr)
