"""BP-structured neural denoiser and the full reverse-process decoder.

One block holds n-k scalar weights, one per layer.  Layer l updates the
single check node l: it forms min-sum extrinsic messages from the current
beliefs of that check's variables and adds them back, scaled by the layer
weight, as a residual correction.  Layer 1 starts from the channel LLRs
and the block's soft codeword estimate is tanh(beliefs / 2), the posterior
mean of a bipolar symbol under an LLR belief.

Decoding walks the diffusion schedule from the observed (noisiest) level
upward, feeding each block estimate to the deterministic reverse update
and stopping as soon as the running hard decision satisfies every parity
check - once before the first reverse step and again after every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bp import DecodeResult
from .channel import LlrWord
from .codebook import syndrome
from .diffusion import reverse_step


class CheckpointError(ValueError):
    """Malformed checkpoint stream."""


@dataclass(frozen=True)
class NeuralBlockWeights:
    """The n-k trainable layer scalars of one block, tied to a code (n, k)."""

    values: np.ndarray
    n: int
    k: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size != self.n - self.k:
            raise ValueError(
                f"expected {self.n - self.k} layer weights for ({self.n},{self.k}), "
                f"got {values.size}")
        if not np.isfinite(values).all():
            raise ValueError("layer weights must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, h):
        return cls(values=np.zeros(h.num_checks), n=h.n, k=h.k)

    def check_code(self, h):
        if (self.n, self.k) != (h.n, h.k):
            raise ValueError(
                f"weights trained for ({self.n},{self.k}) cannot decode ({h.n},{h.k})")


def check_minsum_terms(xc):
    """Min-sum extrinsic messages for one check from its variables' beliefs.

    ``xc`` has shape (B, d).  Returns (u, signs, sign_excl, i1, i2) where
    u[:, j] excludes position j, i1 is the magnitude argmin (ties resolve
    to the lowest index), and i2 the argmin with i1 masked out; the index
    data drives the training backward pass.
    """
    signs = np.where(xc < 0, -1.0, 1.0)
    sign_excl = np.prod(signs, axis=-1, keepdims=True) * signs
    mags = np.abs(xc)
    i1 = np.argmin(mags, axis=-1, keepdims=True)
    m1 = np.take_along_axis(mags, i1, axis=-1)
    masked = mags.copy()
    np.put_along_axis(masked, i1, np.inf, axis=-1)
    i2 = np.argmin(masked, axis=-1, keepdims=True)
    m2 = np.take_along_axis(mags, i2, axis=-1)
    u = sign_excl * np.where(np.arange(xc.shape[-1]) == i1, m2, m1)
    return u, signs, sign_excl, i1, i2


def _check_columns(h):
    return [np.asarray(cols, dtype=np.int64) for cols in h.chk_adjacency]


def neural_block(h, weights, llr):
    """Run one block: (final beliefs, soft estimate tanh(beliefs/2)).

    Accepts a length-n LLR vector or a (B, n) batch.  With all weights
    zero the block is the identity on beliefs.
    """
    weights.check_code(h)
    x = np.asarray(getattr(llr, "values", llr), dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x).copy()
    if x.shape[1] != h.n:
        raise ValueError(f"expected length-{h.n} beliefs, got {x.shape[1]}")
    for w, cols in zip(weights.values, _check_columns(h)):
        xc = x[:, cols]
        u = check_minsum_terms(xc)[0]
        x[:, cols] = xc + w * u
    x_hat = np.tanh(x / 2.0)
    if single:
        return x[0], x_hat[0]
    return x, x_hat


def decode_vcdc_batch(h, weights, sched, llrs):
    """Reverse-process decode of a (B, n) LLR batch at the schedule's
    observed level.

    Returns (bits, beliefs, reverse_steps, syndrome_zero) arrays.  Frames
    whose hard decision already satisfies the syndrome cost zero reverse
    steps; the rest stop at the first satisfied syndrome or after the
    final block at the cleanest level.
    """
    weights.check_code(h)
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] != h.n:
        raise ValueError(f"expected (B, {h.n}) LLR array, got {llrs.shape}")
    nframes = llrs.shape[0]
    cols = _check_columns(h)
    ht = h.rows.astype(np.int64).T

    bits = np.empty((nframes, h.n), dtype=np.uint8)
    beliefs = np.empty_like(llrs)
    steps = np.zeros(nframes, dtype=np.int64)
    ok = np.zeros(nframes, dtype=bool)

    def syndromes_zero(z):
        hard = (z < 0).astype(np.int64)
        return (hard @ ht % 2).sum(axis=1) == 0, hard.astype(np.uint8)

    idx = np.arange(nframes)
    z = llrs.copy()
    done, hard = syndromes_zero(z)
    bits[idx], beliefs[idx], ok[idx] = hard, z, done
    idx, z = idx[~done], z[~done]

    used = 0
    for t_index in range(len(sched) - 1, 0, -1):
        if idx.size == 0:
            return bits, beliefs, steps, ok
        x = z.copy()
        for w, c in zip(weights.values, cols):
            xc = x[:, c]
            x[:, c] = xc + w * check_minsum_terms(xc)[0]
        z = reverse_step(sched, t_index, z, np.tanh(x / 2.0))
        used += 1
        done, hard = syndromes_zero(z)
        bits[idx], beliefs[idx], steps[idx] = hard, z, used
        ok[idx] = done
        idx, z = idx[~done], z[~done]

    if idx.size:
        final_beliefs, _ = neural_block(h, weights, z)
        hard = (final_beliefs < 0).astype(np.uint8)
        bits[idx] = hard
        beliefs[idx] = final_beliefs
        steps[idx] = used
        ok[idx] = (hard.astype(np.int64) @ ht % 2).sum(axis=1) == 0
    return bits, beliefs, steps, ok


def decode_vcdc(h, weights, sched, llr):
    """Decode a single LLR word; an LlrWord must be referenced to the
    schedule's observed CSNR level."""
    if isinstance(llr, LlrWord):
        if abs(llr.csnr_db - sched.observed_csnr_db) > 1e-9:
            raise ValueError(
                f"LLR word at {llr.csnr_db} dB does not match schedule observed "
                f"level {sched.observed_csnr_db} dB")
        values = llr.values
    else:
        values = np.asarray(llr, dtype=np.float64)
    if values.shape != (h.n,):
        raise ValueError(f"expected length-{h.n} LLR word, got shape {values.shape}")
    bits, beliefs, steps, ok = decode_vcdc_batch(h, weights, sched, values[None, :])
    _, nerr = syndrome(h, bits[0])
    return DecodeResult(bits=bits[0], beliefs=beliefs[0], steps_used=int(steps[0]),
                        syndrome_zero=bool(ok[0]), parity_errors=nerr)


CHECKPOINT_MAGIC = "VCDC1"


def save_checkpoint(weights):
    """Serialize weights: header "VCDC1 <n> <k> <L>" then one weight per
    line with 17 significant digits (round-trips float64 exactly)."""
    lines = [f"{CHECKPOINT_MAGIC} {weights.n} {weights.k} {weights.values.size}"]
    lines.extend(f"{w:.17g}" for w in weights.values)
    return ("\n".join(lines) + "\n").encode("ascii")


def load_checkpoint(data):
    """Parse a checkpoint byte stream back into NeuralBlockWeights."""
    text = data.decode("ascii") if isinstance(data, bytes) else data
    lines = text.splitlines()
    if not lines:
        raise CheckpointError("empty checkpoint")
    fields = lines[0].split()
    if len(fields) != 4 or fields[0] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"malformed header {lines[0]!r}")
    try:
        n, k, count = (int(f) for f in fields[1:])
    except ValueError:
        raise CheckpointError(f"malformed header {lines[0]!r}") from None
    if count != n - k:
        raise CheckpointError(f"header declares {count} weights for ({n},{k}); need {n - k}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != count:
        raise CheckpointError(f"expected {count} weight lines, found {len(body)}")
    try:
        values = np.array([float(ln) for ln in body], dtype=np.float64)
    except ValueError as exc:
        raise CheckpointError(f"bad weight value: {exc}") from None
    if not np.isfinite(values).all():
        raise CheckpointError("checkpoint contains non-finite weights")
    return NeuralBlockWeights(values=values, n=n, k=k)


def model_size_bytes(weights):
    """Deployed model size: 4 bytes per weight plus the ASCII header."""
    header = f"{CHECKPOINT_MAGIC} {weights.n} {weights.k} {weights.values.size}\n"
    return 4 * weights.values.size + len(header)
