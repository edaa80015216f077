"""Training for the neural block: tape ops, loss, Adam, and the loop.

Each iteration draws a fresh batch - per-example CSNR uniform over the
configured range, random messages (or the all-zero codeword), AWGN
transmission, LLR conversion - runs the block once as a single-step
denoising prediction, and applies one Adam update to the n-k layer
weights.  Everything is driven by one seeded generator, so a fixed config
reproduces the loss curve exactly.

Backward-pass conventions: the min inside the min-sum check update uses
the subgradient of the attained minimizer with ties broken toward the
lowest edge index, and sign factors are treated as constants, so gradient
flows only through the minimum-magnitude path and the residual sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Var, add_at_cols, gather_cols
from .channel import LLR_CLAMP, noise_scale
from .codebook import bipolar, derive_generator, encode
from .denoiser import NeuralBlockWeights, _check_columns, check_minsum_terms


class TrainingDiverged(RuntimeError):
    """Loss became non-finite."""


def _softplus(z):
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def loss(beliefs, x_b):
    """Mean binary cross-entropy between sigmoid(beliefs) and 1 - x_b.

    Positive belief is evidence for bit 0; computed in stabilized softplus
    form, softplus(-(1 - 2 x_b) * belief), averaged over all entries.
    """
    b = np.asarray(getattr(beliefs, "values", beliefs), dtype=np.float64)
    sym = 1.0 - 2.0 * np.asarray(x_b, dtype=np.float64)
    return float(np.mean(_softplus(-sym * b)))


def bce_with_logits(beliefs, x_b):
    """Tape node for ``loss``; adjoint of beliefs is -sym*sigmoid(-sym*b)/size."""
    sym = 1.0 - 2.0 * np.asarray(x_b, dtype=np.float64)
    z = -sym * beliefs.value
    out = Var(np.mean(_softplus(z)), (beliefs,))

    def backward(g):
        # sigmoid(z) via the non-overflowing branch of exp
        ez = np.exp(-np.abs(z))
        sig = np.where(z >= 0, 1.0 / (1.0 + ez), ez / (1.0 + ez))
        beliefs._accumulate(g * (-sym) * sig / beliefs.value.size)

    out._backward = backward
    return out


def minsum_extrinsic(xc):
    """Tape node for the min-sum check update on beliefs ``xc`` (B, d).

    Forward matches denoiser.check_minsum_terms; backward routes each
    outgoing adjoint to the variable whose magnitude attained the
    (extrinsic) minimum, scaled by that variable's sign, with the sign
    product held constant.
    """
    u, signs, sign_excl, i1, i2 = check_minsum_terms(xc.value)
    out = Var(u, (xc,))

    def backward(g):
        gs = g * sign_excl
        grad = np.zeros_like(xc.value)
        # edges j != i1 select magnitude |x_{i1}|; edge j == i1 selects |x_{i2}|
        at_i1 = np.take_along_axis(gs, i1, axis=-1)
        np.put_along_axis(grad, i1,
                          (gs.sum(axis=-1, keepdims=True) - at_i1)
                          * np.take_along_axis(signs, i1, axis=-1), axis=-1)
        prev = np.take_along_axis(grad, i2, axis=-1)
        np.put_along_axis(grad, i2,
                          prev + at_i1 * np.take_along_axis(signs, i2, axis=-1), axis=-1)
        xc._accumulate(grad)

    out._backward = backward
    return out


def neural_block_tape(h, weight_vars, llrs):
    """Forward pass of the block recorded on the tape; returns beliefs."""
    if len(weight_vars) != h.num_checks:
        raise ValueError(f"expected {h.num_checks} layer weights, got {len(weight_vars)}")
    x = Var(np.atleast_2d(np.asarray(llrs, dtype=np.float64)))
    for w, cols in zip(weight_vars, _check_columns(h)):
        xc = gather_cols(x, cols)
        x = add_at_cols(x, cols, w * minsum_extrinsic(xc))
    return x


def block_gradients(h, weights, llrs, x_b):
    """Loss and d(loss)/d(layer weights) for one batch via the tape."""
    weight_vars = [Var(w) for w in np.asarray(weights, dtype=np.float64)]
    out = bce_with_logits(neural_block_tape(h, weight_vars, llrs), x_b)
    out.backward()
    grads = np.array([float(w.grad) if w.grad is not None else 0.0 for w in weight_vars])
    return float(out.value), grads


@dataclass
class Adam:
    """Standard Adam update with bias correction."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params, grads):
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grads
        self.v = self.beta2 * self.v + (1 - self.beta2) * grads**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True)
class TrainConfig:
    """Protocol defaults: lr 0.001, batch 256, 20000 iterations, CSNR 4-6 dB."""

    learning_rate: float = 0.001
    batch_size: int = 256
    iterations: int = 20000
    csnr_low_db: float = 4.0
    csnr_high_db: float = 6.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    all_zero_codewords: bool = False
    forced_noise_scale: float | None = None
    smoothing_window: int = 100

    def __post_init__(self):
        if min(self.learning_rate, self.batch_size, self.iterations,
               self.smoothing_window) <= 0:
            raise ValueError("hyperparameters must be positive")
        if self.csnr_high_db < self.csnr_low_db:
            raise ValueError("empty CSNR range")


@dataclass(frozen=True)
class TrainResult:
    weights: NeuralBlockWeights
    raw_loss: np.ndarray
    smoothed_loss: np.ndarray

    def final_smoothed(self):
        return float(self.smoothed_loss[-1])


def _smooth(raw, window):
    csum = np.concatenate([[0.0], np.cumsum(raw)])
    idx = np.arange(1, raw.size + 1)
    start = np.maximum(idx - window, 0)
    return (csum[idx] - csum[start]) / (idx - start)


def train(h, cfg=TrainConfig()):
    """Train block weights from scratch on single-step denoising batches."""
    rng = np.random.default_rng(cfg.seed)
    gen = derive_generator(h)
    params = np.zeros(h.num_checks)
    adam = Adam(lr=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    raw = np.empty(cfg.iterations)
    for it in range(cfg.iterations):
        csnr = rng.uniform(cfg.csnr_low_db, cfg.csnr_high_db, size=cfg.batch_size)
        w = (np.full(cfg.batch_size, cfg.forced_noise_scale)
             if cfg.forced_noise_scale is not None else noise_scale(csnr, h.k, h.n))
        if cfg.all_zero_codewords:
            code = np.zeros((cfg.batch_size, h.n), dtype=np.uint8)
        else:
            code = encode(gen, rng.integers(0, 2, size=(cfg.batch_size, h.k)))
        x = bipolar(code)
        y = x + w[:, None] * rng.standard_normal(x.shape)
        llrs = np.clip(2.0 * y / w[:, None]**2, -LLR_CLAMP, LLR_CLAMP)
        value, grads = block_gradients(h, params, llrs, code)
        if not np.isfinite(value):
            raise TrainingDiverged(f"loss became non-finite at iteration {it}")
        params = adam.step(params, grads)
        raw[it] = value
    weights = NeuralBlockWeights(values=params, n=h.n, k=h.k)
    return TrainResult(weights=weights, raw_loss=raw,
                       smoothed_loss=_smooth(raw, cfg.smoothing_window))


def write_loss_curve(path, result):
    """Emit the loss series as CSV: iteration, raw_loss, smoothed_loss."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("iteration,raw_loss,smoothed_loss\n")
        for i, (r, s) in enumerate(zip(result.raw_loss, result.smoothed_loss)):
            fh.write(f"{i},{r:.10g},{s:.10g}\n")
