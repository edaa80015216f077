"""AWGN channel in the bipolar domain and its LLR front end.

The noise scale at CSNR s dB for a rate-K/N code is
w = 1/sqrt(2 (K/N) 10^(s/10)); received samples are y = x + w*xi with xi
standard normal, and the channel LLR is 2y/w^2 (positive favours bit 0).
Gaussian draws come from numpy's Generator.standard_normal (PCG64 +
ziggurat), so a fixed seed reproduces y bit-for-bit on one platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Keeps arctanh arguments finite downstream without measurable BER effect.
LLR_CLAMP = 1e9


def noise_scale(csnr_db, k, n):
    """Noise standard deviation for CSNR in dB at code rate k/n."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    return 1.0 / np.sqrt(2.0 * (k / n) * 10.0 ** (csnr_db / 10.0))


@dataclass(frozen=True)
class ChannelParams:
    """CSNR level, code rate, and the derived noise scale w."""

    csnr_db: float
    rate: float
    w: float

    @classmethod
    def for_code(cls, csnr_db, k, n):
        return cls(csnr_db=float(csnr_db), rate=k / n, w=float(noise_scale(csnr_db, k, n)))


@dataclass(frozen=True)
class LlrWord:
    """Length-n vector of natural-log LLRs referenced to a channel level."""

    values: np.ndarray
    csnr_db: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if not np.isfinite(values).all():
            raise ValueError("LLR values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[-1]


def transmit(x, w, rng):
    """Send bipolar symbols through AWGN: y = x + w*xi, xi ~ N(0, I)."""
    if w <= 0:
        raise ValueError(f"noise scale must be positive, got {w}")
    x = np.asarray(x, dtype=np.float64)
    return x + w * rng.standard_normal(x.shape)


def to_llr(y, w, csnr_db=None):
    """Channel LLRs 2y/w^2, clamped to +-LLR_CLAMP.

    Returns a plain array, or an LlrWord tagged with the channel level when
    ``csnr_db`` is given.
    """
    if w <= 0:
        raise ValueError(f"noise scale must be positive, got {w}")
    values = np.clip(2.0 * np.asarray(y, dtype=np.float64) / (w * w), -LLR_CLAMP, LLR_CLAMP)
    if csnr_db is None:
        return values
    return LlrWord(values=values, csnr_db=float(csnr_db))


def hard_decide(llr):
    """Hard decisions from LLRs: bit 0 where the LLR is >= 0, else bit 1."""
    values = llr.values if isinstance(llr, LlrWord) else np.asarray(llr)
    return (values < 0).astype(np.uint8)
