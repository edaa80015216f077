"""Monte-Carlo BER evaluation, complexity accounting, and result emission.

A run simulates random-message frames through the AWGN channel and a
decoder until the configured number of bit errors has been observed (the
stopping rule) or a frame budget censors the run.  Frames are distributed
over one or more worker streams with independent seeded generators;
streams are merged in a fixed round-robin order, so results depend only on
(seed, workers, batch_frames), not on thread scheduling.  The stopping
check runs between rounds, so the error count may slightly overshoot the
threshold.

FLOPs are static worst-case counts (no early stopping) with the
convention: add = mul = compare = 1 and tanh/arctanh = a configurable
constant (default 1).
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import denoiser
from .bp import MIN_SUM, SUM_PRODUCT, BpConfig, EdgeIndex, decode_bp_batch
from .channel import LLR_CLAMP, hard_decide, noise_scale
from .codebook import bipolar, derive_generator, encode
from .diffusion import build_schedule

RESULT_COLUMNS = ("code", "n", "k", "decoder", "csnr_db", "bits", "bit_errors", "ber",
                  "neg_ln_ber", "frames", "frame_errors", "mean_steps", "censored", "seed")


@dataclass(frozen=True)
class BerRun:
    """Outcome of one (code, decoder, CSNR) Monte-Carlo campaign."""

    code_id: str
    n: int
    k: int
    decoder_id: str
    csnr_db: float
    bit_errors: int
    bits_simulated: int
    frames_simulated: int
    frame_errors: int
    mean_steps_used: float
    censored: bool
    seed: int

    @property
    def ber(self):
        return self.bit_errors / self.bits_simulated if self.bits_simulated else 0.0


def neg_ln_ber(run):
    """-ln(BER); for error-free runs, the censored lower bound ln(bits)."""
    if run.bits_simulated <= 0:
        raise ValueError("run simulated no bits")
    if run.bit_errors == 0:
        return math.log(run.bits_simulated)
    return -math.log(run.ber)


class BpDecoder:
    """Classical BP; ignores the channel level."""

    def __init__(self, h, cfg=BpConfig()):
        self.h = h
        self.cfg = cfg
        self.name = "bp"
        self._ei = EdgeIndex(h)

    def decode_batch(self, llrs, csnr_db):
        bits, _, iters, _ = decode_bp_batch(self.h, llrs, self.cfg, edge_index=self._ei)
        return bits, iters


class VcdcDecoder:
    """Reverse-process decoder; the schedule's observed level tracks the
    channel CSNR of each run."""

    def __init__(self, h, weights, timesteps=20, step_db=0.5):
        weights.check_code(h)
        self.h = h
        self.weights = weights
        self.timesteps = timesteps
        self.step_db = step_db
        self.name = f"vcdc-t{timesteps}"
        self._schedules = {}

    def _schedule(self, csnr_db):
        key = round(float(csnr_db), 9)
        if key not in self._schedules:
            self._schedules[key] = build_schedule(csnr_db, self.timesteps, self.step_db,
                                                  self.h.rate)
        return self._schedules[key]

    def decode_batch(self, llrs, csnr_db):
        bits, _, steps, _ = denoiser.decode_vcdc_batch(self.h, self.weights,
                                                       self._schedule(csnr_db), llrs)
        return bits, steps


class IdentityDecoder:
    """Hard decision on the raw channel LLRs."""

    def __init__(self, h):
        self.h = h
        self.name = "identity"

    def decode_batch(self, llrs, csnr_db):
        return hard_decide(llrs), np.zeros(llrs.shape[0], dtype=np.int64)


def default_workers():
    env = os.environ.get("VCDC_THREADS")
    return max(1, int(env)) if env else 1


def run_ber(h, decoder, csnr_db, stop_errors=100, max_frames=None, seed=0,
            code_id="code", batch_frames=512, workers=None):
    """Simulate frames until ``stop_errors`` bit errors or ``max_frames``.

    ``max_frames`` defaults to the equivalent of 1e8 bits.  Runs stopped by
    the frame budget before reaching the error target are flagged censored.
    """
    if stop_errors < 1:
        raise ValueError(f"stop_errors must be >= 1, got {stop_errors}")
    if max_frames is None:
        max_frames = max(1, 10**8 // h.n)
    workers = default_workers() if workers is None else max(1, int(workers))
    gen = derive_generator(h)
    w = float(noise_scale(csnr_db, h.k, h.n))
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(workers)]

    def simulate(rng, frames):
        code = encode(gen, rng.integers(0, 2, size=(frames, h.k)))
        y = bipolar(code) + w * rng.standard_normal((frames, h.n))
        llrs = np.clip(2.0 * y / w**2, -LLR_CLAMP, LLR_CLAMP)
        bits, steps = decoder.decode_batch(llrs, csnr_db)
        wrong = bits != code
        return int(wrong.sum()), int(wrong.any(axis=1).sum()), int(steps.sum())

    bit_errors = frames_done = frame_errors = steps_total = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while bit_errors < stop_errors and frames_done < max_frames:
            quota = max_frames - frames_done
            sizes = []
            for _ in range(workers):
                take = min(batch_frames, quota)
                quota -= take
                sizes.append(take)
            jobs = [(rngs[i], sz) for i, sz in enumerate(sizes) if sz > 0]
            if pool is not None:
                outcomes = list(pool.map(lambda job: simulate(*job), jobs))
            else:
                outcomes = [simulate(*job) for job in jobs]
            for (_, sz), (errs, ferrs, steps) in zip(jobs, outcomes):
                bit_errors += errs
                frame_errors += ferrs
                steps_total += steps
                frames_done += sz
    finally:
        if pool is not None:
            pool.shutdown()

    return BerRun(code_id=code_id, n=h.n, k=h.k, decoder_id=decoder.name,
                  csnr_db=float(csnr_db), bit_errors=bit_errors,
                  bits_simulated=frames_done * h.n, frames_simulated=frames_done,
                  frame_errors=frame_errors,
                  mean_steps_used=steps_total / frames_done if frames_done else 0.0,
                  censored=bit_errors < stop_errors, seed=seed)


@dataclass(frozen=True)
class FlopsReport:
    """Per-decode operation counts by category plus model storage."""

    adds: int
    muls: int
    compares: int
    transcendentals: int
    transcendental_cost: float = 1.0
    model_bytes: int = 0

    @property
    def total(self):
        return self.adds + self.muls + self.compares \
            + self.transcendental_cost * self.transcendentals


def _degree_sums(h):
    degrees = [len(a) for a in h.chk_adjacency]
    return sum(degrees), degrees


def count_flops_bp(h, iters, variant=SUM_PRODUCT, transcendental_cost=1.0):
    """Static worst-case FLOPs of flooding BP for ``iters`` iterations.

    Per iteration: one check sweep, belief/extrinsic variable stage
    (2E + n adds, E clamp compares), and one syndrome check.
    """
    if iters < 0:
        raise ValueError("iters must be >= 0")
    e, degrees = _degree_sums(h)
    chk_muls = chk_compares = chk_transc = 0
    for d in degrees:
        if variant == SUM_PRODUCT:
            # halve, prefix/suffix exclusive products, double; tanh + arctanh
            chk_muls += d + max(3 * d - 4, 0) + d
            chk_transc += 2 * d
            chk_compares += d  # product clamp
        elif variant == MIN_SUM:
            chk_muls += 3 * d - 1  # sign product, exclusion, apply sign
            chk_compares += 5 * d - 2  # signs, abs, min1, min2, select
        else:
            raise ValueError(f"unknown variant {variant!r}")
    adds = (2 * e + h.n) + e  # variable stage + syndrome xors
    compares = chk_compares + e + (h.n + h.num_checks)  # clamp + hard decision/zero test
    return FlopsReport(adds=adds * iters, muls=chk_muls * iters,
                       compares=compares * iters, transcendentals=chk_transc * iters,
                       transcendental_cost=transcendental_cost, model_bytes=0)


def count_flops_vcdc(h, timesteps, transcendental_cost=1.0):
    """Static worst-case FLOPs of the reverse-process decoder.

    Counts ``timesteps`` block applications, ``timesteps - 1`` reverse
    updates, and ``timesteps + 1`` syndrome checks (no early stopping).
    """
    if timesteps < 0:
        raise ValueError("timesteps must be >= 0")
    e, degrees = _degree_sums(h)
    block_adds = e  # residual additions
    block_muls = sum(4 * d - 1 for d in degrees) + h.n  # min-sum, weights, tanh(x/2)
    block_compares = sum(5 * d - 2 for d in degrees)
    block_transc = h.n

    t = timesteps
    n_reverse = max(t - 1, 0)
    n_syndrome = t + 1 if t else 0
    adds = block_adds * t + h.n * n_reverse + e * n_syndrome
    muls = block_muls * t + h.n * n_reverse
    compares = block_compares * t + (h.n + h.num_checks) * n_syndrome
    transc = block_transc * t
    dummy = denoiser.NeuralBlockWeights(values=np.zeros(h.num_checks), n=h.n, k=h.k)
    return FlopsReport(adds=adds, muls=muls, compares=compares, transcendentals=transc,
                       transcendental_cost=transcendental_cost,
                       model_bytes=denoiser.model_size_bytes(dummy) if t else 0)


def emit_results(runs, out_dir):
    """Write results.csv plus one SNR-vs-BER plot-data file per code."""
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")
    with open(results_path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in runs:
            writer.writerow([r.code_id, r.n, r.k, r.decoder_id, f"{r.csnr_db:.17g}",
                             r.bits_simulated, r.bit_errors, f"{r.ber:.17g}",
                             f"{neg_ln_ber(r):.17g}", r.frames_simulated, r.frame_errors,
                             f"{r.mean_steps_used:.17g}", int(r.censored), r.seed])
    paths = [results_path]
    by_code = {}
    for r in runs:
        by_code.setdefault(r.code_id, []).append(r)
    for code_id, code_runs in by_code.items():
        plot_path = os.path.join(out_dir, f"plot_{code_id}.csv")
        with open(plot_path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(["decoder", "csnr_db", "ber"])
            for r in sorted(code_runs, key=lambda r: (r.decoder_id, r.csnr_db)):
                writer.writerow([r.decoder_id, f"{r.csnr_db:.17g}", f"{r.ber:.17g}"])
        paths.append(plot_path)
    return paths


def read_results_csv(path):
    """Parse a results.csv back into BerRun records."""
    runs = []
    with open(path, newline="", encoding="ascii") as fh:
        for row in csv.DictReader(fh):
            runs.append(BerRun(
                code_id=row["code"], n=int(row["n"]), k=int(row["k"]),
                decoder_id=row["decoder"], csnr_db=float(row["csnr_db"]),
                bit_errors=int(row["bit_errors"]), bits_simulated=int(row["bits"]),
                frames_simulated=int(row["frames"]), frame_errors=int(row["frame_errors"]),
                mean_steps_used=float(row["mean_steps"]),
                censored=bool(int(row["censored"])), seed=int(row["seed"])))
    return runs
