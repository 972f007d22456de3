"""Synthetic noisy-predictor harness for comparing decode strategies without a model.

A simulated predictor emits, at step ``k``, the target perturbed by
``N(0, tau_k**2)`` per endpoint, and an offset estimate equal to the true
correction plus ``N(0, eps_k**2)``. Everything is quantized to the 0.1 s grid
so simulated sequences survive the text codec unchanged.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import GroundingSample, RefinementSequence, RefinementStep, TimeSegment, VideoMeta
from .decode import DecodeStrategy, decode_with_flag
from .metrics import EvalAccumulator, EvalPair, EvalReport, iou
from .seqgen import quantize_targets, sample_rng

DEFAULT_STEP_ERROR_STDS = (5.0, 3.0, 1.0, 0.3)


@dataclass(frozen=True)
class PredictorModel:
    step_error_stds: tuple[float, ...] = DEFAULT_STEP_ERROR_STDS
    offset_error_stds: tuple[float, ...] = DEFAULT_STEP_ERROR_STDS
    seed: int = 0

    def __post_init__(self):
        tau = tuple(float(x) for x in self.step_error_stds)
        eps = tuple(float(x) for x in self.offset_error_stds)
        if not tau or len(tau) != len(eps):
            raise ValueError("step_error_stds and offset_error_stds must be non-empty and of equal length")
        if min(tau + eps) < 0:
            raise ValueError("error stds must be non-negative")
        object.__setattr__(self, "step_error_stds", tau)
        object.__setattr__(self, "offset_error_stds", eps)

    @property
    def num_steps(self) -> int:
        return len(self.step_error_stds)


def simulate_prediction(sample: GroundingSample, model: PredictorModel, rng: np.random.Generator) -> RefinementSequence:
    dur = sample.video.duration_s
    (ts, te), = quantize_targets(np.array([sample.target.as_tuple()]), np.array([dur]))
    tau = np.asarray(model.step_error_stds)
    eps = np.asarray(model.offset_error_stds)
    K = tau.size

    seg = np.array([ts, te]) + rng.standard_normal((K, 2)) * tau[:, None]
    seg = np.sort(np.clip(seg, 0.0, dur), axis=1)
    seg = np.minimum(np.round(seg, 1) + 0.0, np.floor(dur * 10 + 1e-9) / 10)
    off = np.array([ts, te]) - seg + rng.standard_normal((K, 2)) * eps[:, None]
    off = np.round(off, 1) + 0.0

    steps = tuple(
        RefinementStep(TimeSegment(float(s), float(e)), float(os_), float(oe))
        for (s, e), (os_, oe) in zip(seg, off)
    )
    return RefinementSequence(steps)


def simulate_aux(sample: GroundingSample, model: PredictorModel, rng: np.random.Generator) -> tuple[float, float]:
    """Synthetic auxiliary-head output: target plus last-step offset noise."""
    noise = rng.standard_normal(2) * model.offset_error_stds[-1]
    return (sample.target.start_s + noise[0], sample.target.end_s + noise[1])


def _simulate_one(index: int, sample: GroundingSample, model: PredictorModel, strategies):
    rng = sample_rng(model.seed, index)
    seq = simulate_prediction(sample, model, rng)
    aux = simulate_aux(sample, model, rng)
    return [decode_with_flag(seq, st, aux)[0] for st in strategies]


def simulate_ious(
    samples: Sequence[GroundingSample],
    model: PredictorModel,
    strategies: Sequence[DecodeStrategy],
    workers: int = 1,
) -> np.ndarray:
    """Per-sample IoU matrix of shape (n_samples, n_strategies)."""
    samples = list(samples)
    strategies = list(strategies)

    def run(i):
        preds = _simulate_one(i, samples[i], model, strategies)
        return [iou(p, samples[i].target) for p in preds]

    if workers <= 1:
        rows = [run(i) for i in range(len(samples))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, range(len(samples)), chunksize=256))
    return np.asarray(rows, dtype=float).reshape(len(samples), len(strategies))


def run_study(
    samples: Iterable[GroundingSample],
    model: PredictorModel,
    strategies: Sequence[DecodeStrategy],
    workers: int = 1,
) -> dict[str, EvalReport]:
    """Simulate every sample once and score each strategy on the same sequence."""
    samples = list(samples)
    if not samples:
        raise ValueError("run_study needs at least one sample")
    strategies = list(strategies)
    accs = {st.name: EvalAccumulator() for st in strategies}

    def run(i):
        return _simulate_one(i, samples[i], model, strategies)

    if workers <= 1:
        results = map(run, range(len(samples)))
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(run, range(len(samples)), chunksize=256)
    for i, preds in enumerate(results):
        for st, pred in zip(strategies, preds):
            accs[st.name].add(EvalPair(pred, samples[i].target))
    if workers > 1:
        pool.shutdown()
    return {name: acc.report() for name, acc in accs.items()}


def paired_difference(ious_a: np.ndarray, ious_b: np.ndarray) -> tuple[float, float]:
    """Mean and standard error (in mIoU percentage points) of ``a - b`` over paired samples."""
    d = 100.0 * (np.asarray(ious_a) - np.asarray(ious_b))
    return float(d.mean()), float(d.std(ddof=1) / np.sqrt(d.size))


def synthetic_samples(
    n: int,
    seed: int = 0,
    duration_range: tuple[float, float] = (30.0, 180.0),
    min_length: float = 2.0,
) -> list[GroundingSample]:
    """Random samples with 0.1 s-quantized targets well inside each video."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        dur = round(float(rng.uniform(*duration_range)), 1)
        length = round(float(rng.uniform(min_length, dur / 2)), 1)
        start = round(float(rng.uniform(0.0, dur - length)), 1)
        end = min(round(start + length, 1), dur)
        out.append(GroundingSample(VideoMeta(f"syn{i:06d}", dur), f"synthetic query {i}", TimeSegment(start, end)))
    return out
