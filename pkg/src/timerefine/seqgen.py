"""Turn ground-truth segments into coarse-to-fine refinement training sequences.

Each step ``k`` perturbs the target by independent Gaussian offsets of width
``sigma_k`` on the start and end, so that ``segment + offset == target``.
Steps that fall outside the video (or invert) are redrawn.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import grammar
from .core import (
    Diagnostic,
    GroundingSample,
    InvalidSampleError,
    NoiseSchedule,
    RefinementSequence,
    RefinementStep,
    TimeSegment,
    validate_sample,
)
from .metrics import iou

logger = logging.getLogger(__name__)

OFFSET_PREDICTION = "offset_prediction"
IOU_PREDICTION = "iou_prediction"
NO_REFINEMENT = "no_refinement"
VARIANTS = (OFFSET_PREDICTION, IOU_PREDICTION, NO_REFINEMENT)

IOU_TOKEN = "<iou>"


@dataclass(frozen=True)
class SeqGenConfig:
    schedule: NoiseSchedule = field(default_factory=NoiseSchedule)
    variant: str = OFFSET_PREDICTION
    seed: int = 0
    max_resamples: int = 100

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.max_resamples < 1:
            raise ValueError("max_resamples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TrainingSample:
    sample: GroundingSample
    answer_text: str
    sequence: RefinementSequence
    aux_targets: tuple[TimeSegment, ...]
    variant: str = OFFSET_PREDICTION


def _q(x):
    return np.round(x, 1) + 0.0


def quantize_targets(targets: np.ndarray, durations: np.ndarray) -> np.ndarray:
    """Snap (n, 2) targets to the 0.1 s grid without leaving [0, duration]."""
    q = _q(targets)
    ceiling = np.floor(durations * 10 + 1e-9) / 10
    q[:, 1] = np.minimum(q[:, 1], ceiling)
    q[:, 0] = np.minimum(q[:, 0], q[:, 1])
    return q


def _invalid(cand: np.ndarray, dur: np.ndarray) -> np.ndarray:
    return (cand[..., 0] < 0) | (cand[..., 1] > dur) | (cand[..., 0] > cand[..., 1])


def sample_offsets_batch(
    targets,
    durations,
    sigmas,
    rng: np.random.Generator,
    max_resamples: int = 100,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised sampler behind :func:`sample_offsets`.

    ``targets`` is (n, 2), ``durations`` (n,), ``sigmas`` (n, K) in seconds.
    Returns ``segments`` (n, K, 2), ``offsets`` (n, K, 2) and a boolean
    ``clamped`` (n,) flag. All returned values lie on the 0.1 s grid.
    """
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    dur = np.asarray(durations, dtype=float).reshape(-1)
    sig = np.asarray(sigmas, dtype=float)
    n = targets.shape[0]
    if sig.ndim == 1:
        sig = np.broadcast_to(sig, (n, sig.shape[0]))
    K = sig.shape[1]

    tq = quantize_targets(targets, dur)
    noise = rng.standard_normal((n, K, 2)) * sig[..., None]
    cand = _q(tq[:, None, :] - noise)
    dur_k = np.broadcast_to(dur[:, None], (n, K))
    bad = _invalid(cand, dur_k)

    tries = 0
    while tries < max_resamples and bad.any():
        rows, ks = np.nonzero(bad)
        redraw = rng.standard_normal((rows.size, 2)) * sig[rows, ks][:, None]
        cand[rows, ks] = _q(tq[rows] - redraw)
        bad[rows, ks] = _invalid(cand[rows, ks], dur[rows])
        tries += 1

    clamped = bad.any(axis=1)
    if clamped.any():
        rows, ks = np.nonzero(bad)
        fixed = np.clip(cand[rows, ks], 0.0, dur[rows][:, None])
        fixed = _q(np.sort(fixed, axis=1))
        # rounding can step past the last full 0.1 s tick
        ceiling = np.floor(dur[rows] * 10 + 1e-9) / 10
        fixed = np.minimum(fixed, ceiling[:, None])
        cand[rows, ks] = fixed
        logger.debug("clamped %d steps after %d resamples", rows.size, max_resamples)

    offsets = _q(tq[:, None, :] - cand)
    return cand, offsets, clamped


def sample_offsets(
    target: TimeSegment,
    schedule: NoiseSchedule,
    duration: float,
    rng: np.random.Generator,
    max_resamples: int = 100,
) -> RefinementSequence:
    sig = np.asarray(schedule.seconds(duration))
    segs, offs, clamped = sample_offsets_batch(
        [target.as_tuple()], [duration], sig[None, :], rng, max_resamples
    )
    steps = tuple(
        RefinementStep(TimeSegment(float(s), float(e)), float(os_), float(oe))
        for (s, e), (os_, oe) in zip(segs[0], offs[0])
    )
    return RefinementSequence(steps, clamped=bool(clamped[0]))


def format_iou_block(seq: RefinementSequence, target: TimeSegment) -> str:
    parts = [
        f"{grammar.format_time(st.seg.start_s)} to {grammar.format_time(st.seg.end_s)} "
        f"{IOU_TOKEN} {iou(st.seg, target):.3f}"
        for st in seq.steps
    ]
    body = f" {grammar.REFINE} ".join(parts)
    return f"{grammar.SEG_START} {body} {grammar.SEG_END}"


def generate_training_sample(
    sample: GroundingSample, config: SeqGenConfig, rng: np.random.Generator
) -> TrainingSample:
    validate_sample(sample)
    if config.variant == NO_REFINEMENT:
        (s, e), = quantize_targets(np.array([sample.target.as_tuple()]), np.array([sample.video.duration_s]))
        seq = RefinementSequence((RefinementStep(TimeSegment(float(s), float(e)), 0.0, 0.0),))
        text = f"{grammar.format_time(s)} to {grammar.format_time(e)}"
        return TrainingSample(sample, text, seq, (sample.target,), config.variant)

    seq = sample_offsets(
        sample.target, config.schedule, sample.video.duration_s, rng, config.max_resamples
    )
    if config.variant == OFFSET_PREDICTION:
        text = grammar.serialize(seq)
    else:
        text = format_iou_block(seq, sample.target)
    return TrainingSample(sample, text, seq, (sample.target,), config.variant)


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent RNG stream for one record, keyed by (seed, record index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _one(item, config):
    index, sample = item
    try:
        return generate_training_sample(sample, config, sample_rng(config.seed, index))
    except InvalidSampleError as exc:
        return Diagnostic(index, str(exc))


def generate_dataset(
    samples: Iterable[GroundingSample],
    config: SeqGenConfig,
    workers: int = 1,
    skipped: list[Diagnostic] | None = None,
) -> Iterator[TrainingSample]:
    """Yield one :class:`TrainingSample` per valid input, in input order.

    Invalid records are logged and, if ``skipped`` is given, appended to it as
    ``Diagnostic(index, reason)``. Results do not depend on ``workers``.
    """
    items = enumerate(samples)
    if workers <= 1:
        results = (_one(item, config) for item in items)
        pool = None
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(lambda it: _one(it, config), items, chunksize=64)
    try:
        for res in results:
            if isinstance(res, Diagnostic):
                logger.warning("skipping record %d: %s", res.location, res.message)
                if skipped is not None:
                    skipped.append(res)
                continue
            yield res
    finally:
        if pool is not None:
            pool.shutdown()
