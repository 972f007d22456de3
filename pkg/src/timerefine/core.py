"""Shared domain types for temporal grounding samples and refinement sequences.

All times are real-valued seconds. Values rendered to text use a 0.1 s grid
(see :data:`RESOLUTION` and :func:`quantize`).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

logger = logging.getLogger(__name__)

RESOLUTION = 0.1
_DECIMALS = 1


class InvalidSampleError(ValueError):
    """Raised when a value violates a domain invariant.

    ``invariant`` carries a short machine-friendly tag such as ``"start>end"``.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class Diagnostic(NamedTuple):
    """A non-fatal problem found while reading or parsing, with its location.

    ``skipped`` is False when the record was repaired (e.g. clamped) and kept.
    """

    location: int
    message: str
    skipped: bool = True


def quantize(x: float) -> float:
    """Round ``x`` to the 0.1 s serialization grid (``-0.0`` becomes ``0.0``)."""
    q = round(float(x), _DECIMALS)
    return q + 0.0


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise InvalidSampleError("non-finite", f"{name}={value!r}")


@dataclass(frozen=True)
class TimeSegment:
    start_s: float
    end_s: float

    def __post_init__(self):
        _check_finite("start_s", self.start_s)
        _check_finite("end_s", self.end_s)
        if self.start_s < 0 or self.end_s < 0:
            raise InvalidSampleError("negative time", f"({self.start_s}, {self.end_s})")
        if self.start_s > self.end_s:
            raise InvalidSampleError("start>end", f"({self.start_s}, {self.end_s})")

    @property
    def length(self) -> float:
        return self.end_s - self.start_s

    def as_tuple(self) -> tuple[float, float]:
        return (self.start_s, self.end_s)

    def quantized(self) -> "TimeSegment":
        return TimeSegment(quantize(self.start_s), quantize(self.end_s))


@dataclass(frozen=True)
class RefinementStep:
    seg: TimeSegment
    offset_start_s: float
    offset_end_s: float

    def __post_init__(self):
        _check_finite("offset_start_s", self.offset_start_s)
        _check_finite("offset_end_s", self.offset_end_s)

    @property
    def refined(self) -> tuple[float, float]:
        """The segment this step points at: segment plus offsets (unvalidated)."""
        return (self.seg.start_s + self.offset_start_s, self.seg.end_s + self.offset_end_s)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.seg.start_s, self.seg.end_s, self.offset_start_s, self.offset_end_s)

    @classmethod
    def from_tuple(cls, values: Sequence[float]) -> "RefinementStep":
        s, e, os_, oe = values
        return cls(TimeSegment(float(s), float(e)), float(os_), float(oe))


@dataclass(frozen=True)
class RefinementSequence:
    steps: tuple[RefinementStep, ...]
    # set when sampling had to clamp a step into the video after exhausting resamples
    clamped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise InvalidSampleError("empty sequence")

    def __len__(self):
        return len(self.steps)

    def __eq__(self, other):
        # the clamp diagnostic is metadata, not part of the value
        if not isinstance(other, RefinementSequence):
            return NotImplemented
        return self.steps == other.steps

    def __hash__(self):
        return hash(self.steps)

    def as_lists(self) -> list[list[float]]:
        return [list(step.as_tuple()) for step in self.steps]

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[float]]) -> "RefinementSequence":
        return cls(tuple(RefinementStep.from_tuple(r) for r in rows))


FIXED_SECONDS = "fixed_seconds"
FRACTION_OF_DURATION = "fraction_of_duration"


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step Gaussian standard deviations, largest first.

    In ``fraction_of_duration`` mode each value is multiplied by the video
    duration to obtain a width in seconds.
    """

    sigmas: tuple[float, ...] = (5.0, 3.0, 1.0, 0.0)
    mode: str = FIXED_SECONDS

    def __post_init__(self):
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        if not self.sigmas:
            raise InvalidSampleError("empty schedule")
        if self.mode not in (FIXED_SECONDS, FRACTION_OF_DURATION):
            raise InvalidSampleError("unknown schedule mode", self.mode)
        for s in self.sigmas:
            _check_finite("sigma", s)
            if s < 0:
                raise InvalidSampleError("negative sigma", str(s))
        if any(b > a for a, b in zip(self.sigmas, self.sigmas[1:])):
            raise InvalidSampleError("sigmas not non-increasing", str(self.sigmas))

    @property
    def num_steps(self) -> int:
        return len(self.sigmas)

    def seconds(self, duration_s: float) -> tuple[float, ...]:
        if self.mode == FRACTION_OF_DURATION:
            return tuple(s * duration_s for s in self.sigmas)
        return self.sigmas


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    duration_s: float

    def __post_init__(self):
        _check_finite("duration_s", self.duration_s)
        if self.duration_s <= 0:
            raise InvalidSampleError("non-positive duration", str(self.duration_s))


@dataclass(frozen=True)
class GroundingSample:
    """One query against one video. Cross-field bounds are checked by :func:`validate_sample`."""

    video: VideoMeta
    query: str
    target: TimeSegment


def validate_sample(sample: GroundingSample) -> GroundingSample:
    """Re-check every invariant of ``sample`` and return it unchanged.

    Zero-length targets are accepted but logged at warning level.
    """
    seg = sample.target
    for name, value in (("start_s", seg.start_s), ("end_s", seg.end_s)):
        _check_finite(name, value)
    if seg.start_s < 0 or seg.end_s < 0:
        raise InvalidSampleError("negative time", f"({seg.start_s}, {seg.end_s})")
    if seg.start_s > seg.end_s:
        raise InvalidSampleError("start>end", f"({seg.start_s}, {seg.end_s})")
    dur = sample.video.duration_s
    _check_finite("duration_s", dur)
    if dur <= 0:
        raise InvalidSampleError("non-positive duration", str(dur))
    if seg.end_s > dur:
        raise InvalidSampleError("target exceeds duration", f"end {seg.end_s} > duration {dur}")
    if seg.start_s == seg.end_s:
        logger.warning("zero-length target %s in video %s", seg.as_tuple(), sample.video.video_id)
    return sample


def make_sample(video_id: str, duration_s: float, query: str, start_s: float, end_s: float) -> GroundingSample:
    return GroundingSample(VideoMeta(video_id, float(duration_s)), query, TimeSegment(float(start_s), float(end_s)))
