"""Reduce a refinement sequence (and optionally an auxiliary-head output) to one segment."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import RefinementSequence, TimeSegment

FIRST_STEP = "first_step"
LAST_STEP = "last_step"
AUX_HEAD = "aux_head"
MERGED = "merged"
KINDS = (FIRST_STEP, LAST_STEP, AUX_HEAD, MERGED)

# sums of 0.1 s grid values pick up float noise; 6 decimals removes it without imposing the grid
_CLEAN_DIGITS = 6


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class DecodeStrategy:
    kind: str = LAST_STEP
    # first_step only: add the step's offsets (default) or return its raw segment
    apply_offsets: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown decode strategy {self.kind!r}; expected one of {KINDS}")

    @property
    def needs_aux(self) -> bool:
        return self.kind in (AUX_HEAD, MERGED)

    @property
    def name(self) -> str:
        if self.kind == FIRST_STEP and not self.apply_offsets:
            return "first_step_raw"
        return self.kind

    @classmethod
    def parse(cls, name: str) -> "DecodeStrategy":
        name = name.strip()
        if name == "first_step_raw":
            return cls(FIRST_STEP, apply_offsets=False)
        return cls(name)


def _step_sum(seq: RefinementSequence, index: int, apply_offsets: bool = True) -> tuple[float, float]:
    step = seq.steps[index]
    if not apply_offsets:
        return step.seg.as_tuple()
    s, e = step.refined
    return round(s, _CLEAN_DIGITS), round(e, _CLEAN_DIGITS)


def decode_with_flag(
    seq: RefinementSequence,
    strategy: DecodeStrategy = DecodeStrategy(),
    aux: Optional[TimeSegment | tuple[float, float]] = None,
) -> tuple[TimeSegment, bool]:
    """Like :func:`decode` but also returns whether the raw result had to be clamped or swapped."""
    if seq is None or len(seq.steps) == 0:
        raise DecodeError("empty sequence")
    if strategy.needs_aux and aux is None:
        raise DecodeError(f"strategy {strategy.kind} requires an auxiliary prediction")
    if aux is not None and isinstance(aux, TimeSegment):
        aux = aux.as_tuple()

    if strategy.kind == LAST_STEP:
        s, e = _step_sum(seq, -1)
    elif strategy.kind == FIRST_STEP:
        s, e = _step_sum(seq, 0, strategy.apply_offsets)
    elif strategy.kind == AUX_HEAD:
        s, e = float(aux[0]), float(aux[1])
    else:
        ls, le = _step_sum(seq, -1)
        s = round((ls + float(aux[0])) / 2, _CLEAN_DIGITS)
        e = round((le + float(aux[1])) / 2, _CLEAN_DIGITS)

    adjusted = False
    if s < 0 or e < 0:
        s, e = max(s, 0.0), max(e, 0.0)
        adjusted = True
    if s > e:
        s, e = e, s
        adjusted = True
    return TimeSegment(s, e), adjusted


def decode(
    seq: RefinementSequence,
    strategy: DecodeStrategy = DecodeStrategy(),
    aux: Optional[TimeSegment | tuple[float, float]] = None,
) -> TimeSegment:
    """Final segment for ``seq`` under ``strategy``.

    ``last_step`` and ``first_step`` add that step's offsets to its segment,
    ``aux_head`` returns ``aux`` and ``merged`` averages ``last_step`` with
    ``aux`` per endpoint. Negative endpoints are clamped to zero and inverted
    results swapped.
    """
    return decode_with_flag(seq, strategy, aux)[0]
