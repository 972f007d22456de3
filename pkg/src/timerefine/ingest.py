"""Annotation readers for Charades-STA and ActivityNet Captions, plus a JSONL exchange format.

Readers are generators and never stop on a bad record: each skipped or
repaired record produces a :class:`~timerefine.core.Diagnostic` (line number
or record index) that is logged and, if a ``diagnostics`` list is passed,
appended to it.
"""
from __future__ import annotations

import json
import logging
from typing import Iterable, Iterator, Mapping

from .core import Diagnostic, GroundingSample, InvalidSampleError, TimeSegment, VideoMeta, validate_sample

logger = logging.getLogger(__name__)

JSONL_KEYS = ("video_id", "duration_s", "query", "segment")


def _report(diagnostics, location, message, skipped=True):
    logger.warning("%s: %s", location, message)
    if diagnostics is not None:
        diagnostics.append(Diagnostic(location, message, skipped))


def read_charades_sta(
    path,
    durations: Mapping[str, float] | None = None,
    diagnostics: list | None = None,
) -> Iterator[GroundingSample]:
    """Read ``VIDEO_ID START END##sentence`` lines.

    Charades-STA annotations carry no durations, so they come from
    ``durations``; a missing id falls back to ``max(START, END)``.
    Ends past a known duration are clamped (reported, not skipped).
    """
    durations = durations or {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if "##" not in line:
                _report(diagnostics, lineno, "missing '##' separator")
                continue
            head, query = line.split("##", 1)
            fields = head.split()
            if len(fields) != 3:
                _report(diagnostics, lineno, f"expected 'VIDEO START END', got {head!r}")
                continue
            vid, s_txt, e_txt = fields
            try:
                start, end = float(s_txt), float(e_txt)
            except ValueError:
                _report(diagnostics, lineno, f"non-numeric times {s_txt!r} {e_txt!r}")
                continue
            if vid in durations:
                dur = float(durations[vid])
            else:
                dur = max(start, end)
                logger.warning("line %d: no duration for %s, using %.2f", lineno, vid, dur)
            if end > dur:
                _report(diagnostics, lineno, f"end {end} clamped to duration {dur}", skipped=False)
                end = dur
            try:
                yield validate_sample(GroundingSample(VideoMeta(vid, dur), query.strip(), TimeSegment(start, end)))
            except InvalidSampleError as exc:
                _report(diagnostics, lineno, str(exc))


def load_durations(path) -> dict[str, float]:
    """Duration sidecar: a JSON object ``{video_id: seconds}``."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return {str(k): float(v) for k, v in data.items()}


def read_activitynet_captions(path, diagnostics: list | None = None) -> Iterator[GroundingSample]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object keyed by video id")
    for index, (vid, rec) in enumerate(data.items()):
        try:
            dur = float(rec["duration"])
            stamps = rec["timestamps"]
            sentences = rec["sentences"]
        except (KeyError, TypeError, ValueError) as exc:
            _report(diagnostics, index, f"{vid}: malformed record ({exc!r})")
            continue
        if len(stamps) != len(sentences):
            _report(diagnostics, index, f"{vid}: {len(stamps)} timestamps vs {len(sentences)} sentences")
            continue
        try:
            video = VideoMeta(str(vid), dur)
        except InvalidSampleError as exc:
            _report(diagnostics, index, f"{vid}: {exc}")
            continue
        for (s, e), sent in zip(stamps, sentences):
            s, e = float(s), float(e)
            cs, ce = min(max(s, 0.0), dur), min(max(e, 0.0), dur)
            if (cs, ce) != (s, e):
                _report(diagnostics, index, f"{vid}: segment ({s}, {e}) clamped to ({cs}, {ce})", skipped=False)
            try:
                yield GroundingSample(video, str(sent).strip(), TimeSegment(cs, ce))
            except InvalidSampleError as exc:
                _report(diagnostics, index, f"{vid}: {exc}")


def sample_to_record(sample: GroundingSample) -> dict:
    return {
        "video_id": sample.video.video_id,
        "duration_s": sample.video.duration_s,
        "query": sample.query,
        "segment": [sample.target.start_s, sample.target.end_s],
    }


def record_to_sample(rec: dict) -> GroundingSample:
    seg = rec["segment"]
    if not isinstance(seg, list) or len(seg) != 2:
        raise InvalidSampleError("segment must be [start_s, end_s]", repr(seg))
    sample = GroundingSample(
        VideoMeta(str(rec["video_id"]), float(rec["duration_s"])),
        str(rec["query"]),
        TimeSegment(float(seg[0]), float(seg[1])),
    )
    return validate_sample(sample)


def read_jsonl(path, diagnostics: list | None = None) -> Iterator[GroundingSample]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield record_to_sample(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                _report(diagnostics, lineno, f"invalid record: {exc}")


def write_jsonl(samples: Iterable[GroundingSample], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample in samples:
            fh.write(json.dumps(sample_to_record(sample), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_any(path, fmt: str = "jsonl", durations=None, diagnostics=None) -> Iterator[GroundingSample]:
    if fmt == "jsonl":
        return read_jsonl(path, diagnostics)
    if fmt == "charades":
        return read_charades_sta(path, durations, diagnostics)
    if fmt == "anet":
        return read_activitynet_captions(path, diagnostics)
    raise ValueError(f"unknown input format {fmt!r}")


__all__ = [
    "read_charades_sta",
    "read_activitynet_captions",
    "read_jsonl",
    "write_jsonl",
    "read_any",
    "load_durations",
    "sample_to_record",
    "record_to_sample",
]
