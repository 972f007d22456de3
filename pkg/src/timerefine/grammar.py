"""Text codec for refinement sequences wrapped in control tokens.

Canonical form (one block)::

    <seg_start> 15.0 to 27.5 <offset> 4.0 and -1.5 <refine> ... <seg_end>

The parser is liberal: it accepts an ``s`` suffix on numbers, a leading ``+``,
integers and any number of decimals, and arbitrary whitespace. It never
raises; problems are reported as diagnostics.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .core import Diagnostic, InvalidSampleError, RefinementSequence, RefinementStep, quantize

SEG_START = "<seg_start>"
OFFSET = "<offset>"
REFINE = "<refine>"
SEG_END = "<seg_end>"
CONTROL_TOKENS = (SEG_START, OFFSET, REFINE, SEG_END)

_NUM = r"([+-]?\d+(?:\.\d+)?)s?"
_STEP_RE = re.compile(
    rf"^\s*{_NUM}\s+to\s+{_NUM}\s*<offset>\s*{_NUM}\s+and\s+{_NUM}\s*$",
    re.ASCII,
)
_MARKER_RE = re.compile(r"<seg_start>|<seg_end>")


def format_time(x: float) -> str:
    return f"{quantize(x):.1f}"


def serialize_step(step: RefinementStep) -> str:
    s, e, os_, oe = step.as_tuple()
    return f"{format_time(s)} to {format_time(e)} {OFFSET} {format_time(os_)} and {format_time(oe)}"


def serialize(seq: RefinementSequence) -> str:
    body = f" {REFINE} ".join(serialize_step(step) for step in seq.steps)
    return f"{SEG_START} {body} {SEG_END}"


def embed_in_answer(prefix_text: str, seq: RefinementSequence, suffix_text: str) -> str:
    parts = [prefix_text, serialize(seq), suffix_text]
    return " ".join(p for p in parts if p)


@dataclass
class ParseOutcome:
    sequences: list[RefinementSequence] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    unparsed_spans: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.sequences)


def _parse_block(body: str, offset: int) -> tuple[RefinementSequence | None, list[Diagnostic]]:
    steps = []
    pos = offset
    for i, chunk in enumerate(body.split(REFINE)):
        m = _STEP_RE.match(chunk)
        if m is None:
            snippet = chunk.strip()[:40]
            return None, [Diagnostic(pos, f"incomplete step {i}: {snippet!r}")]
        try:
            steps.append(RefinementStep.from_tuple([float(g) for g in m.groups()]))
        except (InvalidSampleError, OverflowError) as exc:
            return None, [Diagnostic(pos, f"invalid step {i}: {exc}")]
        pos += len(chunk) + len(REFINE)
    return RefinementSequence(tuple(steps)), []


def parse(text: str) -> ParseOutcome:
    """Extract every well-formed refinement block from ``text`` in order."""
    out = ParseOutcome()
    if not isinstance(text, str):
        out.diagnostics.append(Diagnostic(0, f"expected text, got {type(text).__name__}"))
        return out

    consumed: list[tuple[int, int]] = []
    open_at = None
    for m in _MARKER_RE.finditer(text):
        tok = m.group()
        if tok == SEG_START:
            if open_at is not None:
                out.diagnostics.append(Diagnostic(open_at, "nested <seg_start> before <seg_end>; block dropped"))
            open_at = m.start()
            continue
        if open_at is None:
            out.diagnostics.append(Diagnostic(m.start(), "<seg_end> without <seg_start>"))
            continue
        body_start = open_at + len(SEG_START)
        seq, diags = _parse_block(text[body_start:m.start()], body_start)
        if seq is not None:
            out.sequences.append(seq)
            consumed.append((open_at, m.end()))
        out.diagnostics.extend(diags)
        open_at = None
    if open_at is not None:
        out.diagnostics.append(Diagnostic(open_at, "unterminated block: missing <seg_end>"))

    prev = 0
    for a, b in consumed + [(len(text), len(text))]:
        if text[prev:a].strip():
            out.unparsed_spans.append((prev, a))
        prev = b
    if not out.sequences and not out.diagnostics:
        out.diagnostics.append(Diagnostic(0, "no refinement block found"))
    return out


def parse_many(texts: Iterable[str]) -> list[ParseOutcome]:
    return [parse(t) for t in texts]
