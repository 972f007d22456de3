"""Temporal grounding metrics: IoU, Recall@1 at IoU thresholds, mean IoU."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .core import TimeSegment

THRESHOLDS = (0.3, 0.5, 0.7)


def _iou_raw(a0: float, a1: float, b0: float, b1: float) -> float:
    inter = max(0.0, min(a1, b1) - max(a0, b0))
    union = (a1 - a0) + (b1 - b0) - inter
    if union <= 0:
        # both zero-length: same point counts as a perfect match
        return 1.0 if (a0 == b0 and a1 == b1) else 0.0
    return inter / union


def iou(a: TimeSegment, b: TimeSegment) -> float:
    return _iou_raw(a.start_s, a.end_s, b.start_s, b.end_s)


class EvalPair(NamedTuple):
    prediction: Optional[TimeSegment]
    ground_truth: TimeSegment

    @property
    def iou(self) -> float:
        return 0.0 if self.prediction is None else iou(self.prediction, self.ground_truth)


def _require(pairs) -> list[EvalPair]:
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no evaluation pairs")
    return pairs


def recall_at(pairs: Iterable[EvalPair], threshold: float) -> float:
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    pairs = _require(pairs)
    hits = sum(1 for p in pairs if p.prediction is not None and p.iou >= threshold)
    return 100.0 * hits / len(pairs)


def mean_iou(pairs: Iterable[EvalPair]) -> float:
    pairs = _require(pairs)
    return 100.0 * sum(p.iou for p in pairs) / len(pairs)


@dataclass
class EvalAccumulator:
    """Running counts for a report. Accumulators over disjoint partitions merge exactly."""

    thresholds: tuple[float, ...] = THRESHOLDS
    n: int = 0
    absent: int = 0
    iou_sum: float = 0.0
    hits: dict = field(default_factory=dict)

    def add(self, pair: EvalPair) -> None:
        self.n += 1
        if pair.prediction is None:
            self.absent += 1
            return
        v = pair.iou
        self.iou_sum += v
        for t in self.thresholds:
            if v >= t:
                self.hits[t] = self.hits.get(t, 0) + 1

    def merge(self, other: "EvalAccumulator") -> "EvalAccumulator":
        if other.thresholds != self.thresholds:
            raise ValueError("cannot merge accumulators with different thresholds")
        hits = dict(self.hits)
        for t, c in other.hits.items():
            hits[t] = hits.get(t, 0) + c
        return EvalAccumulator(
            self.thresholds, self.n + other.n, self.absent + other.absent, self.iou_sum + other.iou_sum, hits
        )

    def report(self) -> "EvalReport":
        if self.n == 0:
            raise ValueError("no evaluation pairs")
        return EvalReport(
            r_at={t: 100.0 * self.hits.get(t, 0) / self.n for t in self.thresholds},
            miou=100.0 * self.iou_sum / self.n,
            n=self.n,
            failure_rate=self.absent / self.n,
        )


@dataclass(frozen=True)
class EvalReport:
    r_at: dict
    miou: float
    n: int
    failure_rate: float

    def to_dict(self, ndigits: int | None = 1) -> dict:
        rnd = (lambda x: round(x, ndigits)) if ndigits is not None else (lambda x: x)
        out = {f"r@{t}": rnd(v) for t, v in sorted(self.r_at.items())}
        out["miou"] = rnd(self.miou)
        out["n"] = self.n
        out["failure_rate"] = self.failure_rate
        return out

    def row(self) -> list[str]:
        return [f"{self.r_at[t]:.1f}" for t in sorted(self.r_at)] + [f"{self.miou:.1f}"]


def build_report(pairs: Iterable[EvalPair], thresholds=THRESHOLDS) -> EvalReport:
    acc = EvalAccumulator(tuple(thresholds))
    for p in _require(pairs):
        acc.add(p)
    return acc.report()


def format_table(reports: dict) -> str:
    """Plain-text table, one row per named report, columns R@0.3 R@0.5 R@0.7 mIoU."""
    if not reports:
        return ""
    first = next(iter(reports.values()))
    header = ["method"] + [f"R@{t}" for t in sorted(first.r_at)] + ["mIoU"]
    rows = [header] + [[name] + rep.row() for name, rep in reports.items()]
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells))
    return "\n".join(lines)
