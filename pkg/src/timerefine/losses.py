"""Temporal-perception losses for the auxiliary segment head.

The head is a linear map from the hidden state of a ``<refine>`` token to a
(start, end) pair. Segment losses are averaged over the 2|S| endpoints:

    l1:  sum(|pred - gt|) / (2|S|)
    l2:  sum((pred - gt)**2) / (2|S|)
    *_giou: adds giou_weight * mean(1 - GIoU_1D) over segments

Gradients are closed form so a host training loop can adopt them directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

L1 = "l1"
L2 = "l2"
L1_GIOU = "l1_giou"
L2_GIOU = "l2_giou"
LOSS_KINDS = (L1, L1_GIOU, L2, L2_GIOU)


@dataclass(frozen=True)
class AuxHeadParams:
    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.bias, dtype=float).reshape(-1)
        if w.ndim != 2 or w.shape[0] != 2:
            raise ValueError(f"weights must have shape (2, d), got {w.shape}")
        if b.shape != (2,):
            raise ValueError(f"bias must have length 2, got {b.shape}")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("head parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def init(cls, dim: int, rng: np.random.Generator, scale: float = 0.02) -> "AuxHeadParams":
        return cls(rng.normal(0.0, scale, (2, dim)), np.zeros(2))


@dataclass(frozen=True)
class LossConfig:
    loss_kind: str = L1
    lam: float = 10.0
    giou_weight: float = 1.0

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.loss_kind!r}; expected one of {LOSS_KINDS}")
        if not self.lam >= 0:
            raise ValueError("lambda must be non-negative")
        if not self.giou_weight >= 0:
            raise ValueError("giou_weight must be non-negative")


def _as_pairs(x, name: str) -> np.ndarray:
    if hasattr(x, "as_tuple"):
        x = [x.as_tuple()]
    arr = np.array([p.as_tuple() if hasattr(p, "as_tuple") else p for p in x], dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must be a list of (start, end) pairs")
    return arr


def aux_forward(h, params: AuxHeadParams) -> np.ndarray:
    """Head output ``weights @ h + bias``; ``h`` may be (d,) or (n, d)."""
    h = np.asarray(h, dtype=float)
    if h.shape[-1] != params.dim:
        raise ValueError(f"hidden size {h.shape[-1]} does not match head width {params.dim}")
    return h @ params.weights.T + params.bias


def giou_1d(pred, gt) -> np.ndarray:
    """Generalized IoU between rows of two (n, 2) interval arrays.

    Predicted rows are endpoint-sorted first. Returns values in (-1, 1].
    """
    return _giou_and_grad(np.atleast_2d(np.asarray(pred, float)), np.atleast_2d(np.asarray(gt, float)))[0]


def _giou_and_grad(pred: np.ndarray, gt: np.ndarray):
    swapped = pred[:, 0] > pred[:, 1]
    a0 = np.where(swapped, pred[:, 1], pred[:, 0])
    a1 = np.where(swapped, pred[:, 0], pred[:, 1])
    b0, b1 = gt[:, 0], gt[:, 1]

    raw = np.minimum(a1, b1) - np.maximum(a0, b0)
    overlap = raw > 0
    inter = np.where(overlap, raw, 0.0)
    union = (a1 - a0) + (b1 - b0) - inter
    cover = np.maximum(a1, b1) - np.minimum(a0, b0)

    safe_u = np.where(union > 0, union, 1.0)
    safe_c = np.where(cover > 0, cover, 1.0)
    iou = np.where(union > 0, inter / safe_u, np.where(cover > 0, 0.0, 1.0))
    giou = np.where(cover > 0, iou - (cover - union) / safe_c, 1.0)

    dI0 = np.where(overlap & (a0 > b0), -1.0, 0.0)
    dI1 = np.where(overlap & (a1 < b1), 1.0, 0.0)
    dU0 = -1.0 - dI0
    dU1 = 1.0 - dI1
    dC0 = np.where(a0 < b0, -1.0, 0.0)
    dC1 = np.where(a1 > b1, 1.0, 0.0)

    def dg(dI, dU, dC):
        return (dI * union - inter * dU) / safe_u**2 + (dU * cover - union * dC) / safe_c**2

    live = (union > 0) & (cover > 0)
    g0 = np.where(live, dg(dI0, dU0, dC0), 0.0)
    g1 = np.where(live, dg(dI1, dU1, dC1), 0.0)
    grad = np.stack([np.where(swapped, g1, g0), np.where(swapped, g0, g1)], axis=1)
    return giou, grad


def _segment_loss_and_grad(pred: np.ndarray, gt: np.ndarray, kind: str, giou_weight: float = 1.0):
    if pred.shape != gt.shape:
        raise ValueError(f"prediction/ground-truth length mismatch: {len(pred)} vs {len(gt)}")
    n = pred.shape[0]
    if n == 0:
        raise ValueError("segment_loss needs at least one segment")
    if kind not in LOSS_KINDS:
        raise ValueError(f"unknown loss kind {kind!r}")
    r = pred - gt
    if kind in (L1, L1_GIOU):
        loss = np.abs(r).sum() / (2 * n)
        grad = np.sign(r) / (2 * n)
    else:
        loss = (r**2).sum() / (2 * n)
        grad = r / n
    if kind in (L1_GIOU, L2_GIOU):
        g, dg = _giou_and_grad(pred, gt)
        loss = loss + giou_weight * (1.0 - g).mean()
        grad = grad - giou_weight * dg / n
    return float(loss), grad


def segment_loss(pred, gt, kind: str = L1, giou_weight: float = 1.0) -> float:
    pred = _as_pairs(pred, "pred")
    gt = _as_pairs(gt, "gt")
    return _segment_loss_and_grad(pred, gt, kind, giou_weight)[0]


def cross_entropy(logits, labels) -> float:
    """Mean token cross-entropy, via a max-shifted log-sum-exp."""
    x = np.atleast_2d(np.asarray(logits, dtype=float))
    y = np.asarray(labels).reshape(-1)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"{x.shape[0]} logit rows but {y.shape[0]} labels")
    if x.shape[0] == 0:
        raise ValueError("cross_entropy needs at least one token")
    if not np.issubdtype(y.dtype, np.integer):
        raise ValueError("labels must be integer class indices")
    if (y < 0).any() or (y >= x.shape[1]).any():
        raise ValueError(f"label out of range for vocabulary of size {x.shape[1]}")
    m = x.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(x - m).sum(axis=1))
    return float((lse - x[np.arange(len(y)), y]).mean())


def combined_loss(ce_inputs, aux_preds, gt_segments, config: LossConfig = LossConfig()) -> float:
    logits, labels = ce_inputs
    seg = segment_loss(aux_preds, gt_segments, config.loss_kind, config.giou_weight)
    return cross_entropy(logits, labels) + config.lam * seg


def _broadcast_gt(gt, n: int) -> np.ndarray:
    arr = _as_pairs(gt, "gt")
    if arr.shape[0] == 1 and n > 1:
        arr = np.repeat(arr, n, axis=0)
    return arr


def aux_gradients(h, params: AuxHeadParams, gt, kind: str = L1, giou_weight: float = 1.0):
    """Gradients of ``segment_loss(aux_forward(h), gt)``.

    ``h`` is (d,) for one refine position or (n, d) for several; a single
    ground-truth segment is shared by all positions. Returns
    ``(d_weights, d_bias, d_h)`` shaped like ``weights``, ``bias`` and ``h``.
    L1 terms are non-differentiable at zero residual; the subgradient 0 is used.
    """
    h = np.asarray(h, dtype=float)
    single = h.ndim == 1
    H = np.atleast_2d(h)
    pred = aux_forward(H, params)
    gt_arr = _broadcast_gt(gt, H.shape[0])
    _, g = _segment_loss_and_grad(pred, gt_arr, kind, giou_weight)
    d_w = g.T @ H
    d_b = g.sum(axis=0)
    d_h = g @ params.weights
    return d_w, d_b, (d_h[0] if single else d_h)


def select_positions(h_refine, positions: str = "all") -> np.ndarray:
    """Hidden states supervised by the head: every ``<refine>`` position or only the last."""
    H = np.atleast_2d(np.asarray(h_refine, dtype=float))
    if positions == "all":
        return H
    if positions == "last":
        return H[-1:]
    raise ValueError(f"positions must be 'all' or 'last', got {positions!r}")


def aux_head_loss(h_refine, params: AuxHeadParams, gt, config: LossConfig = LossConfig(),
                  positions: str = "all", duration: float | None = None) -> float:
    """Weighted segment loss of the head over the chosen ``<refine>`` positions.

    With ``duration`` set, targets are expressed as fractions of the video.
    """
    H = select_positions(h_refine, positions)
    gt_arr = _broadcast_gt(gt, H.shape[0])
    if duration is not None:
        gt_arr = gt_arr / float(duration)
    return config.lam * segment_loss(aux_forward(H, params), gt_arr, config.loss_kind, config.giou_weight)
