import numpy as np
import pytest

from timerefine.core import RefinementSequence, RefinementStep, TimeSegment
from timerefine.losses import AuxHeadParams, aux_forward, segment_loss


def random_sequence(rng: np.random.Generator, k: int | None = None, horizon: float = 300.0) -> RefinementSequence:
    """Random valid sequence with every value on the 0.1 s grid."""
    k = int(rng.integers(1, 9)) if k is None else k
    steps = []
    for _ in range(k):
        a, b = sorted(rng.integers(0, int(horizon * 10), size=2))
        os_, oe = rng.integers(-500, 501, size=2)
        steps.append(RefinementStep(TimeSegment(a / 10, b / 10), os_ / 10 + 0.0, oe / 10 + 0.0))
    return RefinementSequence(tuple(steps))


def brute_force_iou_ms(a, b) -> float:
    """IoU by counting covered 1 ms cells; endpoints must sit on the ms grid."""
    a0, a1, b0, b1 = (int(round(x * 1000)) for x in (*a, *b))
    lo, hi = min(a0, b0), max(a1, b1)
    if hi == lo:
        return 1.0 if (a0, a1) == (b0, b1) else 0.0
    cells = np.arange(lo, hi)
    in_a = (cells >= a0) & (cells < a1)
    in_b = (cells >= b0) & (cells < b1)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return 1.0 if (a0, a1) == (b0, b1) else 0.0
    return np.count_nonzero(in_a & in_b) / union


def fd_gradients(h, params, gt, kind, eps=1e-5):
    """Central differences of segment_loss(aux_forward(.)) in W, b and h."""
    gts = [gt] * np.atleast_2d(h).shape[0]

    def f(W, b, hh):
        return segment_loss(np.atleast_2d(aux_forward(hh, AuxHeadParams(W, b))), gts, kind)

    W, b, h = params.weights.copy(), params.bias.copy(), np.array(h, float)
    out = []
    for arr in (W, b, h):
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + eps
            up = f(W, b, h)
            arr[idx] = orig - eps
            down = f(W, b, h)
            arr[idx] = orig
            g[idx] = (up - down) / (2 * eps)
        out.append(g)
    return out


def rel_err(a, n):
    return np.max(np.abs(a - n)) / max(np.max(np.abs(n)), np.max(np.abs(a)), 1e-12)


def random_config(rng, kind, n_pos=None, d=None):
    """A head/input/target draw that stays clear of every kink of ``kind``."""
    d = d or int(rng.integers(2, 7))
    n_pos = n_pos or int(rng.integers(1, 4))
    while True:
        params = AuxHeadParams(rng.normal(0, 1.0, (2, d)), rng.normal(0, 3.0, 2) + [20.0, 30.0])
        h = rng.normal(0, 2.0, (n_pos, d))
        a = float(rng.uniform(5, 25))
        gt = TimeSegment(a, a + float(rng.uniform(3, 15)))
        pred = aux_forward(h, params)
        pts = np.concatenate([pred.ravel(), [gt.start_s, gt.end_s]])
        # every pairwise gap (residuals, interval ties, inter boundary) away from zero
        gaps = np.abs(pts[:, None] - pts[None, :])[np.triu_indices(pts.size, 1)]
        if gaps.min() > 1e-2:
            return h, params, gt


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
