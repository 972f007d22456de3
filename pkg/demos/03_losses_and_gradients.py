"""
The auxiliary regression head
=============================

A linear head reads a hidden state and predicts (start, end) in seconds.
Its loss is added to the token cross-entropy with weight lambda = 10.
"""

import numpy as np

from timerefine import AuxHeadParams, LossConfig, TimeSegment
from timerefine.losses import aux_forward, aux_gradients, combined_loss, giou_1d, segment_loss

rng = np.random.default_rng(0)
params = AuxHeadParams.init(8, rng)
h = rng.normal(size=(3, 8))          # hidden states at three refine positions
gt = TimeSegment(12.0, 17.0)

pred = aux_forward(h, params)
print(pred)
for kind in ("l1", "l2", "l1_giou", "l2_giou"):
    print(kind, segment_loss(pred, [gt] * 3, kind))

# 1-D GIoU: IoU minus the share of the covering span that neither segment uses
print(giou_1d([[10, 20]], [[15, 25]]), giou_1d([[0, 5]], [[10, 20]]))

# total loss with random logits standing in for the language model
logits = rng.normal(size=(6, 50))
labels = rng.integers(0, 50, 6)
print(combined_loss((logits, labels), pred, [gt] * 3, LossConfig("l1")))

# a few steps of plain gradient descent on the bias and weights
lr = 0.5
for it in range(400):
    dw, db, _ = aux_gradients(h, params, gt, "l1_giou")
    params = AuxHeadParams(params.weights - lr * dw, params.bias - lr * db)
    if it % 100 == 0:
        print(it, segment_loss(aux_forward(h, params), [gt] * 3, "l1_giou"))
print(aux_forward(h, params).round(2))
