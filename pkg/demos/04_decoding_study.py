"""
Which step should we trust?
===========================

A stand-in predictor makes errors that shrink along the chain. Scoring the
four decoding rules on the same predictions shows why reading the last
refined step pays off.
"""

from timerefine import DecodeStrategy, PredictorModel, synthetic_samples
from timerefine.metrics import format_table
from timerefine.simulate import paired_difference, run_study, simulate_ious

samples = synthetic_samples(5000, seed=0)
strategies = [DecodeStrategy(k) for k in ("first_step", "last_step", "aux_head", "merged")]

model = PredictorModel(seed=0)       # errors of 5, 3, 1 and 0.3 s
print(format_table(run_study(samples, model, strategies)))

# the gap between last and first step, with a paired standard error
ious = simulate_ious(samples, model, strategies[:2])
diff, se = paired_difference(ious[:, 1], ious[:, 0])
print("last - first: %.2f +/- %.2f mIoU points" % (diff, se))

# reading the first guess without its offset shows the raw segment error
raw = DecodeStrategy("first_step", apply_offsets=False)
print(format_table(run_study(samples, model, [raw, strategies[1]])))

# a perfect predictor scores 100 whichever step is read
perfect = PredictorModel((5.0, 3.0, 1.0, 0.0), (0.0, 0.0, 0.0, 0.0))
print(format_table(run_study(samples[:500], perfect, strategies)))
