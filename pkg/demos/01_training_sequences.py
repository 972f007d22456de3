"""
Building refinement training sequences
======================================

A grounding annotation (video, query, segment) becomes a short chain of
noisy guesses, each paired with the offset that would fix it.
"""

import numpy as np

from timerefine import NoiseSchedule, SeqGenConfig, generate_training_sample, make_sample

sample = make_sample("v_demo", 120.0, "the man pours coffee into a cup", 31.4, 47.0)

# default schedule: noise of 5 s, 3 s, 1 s, then the exact target
cfg = SeqGenConfig(seed=0)
rng = np.random.default_rng(0)
ts = generate_training_sample(sample, cfg, rng)
print(ts.answer_text)

# every step points back at the same target once its offset is added
for step in ts.sequence.steps:
    print(step.seg.as_tuple(), "->", tuple(round(v, 1) for v in step.refined))

# the noise is a standard deviation in seconds; here is what it looks like
# at the first step over many draws
draws = [generate_training_sample(sample, cfg, rng).sequence.steps[0].offset_start_s for _ in range(5000)]
print("first-step start offset: mean %.3f  std %.3f" % (np.mean(draws), np.std(draws)))

# short videos: guesses that fall outside [0, duration] are redrawn
short = make_sample("v_short", 10.0, "a door opens", 2.0, 4.5)
wide = SeqGenConfig(NoiseSchedule((20.0, 12.0, 4.0, 0.0)))
seq = generate_training_sample(short, wide, rng).sequence
print([s.seg.as_tuple() for s in seq.steps], "clamped" if seq.clamped else "")

# the two ablation formats
for variant in ("iou_prediction", "no_refinement"):
    print(variant, "|", generate_training_sample(sample, SeqGenConfig(variant=variant), rng).answer_text)
