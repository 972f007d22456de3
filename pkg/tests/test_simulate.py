import math

import numpy as np
import pytest

from timerefine.core import make_sample
from timerefine.decode import DecodeStrategy
from timerefine.grammar import parse, serialize
from timerefine.seqgen import sample_rng
from timerefine.simulate import (
    PredictorModel,
    paired_difference,
    run_study,
    simulate_ious,
    simulate_prediction,
    synthetic_samples,
)
from timerefine.decode import decode

ALL = [DecodeStrategy(k) for k in ("first_step", "last_step", "aux_head", "merged")]


def test_noiseless_predictor_is_exact():
    model = PredictorModel((0, 0, 0, 0), (0, 0, 0, 0))
    for s in synthetic_samples(200, seed=1):
        seq = simulate_prediction(s, model, np.random.default_rng(0))
        for i in range(len(seq)):
            assert decode(type(seq)(seq.steps[i:i + 1])) == s.target


def test_fixed_seed_is_deterministic():
    s = make_sample("v", 60, "q", 10, 20)
    model = PredictorModel()
    assert simulate_prediction(s, model, sample_rng(3, 0)) == simulate_prediction(s, model, sample_rng(3, 0))


def test_simulated_sequences_survive_codec(rng):
    model = PredictorModel()
    for s in synthetic_samples(500, seed=2):
        seq = simulate_prediction(s, model, rng)
        assert parse(serialize(seq)).sequences == [seq]


def test_model_validation():
    with pytest.raises(ValueError):
        PredictorModel((1, 2), (1,))
    with pytest.raises(ValueError):
        PredictorModel((1, -2), (1, 1))


def test_raw_first_step_error_matches_folded_normal():
    # error of the raw first-step segment is |N(0, 5^2)|, expectation 5*sqrt(2/pi)
    samples = synthetic_samples(10_000, seed=4, duration_range=(400, 500), min_length=50)
    model = PredictorModel((5, 3, 1, 0.3), (0, 0, 0, 0), seed=9)
    err_first, err_last = [], []
    for i, s in enumerate(samples):
        seq = simulate_prediction(s, model, sample_rng(model.seed, i))
        err_first.append(abs(decode(seq, DecodeStrategy("first_step", apply_offsets=False)).start_s - s.target.start_s))
        err_last.append(abs(decode(seq).start_s - s.target.start_s))
    expected = 5 * math.sqrt(2 / math.pi)
    se = np.std(err_first) / math.sqrt(len(err_first))
    assert abs(np.mean(err_first) - expected) < 4 * se + 0.01
    assert np.mean(err_last) < np.mean(err_first)


def test_noiseless_study_all_perfect():
    samples = synthetic_samples(300, seed=5)
    reports = run_study(samples, PredictorModel((5, 3, 1, 0), (0, 0, 0, 0)), ALL)
    assert {k: r.miou for k, r in reports.items()} == {k.name: 100.0 for k in ALL}


def test_last_step_beats_first_step():
    samples = synthetic_samples(3000, seed=6)
    reports = run_study(samples, PredictorModel(seed=1), ALL)
    assert reports["last_step"].miou > reports["first_step"].miou


def test_single_strategy_study():
    reports = run_study(synthetic_samples(20), PredictorModel(), [DecodeStrategy("last_step")])
    assert list(reports) == ["last_step"]


def test_study_independent_of_workers():
    samples = synthetic_samples(500, seed=7)
    a = run_study(samples, PredictorModel(seed=2), ALL)
    b = run_study(samples, PredictorModel(seed=2), ALL, workers=4)
    assert {k: v.to_dict(None) for k, v in a.items()} == {k: v.to_dict(None) for k, v in b.items()}


def test_paired_difference_and_iou_matrix():
    samples = synthetic_samples(400, seed=8)
    m = simulate_ious(samples, PredictorModel(seed=3), ALL[:2])
    assert m.shape == (400, 2)
    mean, se = paired_difference(m[:, 1], m[:, 0])
    assert se > 0 and mean > 0


def test_empty_study_rejected():
    with pytest.raises(ValueError):
        run_study([], PredictorModel(), ALL)
