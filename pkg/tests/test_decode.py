import pytest
from hypothesis import given, strategies as st

from timerefine.core import RefinementSequence, RefinementStep, TimeSegment, make_sample, quantize
from timerefine.decode import DecodeError, DecodeStrategy, decode, decode_with_flag
from timerefine.grammar import parse
from timerefine.seqgen import SeqGenConfig, generate_training_sample

TWO_STEP = ("<seg_start> 15.0s to 27.5s <offset> +4.0s and -1.5s "
            "<refine> 18.0s to 24.0s <offset> +0.6s and -0.2s <seg_end>")


def seq_of(*rows):
    return RefinementSequence.from_lists(rows)


def test_last_step_two_step_example():
    seq = seq_of((15.0, 27.5, 4.0, -1.5), (18.0, 24.0, 0.6, -0.2))
    assert decode(seq).as_tuple() == (18.6, 23.8)
    assert decode(parse(TWO_STEP).sequences[0]).as_tuple() == (18.6, 23.8)


def test_first_step_applies_offsets_by_default():
    seq = seq_of((15.0, 27.5, 4.0, -1.5), (18.0, 24.0, 0.6, -0.2))
    assert decode(seq, DecodeStrategy("first_step")).as_tuple() == (19.0, 26.0)
    assert decode(seq, DecodeStrategy("first_step", apply_offsets=False)).as_tuple() == (15.0, 27.5)
    assert DecodeStrategy.parse("first_step_raw").name == "first_step_raw"


def test_aux_head_pass_through():
    seq = seq_of((1, 2, 0, 0))
    assert decode(seq, DecodeStrategy("aux_head"), TimeSegment(5, 9)).as_tuple() == (5, 9)


def test_merged_mean():
    seq = seq_of((10, 20, 0, 0))
    assert decode(seq, DecodeStrategy("merged"), (12, 22)).as_tuple() == (11, 21)


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_merged_of_identical_is_identity(a, b):
    s, e = min(a, b) / 10, max(a, b) / 10
    seq = seq_of((s, e, 0.0, 0.0))
    assert decode(seq, DecodeStrategy("merged"), (s, e)).as_tuple() == (s, e)


def test_missing_aux_and_empty_errors():
    with pytest.raises(DecodeError):
        decode(seq_of((1, 2, 0, 0)), DecodeStrategy("aux_head"))
    with pytest.raises(DecodeError):
        decode(None)
    with pytest.raises(ValueError):
        DecodeStrategy("best_guess")


def test_inverted_and_negative_results_are_repaired():
    seg, flag = decode_with_flag(seq_of((5, 6, 3, -3)))
    assert seg.as_tuple() == (3.0, 8.0) and flag
    seg, flag = decode_with_flag(seq_of((1, 6, -4, 0)))
    assert seg.as_tuple() == (0.0, 6.0) and flag
    assert not decode_with_flag(seq_of((1, 6, 0, 0)))[1]


def test_generated_sequences_decode_to_target(rng):
    cfg = SeqGenConfig()
    for _ in range(500):
        dur = round(float(rng.uniform(10, 200)), 1)
        a, b = sorted(rng.integers(0, int(dur * 10), 2) / 10)
        ts = generate_training_sample(make_sample("v", dur, "q", a, b), cfg, rng)
        got = decode(ts.sequence)
        assert (quantize(got.start_s), quantize(got.end_s)) == (a, b)
        assert decode(ts.sequence, DecodeStrategy("first_step")).as_tuple() == (a, b)
